#include "orpco/cgan.hpp"

#include "orpco/errors.hpp"
#include "orpco/gaussian.hpp"
#include "orpco/stats.hpp"
#include "orpco/synthetic.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace orpco;
using orpco::test::TempDir;

namespace {

// toy process: y = u + 0.1 * eps, all values pre-normalized to [0,1]-ish
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> toy_data(int n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Eigen::MatrixXd xu(n, 1), y(n, 1);
    for (int i = 0; i < n; ++i) {
        xu(i, 0) = uniform01(rng);
        y(i, 0) = xu(i, 0) + 0.1 * normal(rng);
    }
    return {xu, y};
}

CganConfig toy_config() {
    CganConfig cfg;
    cfg.epochs = 160;
    cfg.batch_size = 128;
    cfg.noise_dim = 3;
    cfg.hidden = {32, 32};
    return cfg;
}

} // namespace

TEST_SUITE("cgan") {

TEST_CASE("training errors on a dataset smaller than one batch") {
    auto [xu, y] = toy_data(64, 1);
    CganConfig cfg;
    cfg.batch_size = 256;
    CHECK_THROWS_AS(static_cast<void>(train_cgan(xu, y, cfg, 1)), ConfigError);
}

TEST_CASE("toy process: generated samples match the known conditional") {
    auto [xu, y] = toy_data(4000, 2);
    std::vector<EpochLoss> log;
    CganModel model = train_cgan(xu, y, toy_config(), 7, &log);
    CHECK(log.size() == 160);

    const Eigen::VectorXd empty(0);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.5);
    const Eigen::MatrixXd draws = model.sample(empty, u, 4000, 11);
    const auto m = empirical_moments(draws);
    CHECK(std::fabs(m.mean[0] - 0.5) <= 0.05);
    const double sd = std::sqrt(m.cov(0, 0));
    CHECK(sd >= 0.05);
    CHECK(sd <= 0.2);
}

TEST_CASE("gradient penalty keeps discriminator gradients near unit norm") {
    auto [xu, y] = toy_data(2000, 3);
    CganModel model = train_cgan(xu, y, toy_config(), 5);

    // packed interpolates between real and generated results at logged
    // conditions, one mixing scalar per pack; norm over the result blocks
    Rng rng = make_rng(9);
    const int pac = model.pac();
    const int tuple = 1 + 1; // dy + cond
    const int n_packs = 64;
    Eigen::MatrixXd interp(n_packs, pac * tuple);
    const Eigen::VectorXd empty(0);
    for (int p = 0; p < n_packs; ++p) {
        const double alpha = uniform01(rng);
        for (int j = 0; j < pac; ++j) {
            const int k = static_cast<int>(rng() % 2000);
            const Eigen::VectorXd u = xu.row(k).transpose();
            const double fake = model.sample(empty, u, 1, rng())(0, 0);
            interp(p, j * tuple) = alpha * y(k, 0) + (1 - alpha) * fake;
            interp(p, j * tuple + 1) = xu(k, 0);
        }
    }
    const Eigen::MatrixXd g = model.discriminator().input_gradient(interp);
    double acc = 0;
    for (int p = 0; p < n_packs; ++p) {
        double sq = 0;
        for (int j = 0; j < pac; ++j) sq += g(p, j * tuple) * g(p, j * tuple);
        acc += std::sqrt(sq);
    }
    const double mean_norm = acc / n_packs;
    CHECK(mean_norm >= 0.8);
    CHECK(mean_norm <= 1.2);
}

TEST_CASE("sampling is deterministic given the seed and respects shape") {
    auto [xu, y] = toy_data(512, 4);
    CganConfig cfg = toy_config();
    cfg.epochs = 10;
    CganModel model = train_cgan(xu, y, cfg, 3);
    const Eigen::VectorXd empty(0);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.3);
    CHECK(model.sample(empty, u, 1, 5).rows() == 1);
    CHECK(model.sample(empty, u, 7, 5).cols() == 1);
    CHECK(model.sample(empty, u, 9, 5) == model.sample(empty, u, 9, 5));
    CHECK(model.sample(empty, u, 9, 5) != model.sample(empty, u, 9, 6));
}

TEST_CASE("ensemble: member count, determinism, and the M >= 2 rule") {
    const auto spec = SyntheticSpec::production_like();
    auto data = generate_synthetic_discrete(spec, 600, 9);
    CganConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 128;
    CHECK_THROWS_AS(static_cast<void>(train_cgan_ensemble(data, 1, cfg, 1)), ConfigError);

    auto e1 = train_cgan_ensemble(data, 2, cfg, 33);
    auto e2 = train_cgan_ensemble(data, 2, cfg, 33);
    CHECK(e1.size() == 2);
    const auto& rec = data.records()[0];
    CHECK(e1.sample_normalized(0, rec.x, rec.u, 5, 1) == e2.sample_normalized(0, rec.x, rec.u, 5, 1));
    CHECK(e1.sample_normalized(1, rec.x, rec.u, 5, 1) == e2.sample_normalized(1, rec.x, rec.u, 5, 1));
    // different members differ
    CHECK(e1.sample_normalized(0, rec.x, rec.u, 5, 1) != e1.sample_normalized(1, rec.x, rec.u, 5, 1));
}

TEST_CASE("fidelity: trained generator beats an untrained one on energy distance") {
    auto [xu, y] = toy_data(3000, 6);
    CganConfig cfg = toy_config();
    CganModel trained = train_cgan(xu, y, cfg, 8);

    // untrained reference with the same architecture
    auto [xu2, y2] = toy_data(128, 60);
    CganConfig fresh = cfg;
    fresh.epochs = 0;
    CganModel untrained = train_cgan(xu2, y2, fresh, 9);

    auto held = toy_data(400, 100);
    Eigen::MatrixXd real(400, 1), gen_t(400, 1), gen_u(400, 1);
    const Eigen::VectorXd empty(0);
    for (int i = 0; i < 400; ++i) {
        real(i, 0) = held.second(i, 0);
        const Eigen::VectorXd u = held.first.row(i).transpose();
        gen_t(i, 0) = trained.sample(empty, u, 1, 1000 + i)(0, 0);
        gen_u(i, 0) = untrained.sample(empty, u, 1, 1000 + i)(0, 0);
    }
    const double e_trained = energy_distance(real, gen_t);
    const double e_untrained = energy_distance(real, gen_u);
    CHECK(e_trained < 0.5 * e_untrained);
}

TEST_CASE("ensemble checkpoint directory round-trips") {
    const auto spec = SyntheticSpec::production_like();
    auto data = generate_synthetic_discrete(spec, 400, 10);
    CganConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 128;
    auto ens = train_cgan_ensemble(data, 2, cfg, 17);

    TempDir tmp;
    ens.save((tmp.path / "ens").string());
    auto back = DynamicsEnsemble::load((tmp.path / "ens").string());
    CHECK(back.kind == "cgan");
    CHECK(back.size() == 2);
    CHECK(back.schema.hash() == ens.schema.hash());
    const auto& rec = data.records()[3];
    CHECK(back.sample_normalized(1, rec.x, rec.u, 6, 2) ==
          ens.sample_normalized(1, rec.x, rec.u, 6, 2));
}

} // TEST_SUITE
