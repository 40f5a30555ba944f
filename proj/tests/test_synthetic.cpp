#include "orpco/synthetic.hpp"

#include "orpco/stats.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace orpco;

TEST_SUITE("synthetic") {

TEST_CASE("generates the requested record count with production dims") {
    const auto spec = SyntheticSpec::production_like();
    CHECK(spec.schema.dim_x() == 3);
    CHECK(spec.schema.dim_u() == 4);
    CHECK(spec.schema.dim_y() == 7);
    auto ds = generate_synthetic_discrete(spec, 500, 1);
    CHECK(ds.size() == 500);

    auto empty = generate_synthetic_discrete(spec, 0, 1);
    CHECK(empty.size() == 0);
}

TEST_CASE("planted result correlation is recovered empirically") {
    const auto spec = SyntheticSpec::production_like(0.9);
    auto ds = generate_synthetic_discrete(spec, 12000, 5);
    std::vector<double> y0, y1;
    for (const auto& r : ds.records()) {
        y0.push_back(r.y[0]);
        y1.push_back(r.y[1]);
    }
    const double m0 = mean_of(y0), m1 = mean_of(y1);
    double num = 0, d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
        num += (y0[i] - m0) * (y1[i] - m1);
        d0 += (y0[i] - m0) * (y0[i] - m0);
        d1 += (y1[i] - m1) * (y1[i] - m1);
    }
    const double corr = num / std::sqrt(d0 * d1);
    CHECK(corr == doctest::Approx(0.9).epsilon(0.056)); // +-0.05 absolute
    CHECK(std::fabs(corr - 0.9) <= 0.05);
}

TEST_CASE("brute-force truth matches the analytic quadratic expectation") {
    const auto spec = SyntheticSpec::production_like();
    Rng rng = make_rng(3);
    const Eigen::VectorXd x = spec.sample_x(rng);
    const Eigen::VectorXd u = spec.sample_u_given_x(x, rng);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(7, 7);
    a(0, 0) = 0.5;
    a(0, 1) = a(1, 0) = -0.2; // exercises the off-diagonal covariance
    a(3, 3) = 0.1;
    Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(7, -0.3, 0.3);
    const double c = 0.7;
    const auto reward = quadratic_reward(a, b, c);

    const double analytic = spec.analytic_expected_quadratic(x, u, a, b, c);
    const int n = 1000000;
    const double mc = spec.true_expected_reward(x, u, reward, n, 17);

    // 3 standard errors from an auxiliary draw of the reward's variance
    Rng vr = make_rng(99);
    double s2 = 0;
    const int n_var = 20000;
    for (int i = 0; i < n_var; ++i) {
        const double r = reward(spec.sample_y(x, u, vr));
        s2 += (r - analytic) * (r - analytic);
    }
    const double se = std::sqrt(s2 / n_var / n);
    CHECK(std::fabs(mc - analytic) <= 3.0 * se + 1e-12);
}

TEST_CASE("box reward rate is informative on logged data") {
    const auto spec = SyntheticSpec::production_like();
    auto ds = generate_synthetic_discrete(spec, 4000, 11);
    const auto reward = spec.box_reward();
    double acc = 0;
    for (const auto& r : ds.records()) acc += reward(r.y);
    const double rate = acc / static_cast<double>(ds.size());
    CHECK(rate > 0.2);
    CHECK(rate < 0.95);
}

TEST_CASE("spec json round trip preserves sampling behavior") {
    const auto spec = SyntheticSpec::with_ood_trap();
    const auto back = SyntheticSpec::from_json(spec.to_json());
    Rng r1 = make_rng(5), r2 = make_rng(5);
    const auto x1 = spec.sample_x(r1), x2 = back.sample_x(r2);
    CHECK(x1 == x2);
    const auto u1 = spec.sample_u_given_x(x1, r1), u2 = back.sample_u_given_x(x2, r2);
    CHECK(u1 == u2);
    CHECK(spec.sample_y(x1, u1, r1) == back.sample_y(x2, u2, r2));
}

TEST_CASE("trap spec hides u0 above the logging ceiling and punishes beyond it") {
    const auto spec = SyntheticSpec::with_ood_trap();
    auto ds = generate_synthetic_discrete(spec, 3000, 7);
    double u0_max = 0;
    for (const auto& r : ds.records()) u0_max = std::max(u0_max, r.u[0]);
    CHECK(u0_max <= 0.66 + 1e-12);

    // beyond the cliff the true reward collapses
    Rng rng = make_rng(23);
    const Eigen::VectorXd x = spec.sample_x(rng);
    Eigen::VectorXd u_in = spec.sample_u_given_x(x, rng);
    Eigen::VectorXd u_trap = u_in;
    u_in[0] = 0.60;
    u_trap[0] = 0.95;
    const auto reward = spec.box_reward();
    const double r_in = spec.true_expected_reward(x, u_in, reward, 20000, 31);
    const double r_trap = spec.true_expected_reward(x, u_trap, reward, 20000, 31);
    CHECK(r_in > 0.5);
    CHECK(r_trap < 0.05);
}

} // TEST_SUITE
