#include "orpco/cgan.hpp"

#include "orpco/adam.hpp"
#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"
#include "orpco/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orpco {

nlohmann::json CganConfig::to_json() const {
    return {{"epochs", epochs},
            {"batch_size", batch_size},
            {"gp_lambda", gp_lambda},
            {"noise_dim", noise_dim},
            {"critic_steps", critic_steps},
            {"lr", lr},
            {"gen_lr", gen_lr},
            {"critic_warmup", critic_warmup},
            {"pac", pac},
            {"scale_floor", scale_floor},
            {"scale_init_sd", scale_init_sd},
            {"gen_init_gain", gen_init_gain},
            {"beta1", beta1},
            {"beta2", beta2},
            {"hidden", hidden},
            {"scale_hidden", scale_hidden}};
}

CganConfig CganConfig::from_json(const nlohmann::json& j) {
    CganConfig c;
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.gp_lambda = j.value("gp_lambda", c.gp_lambda);
    c.noise_dim = j.value("noise_dim", c.noise_dim);
    c.critic_steps = j.value("critic_steps", c.critic_steps);
    c.lr = j.value("lr", c.lr);
    c.gen_lr = j.value("gen_lr", c.gen_lr);
    c.critic_warmup = j.value("critic_warmup", c.critic_warmup);
    c.pac = j.value("pac", c.pac);
    c.scale_floor = j.value("scale_floor", c.scale_floor);
    c.scale_init_sd = j.value("scale_init_sd", c.scale_init_sd);
    c.gen_init_gain = j.value("gen_init_gain", c.gen_init_gain);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.hidden = j.value("hidden", c.hidden);
    c.scale_hidden = j.value("scale_hidden", c.scale_hidden);
    return c;
}

namespace {

constexpr double kEpsSpread = 3.4641016151377544; // sqrt(12): unit-variance uniform

inline double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }
inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
constexpr double kOffDiagScale = 0.3;

int scale_output_dim(int dy) { return dy + dy * (dy - 1) / 2; }

// y_row += L(raw_row) * eps_row, with diag softplus(raw)+floor and scaled
// linear off-diagonals, row-major over a batch
void apply_scale(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& eps, double floor,
                 Eigen::MatrixXd& y) {
    const int dy = static_cast<int>(eps.cols());
    for (Eigen::Index b = 0; b < y.rows(); ++b) {
        int off = dy;
        for (int i = 0; i < dy; ++i) {
            double acc = (softplus(raw(b, i)) + floor) * eps(b, i);
            for (int j = 0; j < i; ++j) acc += kOffDiagScale * raw(b, off + j) * eps(b, j);
            off += i;
            y(b, i) += acc;
        }
    }
}

// reverse of apply_scale: given dLoss/dy, fill dLoss/draw
void scale_backward(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& eps,
                    const Eigen::MatrixXd& dy_grad, Eigen::MatrixXd& draw) {
    const int dy = static_cast<int>(eps.cols());
    draw.setZero();
    for (Eigen::Index b = 0; b < dy_grad.rows(); ++b) {
        int off = dy;
        for (int i = 0; i < dy; ++i) {
            draw(b, i) = dy_grad(b, i) * eps(b, i) * sigmoid(raw(b, i));
            for (int j = 0; j < i; ++j)
                draw(b, off + j) = kOffDiagScale * dy_grad(b, i) * eps(b, j);
            off += i;
        }
    }
}

} // namespace

CganModel::CganModel(Mlp core, Mlp scale_head, Mlp discriminator, int noise_dim, int cond_dim,
                     int result_dim, int pac, double scale_floor)
    : core_(std::move(core)), scale_(std::move(scale_head)), disc_(std::move(discriminator)),
      noise_dim_(noise_dim), cond_dim_(cond_dim), result_dim_(result_dim), pac_(pac),
      scale_floor_(scale_floor), trained_(true) {}

Eigen::MatrixXd CganModel::sample(const Eigen::VectorXd& xn, const Eigen::VectorXd& un, int n,
                                  std::uint64_t seed) const {
    if (!trained_) throw std::logic_error("CganModel::sample: member not trained");
    if (n < 1) throw std::invalid_argument("CganModel::sample: n must be >= 1");
    if (xn.size() + un.size() != cond_dim_)
        throw std::invalid_argument("CganModel::sample: condition width mismatch");
    Rng rng = make_rng(seed, {0x5a3fULL});
    const int dy = result_dim_;
    Eigen::MatrixXd core_in(n, noise_dim_ + cond_dim_);
    Eigen::MatrixXd eps(n, dy);
    // z = [z_core, z_eps], all components i.i.d. uniform on (0,1)
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < noise_dim_; ++d) core_in(i, d) = uniform01(rng);
        for (int d = 0; d < dy; ++d) eps(i, d) = (uniform01(rng) - 0.5) * kEpsSpread;
    }
    core_in.block(0, noise_dim_, n, xn.size()).rowwise() = xn.transpose();
    core_in.rightCols(un.size()).rowwise() = un.transpose();
    Eigen::MatrixXd cond(n, cond_dim_);
    cond.leftCols(xn.size()).rowwise() = xn.transpose();
    cond.rightCols(un.size()).rowwise() = un.transpose();

    Eigen::MatrixXd y = core_.forward(core_in);
    const Eigen::MatrixXd raw = scale_.forward(cond);
    apply_scale(raw, eps, scale_floor_, y);
    return y;
}

nlohmann::json CganModel::checkpoint() const {
    return {{"kind", "cgan"},
            {"noise_dim", noise_dim_},
            {"cond_dim", cond_dim_},
            {"result_dim", result_dim_},
            {"pac", pac_},
            {"scale_floor", scale_floor_},
            {"core", core_.checkpoint()},
            {"scale_head", scale_.checkpoint()},
            {"discriminator", disc_.checkpoint()}};
}

std::shared_ptr<CganModel> CganModel::restore(const nlohmann::json& j) {
    return std::make_shared<CganModel>(
        Mlp::restore(j.at("core")), Mlp::restore(j.at("scale_head")),
        Mlp::restore(j.at("discriminator")), j.at("noise_dim").get<int>(),
        j.at("cond_dim").get<int>(), j.at("result_dim").get<int>(), j.value("pac", 1),
        j.value("scale_floor", 1e-3));
}

namespace {

// shuffled minibatch cursor; reshuffles on wrap
class BatchCursor {
public:
    BatchCursor(Eigen::Index n, Rng& rng) : order_(static_cast<std::size_t>(n)), rng_(rng) {
        std::iota(order_.begin(), order_.end(), 0);
        std::shuffle(order_.begin(), order_.end(), rng_);
    }
    std::vector<Eigen::Index> next(int batch) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(batch));
        for (int i = 0; i < batch; ++i) {
            if (pos_ == order_.size()) {
                std::shuffle(order_.begin(), order_.end(), rng_);
                pos_ = 0;
            }
            idx[static_cast<std::size_t>(i)] = order_[pos_++];
        }
        return idx;
    }

private:
    std::vector<Eigen::Index> order_;
    std::size_t pos_ = 0;
    Rng& rng_;
};

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

} // namespace

CganModel train_cgan(const Eigen::MatrixXd& xu, const Eigen::MatrixXd& y, const CganConfig& cfg,
                     std::uint64_t seed, std::vector<EpochLoss>* log) {
    const auto n = xu.rows();
    const int din = static_cast<int>(xu.cols());
    const int dy = static_cast<int>(y.cols());
    if (y.rows() != n) throw std::invalid_argument("train_cgan: row mismatch");
    if (n < cfg.batch_size)
        throw ConfigError("train_cgan: dataset smaller than one batch (" + std::to_string(n) +
                          " < " + std::to_string(cfg.batch_size) + ")");
    if (cfg.pac < 1) throw ConfigError("train_cgan: pac must be at least 1");
    const int noise_dim = cfg.noise_dim > 0 ? cfg.noise_dim : dy + 2;
    const int pac = cfg.pac;
    const int batch = (cfg.batch_size / pac) * pac; // whole packs only
    const int packs = batch / pac;
    if (packs < 1) throw ConfigError("train_cgan: batch smaller than one pack");
    const int tuple = dy + din;

    MlpSpec core_spec{noise_dim + din, cfg.hidden, dy, Activation::relu, Activation::identity};
    MlpSpec scale_spec{din, cfg.scale_hidden, scale_output_dim(dy), Activation::relu,
                       Activation::identity};
    MlpSpec disc_spec{pac * tuple, cfg.hidden, 1, Activation::relu, Activation::identity};
    Mlp core(core_spec), scale(scale_spec), disc(disc_spec);
    Rng rng = make_rng(seed, {0xc6a2ULL});
    core.init_uniform_fanin(rng);
    scale.init_uniform_fanin(rng);
    disc.init_uniform_fanin(rng);
    // small generator init: members start near one consensus map and diverge
    // only where the data cannot pin them down
    core.params() *= cfg.gen_init_gain;
    scale.params() *= cfg.gen_init_gain;
    {
        // start the conditional scale near a typical in-band spread so the
        // members assign variance duties consistently from the first steps
        auto out_bias = scale.layer_bias(static_cast<int>(cfg.scale_hidden.size()));
        const double raw0 = std::log(std::expm1(std::max(cfg.scale_init_sd - cfg.scale_floor, 1e-4)));
        for (int d = 0; d < dy; ++d) out_bias[d] = raw0;
        for (int d = dy; d < scale_output_dim(dy); ++d) out_bias[d] = 0.0;
    }

    AdamConfig disc_opt{cfg.lr, cfg.beta1, cfg.beta2, 1e-8};
    AdamConfig gen_opt{cfg.gen_lr, cfg.beta1, cfg.beta2, 1e-8};
    AdamState core_state, scale_state, disc_state;
    BatchCursor cursor(n, rng);

    Eigen::VectorXd disc_grad(disc.params().size());
    Eigen::VectorXd core_grad(core.params().size()), scale_grad(scale.params().size());
    const int steps_per_epoch = std::max<int>(1, static_cast<int>(n / batch));

    struct FakeBatch {
        Eigen::MatrixXd values, eps, scale_raw;
        Mlp::Cache core_cache, scale_cache;
    };
    auto make_fake = [&](const Eigen::MatrixXd& cond) {
        FakeBatch f;
        const auto rows = cond.rows();
        Eigen::MatrixXd core_in(rows, noise_dim + din);
        f.eps.resize(rows, dy);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (int d = 0; d < noise_dim; ++d) core_in(i, d) = uniform01(rng);
            for (int d = 0; d < dy; ++d) f.eps(i, d) = (uniform01(rng) - 0.5) * kEpsSpread;
        }
        core_in.rightCols(din) = cond;
        f.values = core.forward_cached(core_in, f.core_cache);
        f.scale_raw = scale.forward_cached(cond, f.scale_cache);
        apply_scale(f.scale_raw, f.eps, cfg.scale_floor, f.values);
        return f;
    };
    auto pack_tuples = [&](const Eigen::MatrixXd& ys, const Eigen::MatrixXd& conds) {
        Eigen::MatrixXd out(packs, pac * tuple);
        for (int p = 0; p < packs; ++p)
            for (int j = 0; j < pac; ++j) {
                out.block(p, j * tuple, 1, dy) = ys.row(p * pac + j);
                out.block(p, j * tuple + dy, 1, din) = conds.row(p * pac + j);
            }
        return out;
    };

    auto critic_update = [&](int epoch) {
        const auto idx = cursor.next(batch);
        const Eigen::MatrixXd cond = rows_of(xu, idx);
        const Eigen::MatrixXd real = rows_of(y, idx);
        const FakeBatch fake = make_fake(cond);

        disc_grad.setZero();
        const double inv_p = 1.0 / static_cast<double>(packs);

        const Eigen::MatrixXd fake_pack = pack_tuples(fake.values, cond);
        const Eigen::MatrixXd real_pack = pack_tuples(real, cond);
        Mlp::Cache cache_fake;
        const Eigen::MatrixXd d_fake = disc.forward_cached(fake_pack, cache_fake);
        disc.backward(cache_fake, Eigen::MatrixXd::Constant(packs, 1, inv_p), disc_grad);
        Mlp::Cache cache_real;
        const Eigen::MatrixXd d_real = disc.forward_cached(real_pack, cache_real);
        disc.backward(cache_real, Eigen::MatrixXd::Constant(packs, 1, -inv_p), disc_grad);

        // interpolates along real-fake lines, one mixing scalar per pack
        Eigen::MatrixXd interp = real_pack;
        for (int p = 0; p < packs; ++p) {
            const double alpha = uniform01(rng);
            for (int j = 0; j < pac; ++j)
                interp.block(p, j * tuple, 1, dy) =
                    alpha * real_pack.block(p, j * tuple, 1, dy) +
                    (1.0 - alpha) * fake_pack.block(p, j * tuple, 1, dy);
        }

        // penalty on the result-part gradient only; its parameter gradient
        // needs the second-order pass through the input gradient
        const Eigen::MatrixXd gin = disc.input_gradient(interp);
        Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(packs, pac * tuple);
        for (int j = 0; j < pac; ++j)
            tangent.middleCols(j * tuple, dy) = gin.middleCols(j * tuple, dy);
        Eigen::VectorXd coeff(packs);
        double gp_acc = 0.0;
        for (int p = 0; p < packs; ++p) {
            const double norm = tangent.row(p).norm();
            gp_acc += (norm - 1.0) * (norm - 1.0);
            coeff[p] = cfg.gp_lambda * 2.0 * (norm - 1.0) / std::max(norm, 1e-12) * inv_p;
        }
        disc.directional_derivative_param_grad(interp, tangent, coeff, disc_grad);

        const double d_loss = d_fake.mean() - d_real.mean() + cfg.gp_lambda * gp_acc * inv_p;
        if (!std::isfinite(d_loss))
            throw TrainingError("train_cgan: non-finite discriminator loss at epoch " +
                                std::to_string(epoch));
        adam_step(disc.params(), disc_grad, disc_state, disc_opt);
        return d_loss;
    };

    if (cfg.epochs > 0)
        for (int w = 0; w < cfg.critic_warmup; ++w) critic_update(0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double d_loss_acc = 0.0, g_loss_acc = 0.0;
        int d_count = 0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            for (int c = 0; c < cfg.critic_steps; ++c) {
                d_loss_acc += critic_update(epoch);
                ++d_count;
            }

            // generator step: push the critic's packed scores up
            const auto idx = cursor.next(batch);
            const Eigen::MatrixXd cond = rows_of(xu, idx);
            FakeBatch fake = make_fake(cond);
            const Eigen::MatrixXd fake_pack = pack_tuples(fake.values, cond);
            Mlp::Cache cache_d;
            const Eigen::MatrixXd d_fake = disc.forward_cached(fake_pack, cache_d);

            Eigen::VectorXd scratch = Eigen::VectorXd::Zero(disc.params().size());
            const Eigen::MatrixXd d_in_grad = disc.backward(
                cache_d, Eigen::MatrixXd::Constant(packs, 1, -1.0 / static_cast<double>(packs)),
                scratch);
            Eigen::MatrixXd fake_grad(batch, dy);
            for (int p = 0; p < packs; ++p)
                for (int j = 0; j < pac; ++j)
                    fake_grad.row(p * pac + j) = d_in_grad.block(p, j * tuple, 1, dy);

            core_grad.setZero();
            core.backward(fake.core_cache, fake_grad, core_grad);
            Eigen::MatrixXd scale_out_grad(batch, scale_output_dim(dy));
            scale_backward(fake.scale_raw, fake.eps, fake_grad, scale_out_grad);
            scale_grad.setZero();
            scale.backward(fake.scale_cache, scale_out_grad, scale_grad);

            const double g_loss = -d_fake.mean();
            if (!std::isfinite(g_loss))
                throw TrainingError("train_cgan: non-finite generator loss at epoch " +
                                    std::to_string(epoch));
            g_loss_acc += g_loss;
            adam_step(core.params(), core_grad, core_state, gen_opt);
            adam_step(scale.params(), scale_grad, scale_state, gen_opt);
        }
        if (log)
            log->push_back({epoch, d_loss_acc / std::max(1, d_count),
                            g_loss_acc / static_cast<double>(steps_per_epoch)});
    }

    return CganModel(std::move(core), std::move(scale), std::move(disc), noise_dim, din, dy, pac,
                     cfg.scale_floor);
}

DynamicsEnsemble train_cgan_ensemble(const ProcessDataset& train, int m, const CganConfig& cfg,
                                     std::uint64_t seed) {
    if (m < 2) throw ConfigError("train_cgan_ensemble: M must be at least 2 for pairwise discrepancy");
    if (!train.normalization().fitted())
        throw DataError("train_cgan_ensemble: dataset normalization not fitted");
    const Eigen::MatrixXd xu = train.normalized_xu();
    const Eigen::MatrixXd y = train.normalized_y();

    std::vector<std::shared_ptr<const DynamicsMember>> members(static_cast<std::size_t>(m));
    parallel_for(m, [&](int i) {
        try {
            auto model = train_cgan(xu, y, cfg, mix_seed(seed, static_cast<std::uint64_t>(i)));
            members[static_cast<std::size_t>(i)] = std::make_shared<CganModel>(std::move(model));
        } catch (const TrainingError& e) {
            throw TrainingError("member " + std::to_string(i) + ": " + e.what());
        }
    });

    DynamicsEnsemble ens;
    ens.kind = "cgan";
    ens.schema = train.schema();
    ens.norm = train.normalization();
    ens.members = std::move(members);
    ens.train_config_json = cfg.to_json().dump();
    return ens;
}

} // namespace orpco
