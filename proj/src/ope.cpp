#include "orpco/ope.hpp"

#include "orpco/adam.hpp"
#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace orpco {

double DiagGaussian::density(const Eigen::VectorXd& u) const {
    double log_p = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double diff = u[i] - mean[i];
        log_p += -0.5 * (std::log(2.0 * std::numbers::pi * var[i]) + diff * diff / var[i]);
    }
    return std::exp(log_p);
}

LoggingPropensity::LoggingPropensity(GpnModel model, Normalizer norm, double floor)
    : model_(std::move(model)), norm_(std::move(norm)), floor_(floor) {}

double LoggingPropensity::density(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& u_raw) const {
    Eigen::MatrixXd in(1, x_raw.size());
    in.row(0) = norm_.normalize_x(x_raw);
    auto [mu, sd] = model_.predict(in);
    DiagGaussian g{mu.row(0).transpose(), sd.row(0).transpose().array().square().matrix()};
    return std::max(g.density(norm_.normalize_u(u_raw)), floor_);
}

LoggingPropensity fit_logging_propensity(const ProcessDataset& train, const GpnConfig& cfg,
                                         std::uint64_t seed) {
    if (train.empty()) throw DataError("fit_logging_propensity: empty training set");
    const Eigen::MatrixXd x = train.normalized_x();
    const Eigen::MatrixXd u = train.normalized_u();
    GpnModel model = train_gpn(x, u, cfg, seed);
    return LoggingPropensity(std::move(model), train.normalization());
}

DiagGaussian fit_target_propensity(const DiscretePolicy& policy, const Eigen::VectorXd& x_raw,
                                   int n_repeats, std::uint64_t seed, double var_floor) {
    if (n_repeats < 2) throw ConfigError("fit_target_propensity: need at least 2 repeats");
    const auto& norm = policy.ensemble->norm;
    Eigen::MatrixXd outs(n_repeats, policy.ensemble->schema.dim_u());
    for (int r = 0; r < n_repeats; ++r) {
        const Eigen::VectorXd u_star =
            policy.optimize(x_raw, mix_seed(seed, static_cast<std::uint64_t>(r)));
        outs.row(r) = norm.normalize_u(u_star);
    }
    DiagGaussian g;
    g.mean = outs.colwise().mean();
    const Eigen::MatrixXd centered = outs.rowwise() - g.mean.transpose();
    g.var = (centered.array().square().colwise().sum() / static_cast<double>(n_repeats - 1))
                .transpose();
    for (Eigen::Index i = 0; i < g.var.size(); ++i) g.var[i] = std::max(g.var[i], var_floor);
    return g;
}

RewardPredictor RewardPredictor::train(const ProcessDataset& data, const RewardFunction& reward,
                                       std::uint64_t seed, int epochs, int batch, double lr,
                                       const std::vector<int>& hidden) {
    if (data.empty()) throw DataError("RewardPredictor: empty training set");
    const Eigen::MatrixXd in = data.normalized_xu();
    Eigen::VectorXd target(data.size());
    for (std::size_t k = 0; k < data.size(); ++k)
        target[static_cast<Eigen::Index>(k)] = reward(data.records()[k].y);

    RewardPredictor rp;
    MlpSpec spec{static_cast<int>(in.cols()), hidden, 1, Activation::relu, Activation::identity};
    rp.net_ = Mlp(spec);
    Rng rng = make_rng(seed, {0x4e47ULL});
    rp.net_.init_uniform_fanin(rng);

    AdamConfig opt{lr, 0.9, 0.999, 1e-8};
    AdamState state;
    Eigen::VectorXd grad(rp.net_.params().size());
    const auto n = in.rows();
    const int b = std::min<int>(batch, static_cast<int>(n));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const int steps = std::max<int>(1, static_cast<int>(n / b));

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int s = 0; s < steps; ++s) {
            Eigen::MatrixXd bi(b, in.cols());
            Eigen::VectorXd bt(b);
            for (int i = 0; i < b; ++i) {
                const auto r = order[static_cast<std::size_t>((s * b + i) % n)];
                bi.row(i) = in.row(r);
                bt[i] = target[r];
            }
            Mlp::Cache cache;
            const Eigen::VectorXd out = rp.net_.forward_cached(bi, cache).col(0);
            const Eigen::VectorXd err = out - bt;
            grad.setZero();
            rp.net_.backward(cache, (2.0 / static_cast<double>(b)) * err, grad);
            adam_step(rp.net_.params(), grad, state, opt);
        }
    }
    rp.norm_ = data.normalization();
    rp.trained_ = true;
    return rp;
}

double RewardPredictor::predict(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& u_raw) const {
    if (!trained_) throw std::logic_error("RewardPredictor: not trained");
    Eigen::MatrixXd in(1, x_raw.size() + u_raw.size());
    in << norm_.normalize_x(x_raw).transpose(), norm_.normalize_u(u_raw).transpose();
    return net_.forward(in)(0, 0);
}

nlohmann::json RewardPredictor::checkpoint() const {
    return {{"net", net_.checkpoint()}, {"normalization", norm_.to_json()}};
}

RewardPredictor RewardPredictor::restore(const nlohmann::json& j) {
    RewardPredictor rp;
    rp.net_ = Mlp::restore(j.at("net"));
    rp.norm_ = Normalizer::from_json(j.at("normalization"));
    rp.trained_ = true;
    return rp;
}

namespace {

std::vector<double> weights_of(const OpeInputs& in) {
    std::vector<double> w(in.log_density.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = in.target_density[k] / in.log_density[k];
    return w;
}

} // namespace

double estimate_dm(const OpeInputs& in) {
    if (in.rhat_star.empty()) throw std::invalid_argument("estimate_dm: no records");
    return std::accumulate(in.rhat_star.begin(), in.rhat_star.end(), 0.0) /
           static_cast<double>(in.rhat_star.size());
}

double estimate_ips(const OpeInputs& in) {
    const auto w = weights_of(in);
    if (w.empty()) throw std::invalid_argument("estimate_ips: no records");
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * in.logged_reward[k];
    return acc / static_cast<double>(w.size());
}

double estimate_wis(const OpeInputs& in) {
    const auto w = weights_of(in);
    if (w.empty()) throw std::invalid_argument("estimate_wis: no records");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        num += w[k] * in.logged_reward[k];
        den += w[k];
    }
    if (den == 0.0) throw NumericalError("estimate_wis: all weights zero");
    return num / den;
}

double estimate_dr(const OpeInputs& in) {
    const auto w = weights_of(in);
    if (w.empty()) throw std::invalid_argument("estimate_dr: no records");
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += in.rhat_star[k] + w[k] * (in.logged_reward[k] - in.rhat_logged[k]);
    return acc / static_cast<double>(w.size());
}

OpeReport compute_ope(const OpeInputs& in, double weight_cap) {
    OpeReport rep;
    rep.weights = weights_of(in);
    rep.weight_cap = weight_cap;
    rep.dm = estimate_dm(in);
    rep.ips = estimate_ips(in);
    rep.wis = estimate_wis(in);
    rep.dr = estimate_dr(in);

    double sum_w = 0.0, sum_w2 = 0.0;
    for (double w : rep.weights) {
        sum_w += w;
        sum_w2 += w * w;
        rep.max_weight = std::max(rep.max_weight, w);
    }
    rep.n_eff = sum_w2 > 0.0 ? sum_w * sum_w / sum_w2 : 0.0;

    // capped copy for diagnostics; the headline estimates stay faithful
    OpeInputs capped = in;
    for (std::size_t k = 0; k < capped.log_density.size(); ++k) {
        const double w = std::min(rep.weights[k], weight_cap);
        capped.target_density[k] = w;
        capped.log_density[k] = 1.0;
    }
    rep.ips_capped = estimate_ips(capped);
    rep.wis_capped = estimate_wis(capped);
    rep.dr_capped = estimate_dr(capped);
    return rep;
}

nlohmann::json OpeReport::to_json() const {
    return {{"dm", dm},
            {"ips", ips},
            {"wis", wis},
            {"dr", dr},
            {"n_eff", n_eff},
            {"max_weight", max_weight},
            {"weight_cap", weight_cap},
            {"ips_capped", ips_capped},
            {"wis_capped", wis_capped},
            {"dr_capped", dr_capped},
            {"weights", weights}};
}

} // namespace orpco
