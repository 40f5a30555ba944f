#include "orpco/gpn.hpp"

#include "orpco/adam.hpp"
#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"
#include "orpco/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace orpco {

nlohmann::json GpnConfig::to_json() const {
    return {{"hidden", hidden},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"lr", lr},
            {"var_floor", var_floor}};
}

GpnConfig GpnConfig::from_json(const nlohmann::json& j) {
    GpnConfig c;
    c.hidden = j.value("hidden", c.hidden);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.var_floor = j.value("var_floor", c.var_floor);
    return c;
}

GpnModel::GpnModel(Mlp net, int target_dim, double var_floor)
    : net_(std::move(net)), target_dim_(target_dim), var_floor_(var_floor), trained_(true) {}

namespace {

inline double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> GpnModel::predict(const Eigen::MatrixXd& input) const {
    const Eigen::MatrixXd out = net_.forward(input);
    Eigen::MatrixXd mu = out.leftCols(target_dim_);
    Eigen::MatrixXd sd = out.rightCols(target_dim_).unaryExpr(
        [this](double r) { return std::sqrt(softplus(r) + var_floor_); });
    return {std::move(mu), std::move(sd)};
}

Eigen::MatrixXd GpnModel::sample_at(const Eigen::MatrixXd& input, std::uint64_t seed) const {
    if (!trained_) throw std::logic_error("GpnModel::sample: member not trained");
    auto [mu, sd] = predict(input);
    Rng rng = make_rng(seed, {0x69b1ULL});
    Eigen::MatrixXd draws(mu.rows(), mu.cols());
    for (Eigen::Index i = 0; i < mu.rows(); ++i)
        for (Eigen::Index j = 0; j < mu.cols(); ++j) draws(i, j) = mu(i, j) + sd(i, j) * normal(rng);
    return draws;
}

Eigen::MatrixXd GpnModel::sample(const Eigen::VectorXd& xn, const Eigen::VectorXd& un, int n,
                                 std::uint64_t seed) const {
    if (n < 1) throw std::invalid_argument("GpnModel::sample: n must be >= 1");
    Eigen::MatrixXd input(n, xn.size() + un.size());
    input.leftCols(xn.size()).rowwise() = xn.transpose();
    input.rightCols(un.size()).rowwise() = un.transpose();
    return sample_at(input, seed);
}

double GpnModel::mean_nll(const Eigen::MatrixXd& input, const Eigen::MatrixXd& target) const {
    auto [mu, sd] = predict(input);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < input.rows(); ++i)
        for (Eigen::Index j = 0; j < target.cols(); ++j) {
            const double var = sd(i, j) * sd(i, j);
            const double diff = target(i, j) - mu(i, j);
            acc += 0.5 * (log2pi + std::log(var) + diff * diff / var);
        }
    return acc / static_cast<double>(input.rows());
}

nlohmann::json GpnModel::checkpoint() const {
    return {{"kind", "gpn"},
            {"target_dim", target_dim_},
            {"var_floor", var_floor_},
            {"net", net_.checkpoint()}};
}

std::shared_ptr<GpnModel> GpnModel::restore(const nlohmann::json& j) {
    return std::make_shared<GpnModel>(Mlp::restore(j.at("net")), j.at("target_dim").get<int>(),
                                      j.at("var_floor").get<double>());
}

GpnModel train_gpn(const Eigen::MatrixXd& input, const Eigen::MatrixXd& target,
                   const GpnConfig& cfg, std::uint64_t seed, const Eigen::MatrixXd* val_input,
                   const Eigen::MatrixXd* val_target, std::vector<double>* val_nll) {
    const auto n = input.rows();
    const int din = static_cast<int>(input.cols());
    const int dy = static_cast<int>(target.cols());
    if (target.rows() != n) throw std::invalid_argument("train_gpn: row mismatch");
    const int batch = std::min<int>(cfg.batch_size, static_cast<int>(n));
    if (batch < 1) throw ConfigError("train_gpn: empty training set");

    MlpSpec spec{din, cfg.hidden, 2 * dy, Activation::relu, Activation::identity};
    Mlp net(spec);
    Rng rng = make_rng(seed, {0x69f0ULL});
    net.init_uniform_fanin(rng);

    AdamConfig opt{cfg.lr, 0.9, 0.999, 1e-8};
    AdamState state;
    Eigen::VectorXd grad(net.params().size());

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const int steps = std::max<int>(1, static_cast<int>(n / batch));
    const double log2pi = std::log(2.0 * std::numbers::pi);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int s = 0; s < steps; ++s) {
            Eigen::MatrixXd bi(batch, din), bt(batch, dy);
            for (int b = 0; b < batch; ++b) {
                const auto r = order[static_cast<std::size_t>((s * batch + b) % n)];
                bi.row(b) = input.row(r);
                bt.row(b) = target.row(r);
            }
            Mlp::Cache cache;
            const Eigen::MatrixXd out = net.forward_cached(bi, cache);
            Eigen::MatrixXd gout = Eigen::MatrixXd::Zero(batch, 2 * dy);
            double loss = 0.0;
            const double inv_b = 1.0 / static_cast<double>(batch);
            for (int b = 0; b < batch; ++b)
                for (int j = 0; j < dy; ++j) {
                    const double mu = out(b, j);
                    const double raw = out(b, dy + j);
                    const double var = softplus(raw) + cfg.var_floor;
                    const double diff = bt(b, j) - mu;
                    loss += 0.5 * (log2pi + std::log(var) + diff * diff / var) * inv_b;
                    gout(b, j) = -(diff / var) * inv_b;
                    const double dvar = 0.5 * (1.0 / var - diff * diff / (var * var)) * inv_b;
                    gout(b, dy + j) = dvar * sigmoid(raw);
                }
            if (!std::isfinite(loss))
                throw TrainingError("train_gpn: non-finite loss at epoch " + std::to_string(epoch));
            grad.setZero();
            net.backward(cache, gout, grad);
            adam_step(net.params(), grad, state, opt);
        }
        if (val_input && val_target && val_nll) {
            GpnModel probe(net, dy, cfg.var_floor);
            val_nll->push_back(probe.mean_nll(*val_input, *val_target));
        }
    }
    return GpnModel(std::move(net), dy, cfg.var_floor);
}

GpnGridResult gpn_grid_search(const Eigen::MatrixXd& train_in, const Eigen::MatrixXd& train_out,
                              const Eigen::MatrixXd& val_in, const Eigen::MatrixXd& val_out,
                              const GpnGrid& grid, const GpnConfig& base, std::uint64_t seed) {
    std::vector<GpnConfig> configs;
    for (int d : grid.depths)
        for (int w : grid.widths)
            for (int e : grid.epochs) {
                GpnConfig c = base;
                c.hidden.assign(static_cast<std::size_t>(d), w);
                c.epochs = e;
                configs.push_back(std::move(c));
            }
    std::vector<double> nll(configs.size());
    parallel_for(static_cast<int>(configs.size()), [&](int i) {
        auto model = train_gpn(train_in, train_out, configs[static_cast<std::size_t>(i)],
                               mix_seed(seed, static_cast<std::uint64_t>(i)));
        nll[static_cast<std::size_t>(i)] = model.mean_nll(val_in, val_out);
    });
    GpnGridResult res;
    std::size_t best = 0;
    for (std::size_t i = 1; i < configs.size(); ++i)
        if (nll[i] < nll[best]) best = i;
    res.best = configs[best];
    res.best_val_nll = nll[best];
    for (std::size_t i = 0; i < configs.size(); ++i) res.trials.emplace_back(configs[i], nll[i]);
    return res;
}

DynamicsEnsemble train_gpn_ensemble(const ProcessDataset& train, int m, const GpnConfig& cfg,
                                    std::uint64_t seed) {
    if (m < 2) throw ConfigError("train_gpn_ensemble: M must be at least 2 for pairwise discrepancy");
    if (!train.normalization().fitted())
        throw DataError("train_gpn_ensemble: dataset normalization not fitted");
    const Eigen::MatrixXd xu = train.normalized_xu();
    const Eigen::MatrixXd y = train.normalized_y();

    std::vector<std::shared_ptr<const DynamicsMember>> members(static_cast<std::size_t>(m));
    parallel_for(m, [&](int i) {
        try {
            auto model = train_gpn(xu, y, cfg, mix_seed(seed, static_cast<std::uint64_t>(i)));
            members[static_cast<std::size_t>(i)] = std::make_shared<GpnModel>(std::move(model));
        } catch (const TrainingError& e) {
            throw TrainingError("member " + std::to_string(i) + ": " + e.what());
        }
    });

    DynamicsEnsemble ens;
    ens.kind = "gpn";
    ens.schema = train.schema();
    ens.norm = train.normalization();
    ens.members = std::move(members);
    ens.train_config_json = cfg.to_json().dump();
    return ens;
}

} // namespace orpco
