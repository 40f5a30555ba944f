#include "orpco/mlp.hpp"

#include "orpco/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace orpco {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::softplus: return "softplus";
    case Activation::identity: return "identity";
    }
    return "?";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "softplus") return Activation::softplus;
    if (s == "identity") return Activation::identity;
    throw ConfigError("unknown activation: " + s);
}

void MlpSpec::validate() const {
    if (input_dim <= 0 || output_dim <= 0) throw ConfigError("MlpSpec: dims must be positive");
    if (hidden_dims.empty()) throw ConfigError("MlpSpec: hidden_dims must be non-empty");
    for (int h : hidden_dims)
        if (h <= 0) throw ConfigError("MlpSpec: hidden dims must be positive");
}

std::vector<int> MlpSpec::layer_widths() const {
    std::vector<int> w{input_dim};
    w.insert(w.end(), hidden_dims.begin(), hidden_dims.end());
    w.push_back(output_dim);
    return w;
}

long MlpSpec::param_count() const {
    const auto w = layer_widths();
    long n = 0;
    for (std::size_t l = 1; l < w.size(); ++l) n += static_cast<long>(w[l - 1]) * w[l] + w[l];
    return n;
}

nlohmann::json MlpSpec::to_json() const {
    return {{"input_dim", input_dim},
            {"hidden_dims", hidden_dims},
            {"output_dim", output_dim},
            {"hidden_act", to_string(hidden_act)},
            {"output_act", to_string(output_act)}};
}

MlpSpec MlpSpec::from_json(const nlohmann::json& j) {
    MlpSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
    s.output_dim = j.at("output_dim").get<int>();
    s.hidden_act = activation_from_string(j.at("hidden_act").get<std::string>());
    s.output_act = activation_from_string(j.at("output_act").get<std::string>());
    s.validate();
    return s;
}

namespace {

void apply_activation(Activation act, const Eigen::MatrixXd& pre, Eigen::MatrixXd& post) {
    switch (act) {
    case Activation::relu: post = pre.cwiseMax(0.0); break;
    case Activation::tanh: post = pre.array().tanh().matrix(); break;
    case Activation::softplus:
        post = pre.unaryExpr([](double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); });
        break;
    case Activation::identity: post = pre; break;
    }
}

// first derivative, from (pre, post) pair
Eigen::ArrayXXd activation_prime(Activation act, const Eigen::MatrixXd& pre,
                                 const Eigen::MatrixXd& post) {
    switch (act) {
    case Activation::relu:
        return (pre.array() > 0.0).cast<double>();
    case Activation::tanh:
        return 1.0 - post.array().square();
    case Activation::softplus:
        return 1.0 / (1.0 + (-pre.array()).exp());
    case Activation::identity:
        return Eigen::ArrayXXd::Ones(pre.rows(), pre.cols());
    }
    return {};
}

// second derivative
Eigen::ArrayXXd activation_second(Activation act, const Eigen::MatrixXd& pre,
                                  const Eigen::MatrixXd& post) {
    switch (act) {
    case Activation::relu:
        return Eigen::ArrayXXd::Zero(pre.rows(), pre.cols());
    case Activation::tanh: {
        auto t = post.array();
        return -2.0 * t * (1.0 - t.square());
    }
    case Activation::softplus: {
        auto s = 1.0 / (1.0 + (-pre.array()).exp());
        return s * (1.0 - s);
    }
    case Activation::identity:
        return Eigen::ArrayXXd::Zero(pre.rows(), pre.cols());
    }
    return {};
}

} // namespace

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    index_layers();
    params_ = Eigen::VectorXd::Zero(spec_.param_count());
}

void Mlp::index_layers() {
    widths_ = spec_.layer_widths();
    w_offsets_.clear();
    b_offsets_.clear();
    long off = 0;
    for (std::size_t l = 1; l < widths_.size(); ++l) {
        w_offsets_.push_back(off);
        off += static_cast<long>(widths_[l - 1]) * widths_[l];
        b_offsets_.push_back(off);
        off += widths_[l];
    }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
    return {params_.data() + w_offsets_[layer], widths_[layer], widths_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
    return {params_.data() + b_offsets_[layer], widths_[layer + 1]};
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight_of(Eigen::VectorXd& v, int layer) const {
    return {v.data() + w_offsets_[layer], widths_[layer], widths_[layer + 1]};
}

Eigen::Map<Eigen::VectorXd> Mlp::layer_bias(int layer) {
    return bias_of(params_, layer);
}

Eigen::Map<Eigen::VectorXd> Mlp::bias_of(Eigen::VectorXd& v, int layer) const {
    return {v.data() + b_offsets_[layer], widths_[layer + 1]};
}

void Mlp::init_uniform_fanin(Rng& rng) {
    for (int l = 0; l < spec_.n_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        auto w = weight_of(params_, l);
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
        auto b = bias_of(params_, l);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
    }
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& input, Cache& cache) const {
    if (input.cols() != spec_.input_dim)
        throw std::invalid_argument("Mlp::forward: input width " + std::to_string(input.cols()) +
                                    " != input_dim " + std::to_string(spec_.input_dim));
    const int L = spec_.n_layers();
    cache.pre.resize(L);
    cache.post.resize(L + 1);
    cache.post[0] = input;
    for (int l = 0; l < L; ++l) {
        cache.pre[l] = cache.post[l] * weight(l);
        cache.pre[l].rowwise() += bias(l).transpose();
        const Activation act = (l + 1 == L) ? spec_.output_act : spec_.hidden_act;
        apply_activation(act, cache.pre[l], cache.post[l + 1]);
    }
    return cache.post[L];
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
    Cache cache;
    return forward_cached(input, cache);
}

Eigen::MatrixXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                              Eigen::VectorXd& grad) const {
    const int L = spec_.n_layers();
    if (grad.size() != params_.size()) throw std::invalid_argument("Mlp::backward: grad size mismatch");
    Eigen::MatrixXd g = grad_output;
    for (int l = L - 1; l >= 0; --l) {
        const Activation act = (l + 1 == L) ? spec_.output_act : spec_.hidden_act;
        if (act != Activation::identity)
            g = (g.array() * activation_prime(act, cache.pre[l], cache.post[l + 1])).matrix();
        weight_of(grad, l) += cache.post[l].transpose() * g;
        bias_of(grad, l) += g.colwise().sum().transpose();
        g = g * weight(l).transpose();
    }
    return g;
}

Eigen::MatrixXd Mlp::input_gradient(const Eigen::MatrixXd& input) const {
    if (spec_.output_dim != 1)
        throw std::invalid_argument("Mlp::input_gradient requires a scalar output");
    Cache cache;
    forward_cached(input, cache);
    const int L = spec_.n_layers();
    Eigen::MatrixXd g = Eigen::MatrixXd::Ones(input.rows(), 1);
    for (int l = L - 1; l >= 0; --l) {
        const Activation act = (l + 1 == L) ? spec_.output_act : spec_.hidden_act;
        if (act != Activation::identity)
            g = (g.array() * activation_prime(act, cache.pre[l], cache.post[l + 1])).matrix();
        g = g * weight(l).transpose();
    }
    return g;
}

Eigen::VectorXd Mlp::directional_derivative_param_grad(const Eigen::MatrixXd& input,
                                                       const Eigen::MatrixXd& tangent,
                                                       const Eigen::VectorXd& coeff,
                                                       Eigen::VectorXd& grad) const {
    if (spec_.output_dim != 1)
        throw std::invalid_argument("directional derivative requires a scalar output");
    if (tangent.rows() != input.rows() || tangent.cols() != input.cols())
        throw std::invalid_argument("tangent shape must match input");
    const int L = spec_.n_layers();

    // primal + forward tangent (JVP with zero parameter tangents)
    Cache cache;
    forward_cached(input, cache);
    std::vector<Eigen::MatrixXd> tpre(L), tpost(L + 1);
    std::vector<Eigen::ArrayXXd> prime(L);
    tpost[0] = tangent;
    for (int l = 0; l < L; ++l) {
        const Activation act = (l + 1 == L) ? spec_.output_act : spec_.hidden_act;
        tpre[l] = tpost[l] * weight(l);
        prime[l] = activation_prime(act, cache.pre[l], cache.post[l + 1]);
        tpost[l + 1] = (tpre[l].array() * prime[l]).matrix();
    }
    Eigen::VectorXd phi = tpost[L].col(0);

    // reverse pass over both primal and tangent variables; adjoint seeds:
    // d(sum coeff_b * phi_b)/d(tpost[L]) = coeff, d/d(post[L]) = 0.
    Eigen::MatrixXd a_dot = coeff; // adjoint of tpost[l+1]
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(input.rows(), 1); // adjoint of post[l+1]
    for (int l = L - 1; l >= 0; --l) {
        const Activation act = (l + 1 == L) ? spec_.output_act : spec_.hidden_act;
        // tpost = prime .* tpre  and  post = act(pre)
        Eigen::MatrixXd g_tpre = (a_dot.array() * prime[l]).matrix();
        Eigen::MatrixXd g_pre =
            (a_dot.array() * activation_second(act, cache.pre[l], cache.post[l + 1]) *
             tpre[l].array() + a.array() * prime[l]).matrix();
        weight_of(grad, l) += tpost[l].transpose() * g_tpre + cache.post[l].transpose() * g_pre;
        bias_of(grad, l) += g_pre.colwise().sum().transpose();
        if (l > 0) {
            a_dot = g_tpre * weight(l).transpose();
            a = g_pre * weight(l).transpose();
        }
    }
    return phi;
}

nlohmann::json Mlp::checkpoint() const {
    return {{"spec", spec_.to_json()},
            {"params", std::vector<double>(params_.data(), params_.data() + params_.size())}};
}

Mlp Mlp::restore(const nlohmann::json& j) {
    Mlp m(MlpSpec::from_json(j.at("spec")));
    auto p = j.at("params").get<std::vector<double>>();
    if (static_cast<long>(p.size()) != m.spec_.param_count())
        throw DataError("checkpoint parameter count does not match spec");
    m.params_ = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    return m;
}

} // namespace orpco
