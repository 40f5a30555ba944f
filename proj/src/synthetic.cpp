#include "orpco/synthetic.hpp"

#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <fstream>

namespace orpco {

namespace {

Eigen::VectorXd concat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size() + b.size());
    out << a, b;
    return out;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

} // namespace

void SyntheticSpec::validate() const {
    if (components.empty()) throw ConfigError("synthetic spec: no mixture components");
    const int din = schema.dim_input();
    const int dy = schema.dim_y();
    for (const auto& c : components) {
        if (c.mean_coef.rows() != dy || c.mean_coef.cols() != din)
            throw ConfigError("synthetic spec: mean_coef shape mismatch");
        if (c.mean_base.size() != dy || c.cov.rows() != dy || c.cov.cols() != dy)
            throw ConfigError("synthetic spec: component shape mismatch");
        if (c.weight_coef.size() != din) throw ConfigError("synthetic spec: weight_coef mismatch");
        Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
        if (llt.info() != Eigen::Success)
            throw ConfigError("synthetic spec: component covariance not positive definite");
    }
    for (const auto& h : mean_hinges) {
        if (h.input_index < 0 || h.input_index >= din)
            throw ConfigError("synthetic spec: hinge index out of range");
        if (h.direction.size() != dy) throw ConfigError("synthetic spec: hinge direction mismatch");
    }
    for (const auto& h : noise_band_hinges)
        if (h.input_index < 0 || h.input_index >= din)
            throw ConfigError("synthetic spec: noise hinge index out of range");
    if (noise_coef.size() != din) throw ConfigError("synthetic spec: noise_coef mismatch");
    if (x_center.size() != schema.dim_x() || x_sd.size() != schema.dim_x())
        throw ConfigError("synthetic spec: logging x parameters mismatch");
    if (u_coef.rows() != schema.dim_u() || u_coef.cols() != schema.dim_x() ||
        u_base.size() != schema.dim_u() || u_sd.size() != schema.dim_u() ||
        u_log_lower.size() != schema.dim_u() || u_log_upper.size() != schema.dim_u())
        throw ConfigError("synthetic spec: logging policy parameters mismatch");
    if (box_lower.size() != dy || box_upper.size() != dy)
        throw ConfigError("synthetic spec: tolerance box mismatch");
}

Eigen::VectorXd SyntheticSpec::mixture_weights(const Eigen::VectorXd& xu) const {
    Eigen::VectorXd logits(components.size());
    for (std::size_t k = 0; k < components.size(); ++k)
        logits[static_cast<Eigen::Index>(k)] =
            components[k].weight_coef.dot(xu) + components[k].weight_bias;
    const double m = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - m).exp();
    return w / w.sum();
}

Eigen::VectorXd SyntheticSpec::component_mean(int k, const Eigen::VectorXd& xu) const {
    Eigen::VectorXd mu = components[static_cast<std::size_t>(k)].mean_base +
                         components[static_cast<std::size_t>(k)].mean_coef * xu;
    for (const auto& h : mean_hinges) {
        const double excess = xu[h.input_index] - h.threshold;
        if (excess > 0.0) mu += h.gain * excess * h.direction;
    }
    return mu;
}

double SyntheticSpec::noise_scale(const Eigen::VectorXd& xu) const {
    double v = noise_base + noise_coef.dot(xu);
    for (const auto& h : noise_band_hinges)
        v += h.gain * std::max(0.0, std::fabs(xu[h.input_index] - h.center) - h.radius);
    return clamp(v, noise_min, noise_max);
}

Eigen::VectorXd SyntheticSpec::sample_x(Rng& rng) const {
    Eigen::VectorXd x(schema.dim_x());
    for (int i = 0; i < schema.dim_x(); ++i) {
        const auto& var = schema.x_var(i);
        x[i] = clamp(normal(rng, x_center[i], x_sd[i]), var.lower, var.upper);
    }
    return x;
}

Eigen::VectorXd SyntheticSpec::sample_u_given_x(const Eigen::VectorXd& x, Rng& rng) const {
    Eigen::VectorXd mean = u_coef * x + u_base;
    Eigen::VectorXd u(schema.dim_u());
    for (int i = 0; i < schema.dim_u(); ++i)
        u[i] = clamp(mean[i] + normal(rng, 0.0, u_sd[i]), u_log_lower[i], u_log_upper[i]);
    return u;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> SyntheticSpec::sample_logged_input(Rng& rng) const {
    Eigen::VectorXd x = sample_x(rng);
    Eigen::VectorXd u = sample_u_given_x(x, rng);
    if (excursion_prob > 0.0 && uniform01(rng) < excursion_prob) {
        // one sensor or actuator leaves the operating band
        const int d = static_cast<int>(rng() % static_cast<std::uint64_t>(schema.dim_input()));
        if (d < schema.dim_x()) {
            const auto& var = schema.x_var(d);
            x[d] = uniform(rng, var.lower, var.upper);
        } else {
            const auto& var = schema.u_var(d - schema.dim_x());
            u[d - schema.dim_x()] = uniform(rng, var.lower, var.upper);
        }
    }
    return {std::move(x), std::move(u)};
}

Eigen::VectorXd SyntheticSpec::sample_y(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                        Rng& rng) const {
    const Eigen::VectorXd xu = concat(x, u);
    const Eigen::VectorXd w = mixture_weights(xu);
    double pick = uniform01(rng);
    int k = 0;
    for (; k + 1 < static_cast<int>(components.size()); ++k) {
        pick -= w[k];
        if (pick <= 0.0) break;
    }
    const auto& comp = components[static_cast<std::size_t>(k)];
    Eigen::LLT<Eigen::MatrixXd> llt(comp.cov);
    Eigen::VectorXd eps(schema.dim_y());
    for (int i = 0; i < schema.dim_y(); ++i) eps[i] = normal(rng);
    const Eigen::VectorXd noise = llt.matrixL() * eps;
    Eigen::VectorXd y = component_mean(k, xu) + noise_scale(xu) * noise;
    for (int i = 0; i < schema.dim_y(); ++i)
        y[i] = clamp(y[i], schema.y_var(i).lower, schema.y_var(i).upper);
    return y;
}

RewardFunction SyntheticSpec::box_reward() const { return box_indicator_reward(box_lower, box_upper); }

double SyntheticSpec::true_expected_reward(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                           const RewardFunction& reward, int n_samples,
                                           std::uint64_t seed) const {
    Rng rng = make_rng(seed, {0x7a31ULL});
    double acc = 0.0;
    for (int i = 0; i < n_samples; ++i) acc += reward(sample_y(x, u, rng));
    return acc / static_cast<double>(n_samples);
}

double SyntheticSpec::analytic_expected_quadratic(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                                  const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                  double c) const {
    const Eigen::VectorXd xu = concat(x, u);
    const Eigen::VectorXd w = mixture_weights(xu);
    const double s2 = noise_scale(xu) * noise_scale(xu);
    double acc = c;
    for (int k = 0; k < static_cast<int>(components.size()); ++k) {
        const Eigen::VectorXd mu = component_mean(k, xu);
        const Eigen::MatrixXd cov = s2 * components[static_cast<std::size_t>(k)].cov;
        acc += w[k] * ((a * cov).trace() + mu.dot(a * mu) + b.dot(mu));
    }
    return acc;
}

ProcessDataset generate_synthetic_discrete(const SyntheticSpec& spec, int n, std::uint64_t seed) {
    if (n < 0) throw ConfigError("generate_synthetic_discrete: n must be non-negative");
    spec.validate();
    Rng rng = make_rng(seed, {0x9e4eULL});
    std::vector<ProcessRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ProcessRecord r;
        std::tie(r.x, r.u) = spec.sample_logged_input(rng);
        r.y = spec.sample_y(r.x, r.u, rng);
        r.t = i;
        records.push_back(std::move(r));
    }
    ProcessDataset ds(spec.schema, std::move(records));
    if (!ds.empty()) ds.fit_normalization();
    return ds;
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::json SyntheticSpec::to_json() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components)
        comps.push_back({{"mean_coef", mat_to_json(c.mean_coef)},
                         {"mean_base", vec_to_json(c.mean_base)},
                         {"cov", mat_to_json(c.cov)},
                         {"weight_coef", vec_to_json(c.weight_coef)},
                         {"weight_bias", c.weight_bias}});
    nlohmann::json hinges = nlohmann::json::array();
    for (const auto& h : mean_hinges)
        hinges.push_back({{"input_index", h.input_index},
                          {"threshold", h.threshold},
                          {"gain", h.gain},
                          {"direction", vec_to_json(h.direction)}});
    nlohmann::json nhinges = nlohmann::json::array();
    for (const auto& h : noise_band_hinges)
        nhinges.push_back({{"input_index", h.input_index},
                           {"center", h.center},
                           {"radius", h.radius},
                           {"gain", h.gain}});
    return {{"schema", schema.to_json()},
            {"components", comps},
            {"mean_hinges", hinges},
            {"noise_band_hinges", nhinges},
            {"excursion_prob", excursion_prob},
            {"noise_base", noise_base},
            {"noise_coef", vec_to_json(noise_coef)},
            {"noise_min", noise_min},
            {"noise_max", noise_max},
            {"x_center", vec_to_json(x_center)},
            {"x_sd", vec_to_json(x_sd)},
            {"u_coef", mat_to_json(u_coef)},
            {"u_base", vec_to_json(u_base)},
            {"u_sd", vec_to_json(u_sd)},
            {"u_log_lower", vec_to_json(u_log_lower)},
            {"u_log_upper", vec_to_json(u_log_upper)},
            {"box_lower", vec_to_json(box_lower)},
            {"box_upper", vec_to_json(box_upper)}};
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
    SyntheticSpec s;
    s.schema = Schema::from_json(j.at("schema"));
    for (const auto& c : j.at("components")) {
        Component comp;
        comp.mean_coef = mat_from_json(c.at("mean_coef"));
        comp.mean_base = vec_from_json(c.at("mean_base"));
        comp.cov = mat_from_json(c.at("cov"));
        comp.weight_coef = vec_from_json(c.at("weight_coef"));
        comp.weight_bias = c.at("weight_bias").get<double>();
        s.components.push_back(std::move(comp));
    }
    for (const auto& h : j.at("mean_hinges")) {
        MeanHinge mh;
        mh.input_index = h.at("input_index").get<int>();
        mh.threshold = h.at("threshold").get<double>();
        mh.gain = h.at("gain").get<double>();
        mh.direction = vec_from_json(h.at("direction"));
        s.mean_hinges.push_back(std::move(mh));
    }
    if (j.contains("noise_band_hinges"))
        for (const auto& h : j.at("noise_band_hinges")) {
            NoiseBandHinge nh;
            nh.input_index = h.at("input_index").get<int>();
            nh.center = h.at("center").get<double>();
            nh.radius = h.at("radius").get<double>();
            nh.gain = h.at("gain").get<double>();
            s.noise_band_hinges.push_back(nh);
        }
    s.excursion_prob = j.value("excursion_prob", 0.0);
    s.noise_base = j.at("noise_base").get<double>();
    s.noise_coef = vec_from_json(j.at("noise_coef"));
    s.noise_min = j.at("noise_min").get<double>();
    s.noise_max = j.at("noise_max").get<double>();
    s.x_center = vec_from_json(j.at("x_center"));
    s.x_sd = vec_from_json(j.at("x_sd"));
    s.u_coef = mat_from_json(j.at("u_coef"));
    s.u_base = vec_from_json(j.at("u_base"));
    s.u_sd = vec_from_json(j.at("u_sd"));
    s.u_log_lower = vec_from_json(j.at("u_log_lower"));
    s.u_log_upper = vec_from_json(j.at("u_log_upper"));
    s.box_lower = vec_from_json(j.at("box_lower"));
    s.box_upper = vec_from_json(j.at("box_upper"));
    s.validate();
    return s;
}

SyntheticSpec SyntheticSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synthetic spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed synthetic spec JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

// ---------------------------------------------------------------------------
// factories

namespace {

Schema production_schema() {
    // sensor ranges are declared far wider than the narrow operating band the
    // logging policy visits, as on a real line
    std::vector<VariableSpace> vars;
    for (int i = 0; i < 3; ++i)
        vars.push_back({"x" + std::to_string(i), VarKind::conditional, -1.0, 2.0});
    for (int i = 0; i < 4; ++i)
        vars.push_back({"u" + std::to_string(i), VarKind::control, 0.0, 1.0});
    for (int i = 0; i < 7; ++i)
        vars.push_back({"y" + std::to_string(i), VarKind::result, -30.0, 32.0});
    return Schema(std::move(vars));
}

Eigen::MatrixXd correlated_cov(double y_corr, const Eigen::VectorXd& sd, double side_corr) {
    const auto d = sd.size();
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
    corr(0, 1) = corr(1, 0) = y_corr;
    if (d > 3) corr(2, 3) = corr(3, 2) = side_corr;
    if (d > 5) corr(4, 5) = corr(5, 4) = -side_corr;
    Eigen::MatrixXd cov = corr;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) cov(i, j) *= sd[i] * sd[j];
    return cov;
}

} // namespace

SyntheticSpec SyntheticSpec::production_like(double y_corr) {
    SyntheticSpec s;
    s.schema = production_schema();
    const int din = s.schema.dim_input();
    const int dy = s.schema.dim_y();

    // shared slow trend; the first two result dims share one row so the
    // planted correlation survives pooling over inputs
    Eigen::MatrixXd trend = Eigen::MatrixXd::Zero(dy, din);
    Rng coef_rng = make_rng(1976, {0xc0efULL});
    for (int r = 0; r < dy; ++r)
        for (int c = 0; c < din; ++c) trend(r, c) = uniform(coef_rng, -0.55, 0.55);
    trend.row(1) = trend.row(0);
    trend.row(0) *= 0.35; // keep the correlated pair noise-dominated
    trend.row(1) = trend.row(0);
    // control settings move the results decisively
    for (int r = 0; r < dy; ++r)
        for (int c = 3; c < din; ++c) trend(r, c) *= 1.6;

    const Eigen::VectorXd sd = (Eigen::VectorXd(7) << 0.35, 0.35, 0.30, 0.42, 0.28, 0.38, 0.25).finished();
    const double side_corrs[3] = {0.30, 0.30, 0.30};
    const double offsets[3] = {0.0, 0.22, -0.20};
    for (int k = 0; k < 3; ++k) {
        Component c;
        c.mean_coef = trend;
        c.mean_base = Eigen::VectorXd::Constant(dy, 1.0);
        for (int dIdx = 2; dIdx < dy; ++dIdx)
            c.mean_base[dIdx] += offsets[k] * ((dIdx % 2 == 0) ? 1.0 : -0.7);
        c.cov = correlated_cov(y_corr, sd, side_corrs[k]);
        c.weight_coef = Eigen::VectorXd::Zero(din);
        c.weight_coef[k % din] = 1.3;
        c.weight_coef[(k + 3) % din] = -0.9;
        c.weight_bias = 0.15 * k;
        s.components.push_back(std::move(c));
    }

    // heteroscedastic aleatoric noise inside the operating band, plus
    // per-dimension volatility growing outside it; the logging policy's rare
    // single-sensor excursion rows expose that volatility to the models
    s.noise_coef = Eigen::VectorXd::Zero(din);
    s.noise_coef[0] = 0.8;
    s.noise_coef[1] = -0.15;
    s.noise_coef[3] = 0.4; // u0
    s.noise_base = 0.7;
    s.noise_min = 0.4;
    s.noise_max = 3.5;
    for (int d = 0; d < 3; ++d)
        s.noise_band_hinges.push_back({d, 0.5, 0.35, 3.0});
    for (int d = 0; d < 4; ++d)
        s.noise_band_hinges.push_back({3 + d, 0.45, 0.35, 3.0});
    s.excursion_prob = 0.06;

    s.x_center = Eigen::VectorXd::Constant(3, 0.5);
    s.x_sd = Eigen::VectorXd::Constant(3, 0.13);
    s.u_coef = Eigen::MatrixXd::Zero(4, 3);
    for (int i = 0; i < 4; ++i) s.u_coef(i, i % 3) = 0.38;
    s.u_base = Eigen::VectorXd::Constant(4, 0.28);
    s.u_sd = Eigen::VectorXd::Constant(4, 0.07);
    s.u_log_lower = Eigen::VectorXd::Constant(4, 0.04);
    s.u_log_upper = Eigen::VectorXd::Constant(4, 0.92);

    // tolerance box around the central operating point
    const Eigen::VectorXd xu0 = Eigen::VectorXd::Constant(din, 0.47);
    Eigen::VectorXd center = Eigen::VectorXd::Zero(dy);
    const Eigen::VectorXd w0 = s.mixture_weights(xu0);
    for (int k = 0; k < 3; ++k) center += w0[k] * s.component_mean(k, xu0);
    const double s0 = s.noise_scale(xu0);
    s.box_lower = center - 2.4 * s0 * sd;
    s.box_upper = center + 2.4 * s0 * sd;

    s.validate();
    return s;
}

SyntheticSpec SyntheticSpec::with_ood_trap() {
    SyntheticSpec s = production_like(0.9);
    const int din = s.schema.dim_input();
    const int dy = s.schema.dim_y();
    const int u0 = s.schema.dim_x(); // index of u0 within [x;u]

    // quality genuinely improves with u0: noise shrinks toward the data edge
    s.noise_base = 1.15;
    s.noise_coef = Eigen::VectorXd::Zero(din);
    s.noise_coef[0] = 0.25;
    s.noise_coef[u0] = -1.05;
    s.noise_min = 0.30;
    s.noise_max = 2.0;

    // the logging policy never explores u0 beyond 0.66
    s.u_log_upper[0] = 0.66;
    s.u_base[0] = 0.22;
    s.u_coef(0, 0) = 0.55;
    s.u_sd[0] = 0.12;

    // beyond the data edge the true process falls off a cliff: means leave
    // the tolerance box quickly, which the trained models never observe
    MeanHinge cliff;
    cliff.input_index = u0;
    cliff.threshold = 0.70;
    cliff.gain = 30.0;
    cliff.direction = Eigen::VectorXd::Zero(dy);
    cliff.direction[0] = 1.0;
    cliff.direction[2] = -0.8;
    cliff.direction[4] = 0.9;
    cliff.direction[6] = -0.7;
    s.mean_hinges.push_back(std::move(cliff));

    s.validate();
    return s;
}

} // namespace orpco
