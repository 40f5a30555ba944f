#include "orpco/discrete_policy.hpp"

#include "orpco/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

namespace orpco {

void BoConfig::validate() const {
    if (n_init < 2) throw ConfigError("BoConfig: n_init must be at least 2");
    if (n_iter < 0) throw ConfigError("BoConfig: n_iter must be non-negative");
    if (n_candidates < 1) throw ConfigError("BoConfig: n_candidates must be positive");
}

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// squared-exponential GP on standardized targets, lengthscale and noise by
// marginal-likelihood grid
class GpSurrogate {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double jitter) {
        x_ = x;
        y_mean_ = y.mean();
        double var = (y.array() - y_mean_).square().sum() / std::max<double>(1, y.size() - 1);
        y_sd_ = var > 1e-24 ? std::sqrt(var) : 1.0;
        ys_ = (y.array() - y_mean_) / y_sd_;

        const double base = std::sqrt(static_cast<double>(x.cols()));
        const double scales[] = {0.05, 0.1, 0.2, 0.35, 0.6, 1.0, 1.8, 3.0};
        const double noises[] = {1e-6, 1e-4, 1e-2};
        double best_lml = -std::numeric_limits<double>::infinity();
        for (double s : scales)
            for (double n : noises) {
                const double ell = s * base;
                const double lml = marginal_likelihood(ell, n, jitter);
                if (lml > best_lml) {
                    best_lml = lml;
                    ell_ = ell;
                    noise_ = n;
                }
            }
        factorize(ell_, noise_, jitter);
    }

    std::pair<double, double> predict(const Eigen::VectorXd& q) const {
        const Eigen::VectorXd k = kernel_vector(q);
        const double mu = k.dot(alpha_);
        const Eigen::VectorXd v = llt_.matrixL().solve(k);
        double var = 1.0 + noise_ - v.squaredNorm();
        if (var < 1e-12) var = 1e-12;
        return {mu * y_sd_ + y_mean_, var * y_sd_ * y_sd_};
    }

private:
    Eigen::MatrixXd x_;
    Eigen::VectorXd ys_, alpha_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double y_mean_ = 0.0, y_sd_ = 1.0, ell_ = 1.0, noise_ = 1e-6;

    Eigen::MatrixXd gram(double ell, double noise, double jitter) const {
        const auto n = x_.rows();
        Eigen::MatrixXd k(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            k(i, i) = 1.0 + noise + jitter;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double d2 = (x_.row(i) - x_.row(j)).squaredNorm();
                k(i, j) = k(j, i) = std::exp(-0.5 * d2 / (ell * ell));
            }
        }
        return k;
    }

    double marginal_likelihood(double ell, double noise, double jitter) const {
        Eigen::LLT<Eigen::MatrixXd> llt(gram(ell, noise, jitter));
        if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
        const Eigen::VectorXd alpha = llt.solve(ys_);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        return -0.5 * ys_.dot(alpha) - 0.5 * logdet -
               0.5 * static_cast<double>(x_.rows()) * std::log(2.0 * std::numbers::pi);
    }

    void factorize(double ell, double noise, double jitter) {
        llt_.compute(gram(ell, noise, jitter));
        if (llt_.info() != Eigen::Success)
            throw NumericalError("GpSurrogate: gram matrix not positive definite");
        alpha_ = llt_.solve(ys_);
    }

    Eigen::VectorXd kernel_vector(const Eigen::VectorXd& q) const {
        Eigen::VectorXd k(x_.rows());
        for (Eigen::Index i = 0; i < x_.rows(); ++i)
            k[i] = std::exp(-0.5 * (x_.row(i).transpose() - q).squaredNorm() / (ell_ * ell_));
        return k;
    }
};

} // namespace

BoTrace bayesopt_maximize(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const BoConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const auto d = lower.size();
    if (upper.size() != d) throw std::invalid_argument("bayesopt_maximize: box mismatch");
    Rng rng = make_rng(seed, {0xb0b0ULL});

    auto random_point = [&]() {
        Eigen::VectorXd u(d);
        for (Eigen::Index i = 0; i < d; ++i) u[i] = uniform(rng, lower[i], upper[i]);
        return u;
    };
    auto clip = [&](Eigen::VectorXd u) {
        for (Eigen::Index i = 0; i < d; ++i) u[i] = std::min(std::max(u[i], lower[i]), upper[i]);
        return u;
    };

    BoTrace trace;
    auto probe = [&](const Eigen::VectorXd& u) {
        const double v = objective(u);
        trace.probes.push_back({u, v});
        if (trace.best_index < 0 || v > trace.best_value) { // strict: ties keep the earliest
            trace.best_index = static_cast<int>(trace.probes.size()) - 1;
            trace.best_value = v;
        }
    };

    for (int i = 0; i < cfg.n_init; ++i) probe(random_point());

    for (int it = 0; it < cfg.n_iter; ++it) {
        const auto k = static_cast<Eigen::Index>(trace.probes.size());
        Eigen::MatrixXd xs(k, d);
        Eigen::VectorXd ys(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            xs.row(i) = trace.probes[static_cast<std::size_t>(i)].u;
            ys[i] = trace.probes[static_cast<std::size_t>(i)].value;
        }
        GpSurrogate gp;
        gp.fit(xs, ys, cfg.gp_jitter);

        const double best = trace.best_value;
        auto ei = [&](const Eigen::VectorXd& u) {
            auto [mu, var] = gp.predict(u);
            const double sd = std::sqrt(var);
            if (sd < 1e-12) return 0.0;
            const double z = (mu - best - cfg.ei_xi) / sd;
            return (mu - best - cfg.ei_xi) * norm_cdf(z) + sd * norm_pdf(z);
        };

        Eigen::VectorXd best_u = random_point();
        double best_ei = ei(best_u);
        for (int c = 1; c < cfg.n_candidates; ++c) {
            const Eigen::VectorXd u = random_point();
            const double v = ei(u);
            if (v > best_ei) {
                best_ei = v;
                best_u = u;
            }
        }
        double radius = 0.1;
        for (int r = 0; r < cfg.refine_steps; ++r) {
            Eigen::VectorXd u = best_u;
            for (Eigen::Index i = 0; i < d; ++i)
                u[i] += radius * (upper[i] - lower[i]) * normal(rng);
            u = clip(std::move(u));
            const double v = ei(u);
            if (v > best_ei) {
                best_ei = v;
                best_u = u;
            } else {
                radius *= 0.8;
            }
        }
        probe(best_u);
    }
    return trace;
}

std::string to_string(EvaluatorKind k) {
    switch (k) {
    case EvaluatorKind::rp: return "rp";
    case EvaluatorKind::f1: return "f1";
    case EvaluatorKind::f3: return "f3";
    case EvaluatorKind::f4: return "f4";
    }
    return "?";
}

EvaluatorKind evaluator_from_string(const std::string& s) {
    if (s == "rp") return EvaluatorKind::rp;
    if (s == "f1") return EvaluatorKind::f1;
    if (s == "f3") return EvaluatorKind::f3;
    if (s == "f4") return EvaluatorKind::f4;
    throw ConfigError("unknown evaluator: " + s);
}

double DiscretePolicy::evaluate(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& u_raw,
                                std::uint64_t seed) const {
    switch (evaluator) {
    case EvaluatorKind::rp:
        return penalized_reward(*ensemble, x_raw, u_raw, reward, calib, seed).penalized_reward;
    case EvaluatorKind::f1:
        return f1_unpenalized(*ensemble, x_raw, u_raw, reward, n_samples, seed);
    case EvaluatorKind::f3:
        return f3_morel(*ensemble, x_raw, u_raw, reward, f3_threshold, n_samples, seed);
    case EvaluatorKind::f4:
        return f4_mopo(*ensemble, x_raw, u_raw, reward, f4_lambda, n_samples, seed);
    }
    throw std::logic_error("unreachable");
}

Eigen::VectorXd DiscretePolicy::optimize(const Eigen::VectorXd& x_raw, std::uint64_t seed,
                                         BoTrace* trace_out) const {
    if (!ensemble) throw std::logic_error("DiscretePolicy: no ensemble bound");
    const auto& schema = ensemble->schema;
    const auto& norm = ensemble->norm;
    const int du = schema.dim_u();

    // the search space is the declared control box, expressed in normalized
    // coordinates (which may exceed [0,1] when the data hull is narrower)
    Eigen::VectorXd lo(du), hi(du), raw_lo(du), raw_hi(du);
    for (int i = 0; i < du; ++i) {
        raw_lo[i] = schema.u_var(i).lower;
        raw_hi[i] = schema.u_var(i).upper;
    }
    lo = norm.normalize_u(raw_lo);
    hi = norm.normalize_u(raw_hi);

    // one evaluation seed per query keeps the probed surface deterministic
    const std::uint64_t eval_seed = mix_seed(seed, 0xe7a1ULL);
    auto objective = [&](const Eigen::VectorXd& un) {
        return evaluate(x_raw, norm.denormalize_u(un), eval_seed);
    };
    BoTrace trace = bayesopt_maximize(objective, lo, hi, bo, seed);
    const Eigen::VectorXd u_star =
        norm.denormalize_u(trace.probes[static_cast<std::size_t>(trace.best_index)].u);
    if (trace_out) *trace_out = std::move(trace);
    return u_star;
}

double policy_value_true(const DiscretePolicy& policy, const SyntheticSpec& truth,
                         const RewardFunction& reward, int n_queries, int n_mc,
                         std::uint64_t seed) {
    double acc = 0.0;
    for (int q = 0; q < n_queries; ++q) {
        Rng rng = make_rng(seed, {0x9137ULL, static_cast<std::uint64_t>(q)});
        const Eigen::VectorXd x = truth.sample_x(rng);
        const Eigen::VectorXd u = policy.optimize(x, mix_seed(seed, static_cast<std::uint64_t>(q)));
        acc += truth.true_expected_reward(x, u, reward, n_mc,
                                          mix_seed(seed, 0xffe0ULL + static_cast<std::uint64_t>(q)));
    }
    return acc / static_cast<double>(n_queries);
}

double logging_policy_value(const SyntheticSpec& truth, const RewardFunction& reward,
                            int n_queries, int n_mc, std::uint64_t seed) {
    double acc = 0.0;
    for (int q = 0; q < n_queries; ++q) {
        Rng rng = make_rng(seed, {0x9137ULL, static_cast<std::uint64_t>(q)});
        const Eigen::VectorXd x = truth.sample_x(rng);
        const Eigen::VectorXd u = truth.sample_u_given_x(x, rng);
        acc += truth.true_expected_reward(x, u, reward, n_mc,
                                          mix_seed(seed, 0xffe0ULL + static_cast<std::uint64_t>(q)));
    }
    return acc / static_cast<double>(n_queries);
}

} // namespace orpco
