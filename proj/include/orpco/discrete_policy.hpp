#ifndef ORPCO_DISCRETE_POLICY_HPP
#define ORPCO_DISCRETE_POLICY_HPP

#include "orpco/ensemble.hpp"
#include "orpco/reward.hpp"
#include "orpco/synthetic.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace orpco {

struct BoConfig {
    int n_init = 10;       // random initial probes
    int n_iter = 40;       // acquisition-driven probes
    int n_candidates = 1024;
    int refine_steps = 20; // local polish of the acquisition argmax
    double ei_xi = 0.01;
    double gp_jitter = 1e-8;

    void validate() const; // n_init >= 2, n_iter >= 0
};

struct BoProbe {
    Eigen::VectorXd u;
    double value = 0.0;
};

struct BoTrace {
    std::vector<BoProbe> probes;
    int best_index = -1;
    double best_value = 0.0;
};

/// Maximizes a black-box function over a box via a Gaussian-process surrogate
/// with expected improvement. Deterministic given seed; ties keep the
/// earliest probe.
BoTrace bayesopt_maximize(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const BoConfig& cfg, std::uint64_t seed);

enum class EvaluatorKind { rp, f1, f3, f4 };
std::string to_string(EvaluatorKind k);
EvaluatorKind evaluator_from_string(const std::string& s);

/// Per-query control optimizer u* = argmax_u f(u|x) over the declared
/// control space, under any of the reward evaluators.
struct DiscretePolicy {
    EvaluatorKind evaluator = EvaluatorKind::rp;
    const DynamicsEnsemble* ensemble = nullptr;
    RewardFunction reward;
    PenaltyCalibration calib;   // rp
    double f3_threshold = 0.0;  // f3
    double f4_lambda = 1.0;     // f4
    int n_samples = 1000;
    BoConfig bo;

    /// Runs one query; returns raw-unit u*. The trace (normalized-unit
    /// probes) is optionally exposed for diagnostics.
    Eigen::VectorXd optimize(const Eigen::VectorXd& x_raw, std::uint64_t seed,
                             BoTrace* trace = nullptr) const;

    double evaluate(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& u_raw,
                    std::uint64_t seed) const;
};

/// Average true expected reward of the policy's choices over queries drawn
/// from the ground-truth logging distribution.
double policy_value_true(const DiscretePolicy& policy, const SyntheticSpec& truth,
                         const RewardFunction& reward, int n_queries, int n_mc,
                         std::uint64_t seed);

/// Value of the logging policy itself under the ground truth.
double logging_policy_value(const SyntheticSpec& truth, const RewardFunction& reward,
                            int n_queries, int n_mc, std::uint64_t seed);

} // namespace orpco

#endif
