#ifndef ORPCO_REWARD_HPP
#define ORPCO_REWARD_HPP

#include "orpco/dataset.hpp"
#include "orpco/ensemble.hpp"
#include "orpco/gaussian.hpp"
#include "orpco/reward_function.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace orpco {

struct PenaltyCalibration {
    double epsilon = 0.0; // trust-region threshold on the spread signal
    double c = 0.0;       // reward assigned outside the trust region
    int m = 0;            // ensemble size used at calibration time
    int n_samples = 1000; // result samples per member per evaluation

    void validate() const; // epsilon > 0, n_samples >= 2
};

enum class PenaltyBranch { penalized_positive, penalized_negative, cutoff };

std::string to_string(PenaltyBranch b);

/// Everything one reward evaluation produces: the Monte-Carlo reward, the
/// disagreement and spread signals, the branch taken and the final value.
struct UncertaintyReport {
    double kappa = 0.0;    // mean pairwise squared Hellinger distance
    double varkappa = 0.0; // mean Frobenius norm of member covariances
    double disc = 0.0;     // max pairwise squared Hellinger distance
    double raw_reward = 0.0;
    double penalized_reward = 0.0;
    PenaltyBranch branch = PenaltyBranch::penalized_positive;
    std::vector<GaussianMoments> per_member_moments; // normalized result units

    nlohmann::json to_json() const;
};

double compute_kappa(std::span<const GaussianMoments> moments, double jitter = 1e-6);
double compute_varkappa(std::span<const GaussianMoments> moments);
double compute_disc(std::span<const GaussianMoments> moments, double jitter = 1e-6);

/// One sampling pass shared by every evaluator: N draws per member, reward
/// averaged over the pooled denormalized samples (the Monte-Carlo expected
/// reward), moments per member from the same draws.
struct SampleEvaluation {
    double raw_reward = 0.0;
    std::vector<GaussianMoments> moments;
};
SampleEvaluation evaluate_samples(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, const RewardFunction& reward,
                                  int n_samples, std::uint64_t seed);

/// As evaluate_samples but keeping the normalized draws of every member
/// (model-based rollouts pick successor states from the pooled set).
struct SampleSet {
    std::vector<Eigen::MatrixXd> member_samples;
    double raw_reward = 0.0;
    std::vector<GaussianMoments> moments;
};
SampleSet draw_samples(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u, const RewardFunction& reward, int n_samples,
                       std::uint64_t seed);

/// Monte-Carlo expected reward pooled over all members, Eq.-style
/// (1/(M N)) sum_i sum_j r(y_i^j).
double expected_reward(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u, const RewardFunction& reward, int n_samples,
                       std::uint64_t seed);

/// The epistemic-uncertainty-penalized evaluation:
///   (1-kappa)*r  when varkappa <= epsilon and r > 0,
///   (1+kappa)*r  when varkappa <= epsilon and r <= 0,
///   c            when varkappa > epsilon.
UncertaintyReport penalized_reward(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u, const RewardFunction& reward,
                                   const PenaltyCalibration& calib, std::uint64_t seed);

/// epsilon = max spread signal over the validation inputs.
double calibrate_epsilon(const DynamicsEnsemble& ens, const ProcessDataset& validation,
                         int n_samples, std::uint64_t seed);

/// Baseline3 threshold source: max pairwise discrepancy over validation inputs.
double max_disc_on(const DynamicsEnsemble& ens, const ProcessDataset& validation, int n_samples,
                   std::uint64_t seed);

// comparator evaluators
double f1_unpenalized(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u, const RewardFunction& reward, int n_samples,
                      std::uint64_t seed);
double f3_morel(const DynamicsEnsemble& ens, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                const RewardFunction& reward, double threshold, int n_samples, std::uint64_t seed);
double f4_mopo(const DynamicsEnsemble& ens, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               const RewardFunction& reward, double lambda_pen, int n_samples, std::uint64_t seed);

} // namespace orpco

#endif
