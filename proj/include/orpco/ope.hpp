#ifndef ORPCO_OPE_HPP
#define ORPCO_OPE_HPP

#include "orpco/dataset.hpp"
#include "orpco/discrete_policy.hpp"
#include "orpco/gpn.hpp"
#include "orpco/mlp.hpp"

#include <cstdint>
#include <vector>

namespace orpco {

struct DiagGaussian {
    Eigen::VectorXd mean, var;
    double density(const Eigen::VectorXd& u) const;
};

/// Density model q(u|x) for the logging policy: a GPN over controls given
/// conditionals, evaluated in normalized units with a floored density.
class LoggingPropensity {
public:
    LoggingPropensity() = default;
    LoggingPropensity(GpnModel model, Normalizer norm, double floor = 1e-6);

    double density(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& u_raw) const;

private:
    GpnModel model_;
    Normalizer norm_;
    double floor_ = 1e-6;
};

LoggingPropensity fit_logging_propensity(const ProcessDataset& train, const GpnConfig& cfg,
                                         std::uint64_t seed);

/// Gaussian over the policy's controls at one x, fitted to n_repeats
/// seed-varied optimizer outputs (normalized units, diagonal covariance with
/// a variance floor).
DiagGaussian fit_target_propensity(const DiscretePolicy& policy, const Eigen::VectorXd& x_raw,
                                   int n_repeats, std::uint64_t seed, double var_floor = 1e-6);

/// MLP regressor of realized rewards on (x, u), backing the direct method.
class RewardPredictor {
public:
    RewardPredictor() = default;

    static RewardPredictor train(const ProcessDataset& data, const RewardFunction& reward,
                                 std::uint64_t seed, int epochs = 200, int batch = 128,
                                 double lr = 1e-3, const std::vector<int>& hidden = {64, 64});

    double predict(const Eigen::VectorXd& x_raw, const Eigen::VectorXd& u_raw) const;
    bool trained() const { return trained_; }

    nlohmann::json checkpoint() const;
    static RewardPredictor restore(const nlohmann::json& j);

private:
    Mlp net_;
    Normalizer norm_;
    bool trained_ = false;
};

/// Per-record ingredients of the four estimators. Kept as plain numbers so
/// the estimator algebra stays independent of how the models were fitted.
struct OpeInputs {
    std::vector<double> logged_reward;   // r(y_k)
    std::vector<double> log_density;     // p_log(u_k | x_k)
    std::vector<double> target_density;  // p_pi(u_k | x_k)
    std::vector<double> rhat_star;       // rhat(x_k, u*_k)
    std::vector<double> rhat_logged;     // rhat(x_k, u_k)
};

struct OpeReport {
    double dm = 0.0, ips = 0.0, wis = 0.0, dr = 0.0;
    std::vector<double> weights;
    double n_eff = 0.0;     // (sum w)^2 / sum w^2
    double max_weight = 0.0;
    // diagnostics-only copies with capped weights; headline values above are uncapped
    double ips_capped = 0.0, wis_capped = 0.0, dr_capped = 0.0;
    double weight_cap = 100.0;

    nlohmann::json to_json() const;
};

double estimate_dm(const OpeInputs& in);
double estimate_ips(const OpeInputs& in);
double estimate_wis(const OpeInputs& in);
double estimate_dr(const OpeInputs& in);
OpeReport compute_ope(const OpeInputs& in, double weight_cap = 100.0);

} // namespace orpco

#endif
