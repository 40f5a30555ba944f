#ifndef ORPCO_SYNTHETIC_HPP
#define ORPCO_SYNTHETIC_HPP

#include "orpco/dataset.hpp"
#include "orpco/reward_function.hpp"
#include "orpco/rng.hpp"
#include "orpco/schema.hpp"

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

namespace orpco {

/// Fully specified ground-truth process for desk-scale validation: a
/// Gaussian-mixture conditional p*(y|x,u) with full per-component covariance,
/// input-dependent mixture weights, an input-dependent noise scale, and a
/// logging policy. True expected rewards stay computable by brute force, and
/// exactly for quadratic rewards.
struct SyntheticSpec {
    struct Component {
        Eigen::MatrixXd mean_coef;  // dy x (dx+du)
        Eigen::VectorXd mean_base;  // dy
        Eigen::MatrixXd cov;        // dy x dy, SPD
        Eigen::VectorXd weight_coef; // dx+du
        double weight_bias = 0.0;
    };
    /// Piecewise-linear kink added to every component mean:
    /// gain * max(0, xu[input_index] - threshold) * direction.
    struct MeanHinge {
        int input_index = 0;
        double threshold = 0.0;
        double gain = 0.0;
        Eigen::VectorXd direction; // dy
    };
    /// Per-dimension volatility outside the normal operating band:
    /// s += gain * max(0, |xu[input_index] - center| - radius).
    struct NoiseBandHinge {
        int input_index = 0;
        double center = 0.5;
        double radius = 0.25;
        double gain = 0.0;
    };

    Schema schema;
    std::vector<Component> components;
    std::vector<MeanHinge> mean_hinges;
    std::vector<NoiseBandHinge> noise_band_hinges;

    // scalar noise multiplier s(x,u) = clamp(base + coef . [x;u] + hinges, min, max);
    // component covariance becomes s^2 * cov
    double noise_base = 1.0;
    Eigen::VectorXd noise_coef; // dx+du
    double noise_min = 0.05, noise_max = 4.0;

    // logging policy: x from a truncated normal inside the declared box,
    // u = u_coef x + u_base + u_sd . eps clipped into the logging sub-box;
    // with probability excursion_prob one input dimension is resampled
    // uniformly over its declared space (single-sensor excursion rows)
    Eigen::VectorXd x_center, x_sd;
    Eigen::MatrixXd u_coef; // du x dx
    Eigen::VectorXd u_base, u_sd;
    Eigen::VectorXd u_log_lower, u_log_upper;
    double excursion_prob = 0.0;

    // tolerance box on y defining the qualification reward
    Eigen::VectorXd box_lower, box_upper;

    void validate() const;

    Eigen::VectorXd sample_x(Rng& rng) const;
    Eigen::VectorXd sample_u_given_x(const Eigen::VectorXd& x, Rng& rng) const;
    Eigen::VectorXd sample_y(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Rng& rng) const;
    /// One logged input draw including possible excursion rows.
    std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_logged_input(Rng& rng) const;

    Eigen::VectorXd mixture_weights(const Eigen::VectorXd& xu) const;
    Eigen::VectorXd component_mean(int k, const Eigen::VectorXd& xu) const;
    double noise_scale(const Eigen::VectorXd& xu) const;

    RewardFunction box_reward() const;

    double true_expected_reward(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                const RewardFunction& reward, int n_samples,
                                std::uint64_t seed) const;
    double analytic_expected_quadratic(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       double c) const;

    nlohmann::json to_json() const;
    static SyntheticSpec from_json(const nlohmann::json& j);
    static SyntheticSpec load(const std::string& path);

    /// Production-shaped default: dims (3, 4, 7), three mixture components,
    /// planted 0.9 correlation between the first two results, heteroscedastic
    /// noise driven by x0, and a logging policy tied to x.
    static SyntheticSpec production_like(double y_corr = 0.9);

    /// production_like plus a reward trap: the logging policy never explores
    /// u0 above a cutoff, quality genuinely improves toward that edge, and
    /// beyond it the true means jump out of the tolerance box.
    static SyntheticSpec with_ood_trap();
};

ProcessDataset generate_synthetic_discrete(const SyntheticSpec& spec, int n, std::uint64_t seed);

} // namespace orpco

#endif
