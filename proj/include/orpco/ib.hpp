#ifndef ORPCO_IB_HPP
#define ORPCO_IB_HPP

#include "orpco/dataset.hpp"
#include "orpco/reward_function.hpp"
#include "orpco/rng.hpp"
#include "orpco/schema.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace orpco {

/// Observable steering variables plus the two reward-relevant costs.
struct IbState {
    double v = 50.0; // velocity, [0, 100]
    double g = 50.0; // gain, [0, 100]
    double s = 50.0; // shift, [0, 100]
    double consumption = 0.0;
    double fatigue = 0.0;

    Eigen::VectorXd as_vector() const;
    static IbState from_vector(const Eigen::VectorXd& x);
};

/// Steering deltas in [-1, 1] per component.
struct IbAction {
    double dv = 0.0, dg = 0.0, ds = 0.0;
    static IbAction clipped(const Eigen::Vector3d& raw);
    Eigen::Vector3d as_vector() const { return {dv, dg, ds}; }
};

struct IbConfig {
    double delta_scale = 10.0; // steering units moved per unit action
    double sigma_c = 0.2;      // consumption noise
    double sigma_f = 0.05;     // fatigue noise
    double fatigue_decay = 0.9;
    double fatigue_onset = 60.0;  // v or g above this accrues fatigue
    double fatigue_gain = 0.01;
    double hazard_knee = 20.0;    // v or g below this incurs steep consumption
    double hazard_gain = 2.5;
    double consumption_cap = 100.0;
    double fatigue_cap = 12.0;
};

/// Transparent stand-in for an industrial continuous-control benchmark:
/// consumption grows with gain and with distance from the mid velocity,
/// fatigue accumulates slowly above the onset and is penalized three-fold,
/// and driving the steering below the hazard knee is severely costly.
/// Reward of a transition is always -consumption' - 3 * fatigue'.
class IbEnv {
public:
    explicit IbEnv(IbConfig cfg = {}) : cfg_(cfg) {}
    const IbConfig& config() const { return cfg_; }

    IbState reset(Rng& rng) const; // v,g,s ~ U(20,80); costs from one burn-in
    std::pair<IbState, double> step(const IbState& state, const IbAction& action, Rng& rng) const;

    static double reward_of_y(const Eigen::VectorXd& y); // -y[3] - 3*y[4]
    RewardFunction reward_function() const;

    /// x = [v,g,s,c,f], u = [dv,dg,ds], y = next [v,g,s,c,f]; y feeds x on
    /// rollout via the identity mapping.
    Schema schema() const;

private:
    IbConfig cfg_;
    void update_costs(IbState& st, Rng& rng) const;
};

/// u ~ U(-1,1)^3.
struct RandomBehavior {
    Eigen::Vector3d sample_raw(const IbState&, Rng& rng) const;
};

/// Keeps velocity and gain in the medium range: below 40 push up by
/// z ~ N(0.5, 1/sqrt(3)), above 60 push down by -z, otherwise U(-1,1);
/// shift always U(-1,1). Raw draws are unclipped; clipping happens only
/// when the action is applied.
struct SafeBehavior {
    Eigen::Vector3d sample_raw(const IbState& state, Rng& rng) const;
};

enum class BehaviorKind { random, safe };
BehaviorKind behavior_from_string(const std::string& s);

/// n_traj independent trajectories of length T under the chosen behavior
/// policy; returns the flattened dataset plus the trajectories themselves.
std::pair<ProcessDataset, std::vector<Trajectory>> rollout_dataset(const IbEnv& env,
                                                                   BehaviorKind policy, int n_traj,
                                                                   int horizon, std::uint64_t seed);

} // namespace orpco

#endif
