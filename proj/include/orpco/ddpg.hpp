#ifndef ORPCO_DDPG_HPP
#define ORPCO_DDPG_HPP

#include "orpco/adam.hpp"
#include "orpco/dataset.hpp"
#include "orpco/discrete_policy.hpp"
#include "orpco/ensemble.hpp"
#include "orpco/ib.hpp"
#include "orpco/mlp.hpp"
#include "orpco/reward.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace orpco {

struct DdpgConfig {
    int episodes = 1500;
    int horizon = 100;     // T
    int model_samples = 1000; // N result samples per member per step
    double gamma = 0.99;
    double tau = 0.005;
    int batch_size = 128;
    std::size_t buffer_capacity = 100000;
    double ou_theta = 0.15;
    double ou_sigma = 0.2; // normalized control units
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    std::vector<int> hidden = {64, 64};
    int updates_per_step = 1;
    int warmup_transitions = 256; // no updates until the buffer holds this many

    nlohmann::json to_json() const;
    static DdpgConfig from_json(const nlohmann::json& j);
};

/// One dream-rollout transition, normalized units, with enough provenance to
/// recompute its reward.
struct Transition {
    Eigen::VectorXd x, u, x_next;
    double reward = 0.0;
    PenaltyBranch branch = PenaltyBranch::penalized_positive;
    std::uint64_t eval_seed = 0;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
    void add(Transition t);
    std::size_t size() const { return items_.size(); }
    const Transition& at(std::size_t i) const { return items_[i]; }
    std::vector<const Transition*> sample(int batch, Rng& rng) const;

private:
    std::deque<Transition> items_;
    std::size_t capacity_;
};

struct OuNoise {
    Eigen::VectorXd state;
    double theta = 0.15, sigma = 0.2;
    void reset(int dim) { state = Eigen::VectorXd::Zero(dim); }
    Eigen::VectorXd step(Rng& rng);
};

/// Deterministic-policy-gradient agent with target copies. Operates in
/// normalized state/control space; the tanh squash keeps actions inside the
/// declared control box.
class DdpgAgent {
public:
    DdpgAgent() = default;
    DdpgAgent(const Schema& schema, const Normalizer& norm, const DdpgConfig& cfg,
              std::uint64_t seed);

    Eigen::VectorXd act(const Eigen::VectorXd& xn) const; // normalized control
    Eigen::VectorXd act_raw(const Eigen::VectorXd& x_raw) const;
    double q_value(const Eigen::VectorXd& xn, const Eigen::VectorXd& un) const;

    /// One gradient update of critic and actor from a replay batch plus soft
    /// target updates. Returns the critic loss.
    double update(const std::vector<const Transition*>& batch, double gamma, double tau);

    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& actor_target() const { return actor_target_; }
    const Mlp& critic_target() const { return critic_target_; }
    const Normalizer& normalization() const { return norm_; }
    const Eigen::VectorXd& control_lower() const { return u_lo_; }
    const Eigen::VectorXd& control_upper() const { return u_hi_; }

    nlohmann::json checkpoint() const;
    static DdpgAgent restore(const nlohmann::json& j);

private:
    Mlp actor_, critic_, actor_target_, critic_target_;
    Normalizer norm_;
    Eigen::VectorXd u_lo_, u_hi_; // normalized declared control box
    AdamConfig actor_opt_, critic_opt_;
    AdamState actor_state_, critic_state_;

    Eigen::MatrixXd squash(const Eigen::MatrixXd& raw) const;
    friend struct DdpgTestAccess;
};

/// Reward evaluator selection shared by discrete search and DDPG training.
struct EvaluatorSpec {
    EvaluatorKind kind = EvaluatorKind::rp;
    PenaltyCalibration calib;
    double f3_threshold = 0.0;
    double f4_lambda = 1.0;
};

struct EpisodeStats {
    int episode = 0;
    double penalized_return = 0.0;
    int cutoff_steps = 0;
    double critic_loss = 0.0;
};

/// Offline model-based DDPG: rolls episodes inside the ensemble (successor
/// states drawn from the pooled member samples), rewards every step with the
/// selected evaluator, and updates the agent once per step.
DdpgAgent train_offline_ddpg(const DynamicsEnsemble& ens, const ProcessDataset& data,
                             const RewardFunction& reward, const EvaluatorSpec& evaluator,
                             const DdpgConfig& cfg, std::uint64_t seed,
                             std::vector<EpisodeStats>* log = nullptr,
                             ReplayBuffer* buffer_out = nullptr);

/// Undiscounted return of the deterministic actor on the real environment:
/// mean and sample std over n_episodes of length horizon.
std::pair<double, double> evaluate_policy(const DdpgAgent& agent, const IbEnv& env, int n_episodes,
                                          int horizon, std::uint64_t seed);

/// Same protocol for a behavior policy (baseline rows of the report).
std::pair<double, double> evaluate_behavior(const IbEnv& env, BehaviorKind behavior, int n_episodes,
                                            int horizon, std::uint64_t seed);

} // namespace orpco

#endif
