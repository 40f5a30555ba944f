#include "orpco/ib.hpp"

#include "orpco/errors.hpp"

#include <algorithm>
#include <cmath>

namespace orpco {

namespace {
double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }
} // namespace

Eigen::VectorXd IbState::as_vector() const {
    Eigen::VectorXd x(5);
    x << v, g, s, consumption, fatigue;
    return x;
}

IbState IbState::from_vector(const Eigen::VectorXd& x) {
    if (x.size() != 5) throw std::invalid_argument("IbState: expected 5 components");
    return {x[0], x[1], x[2], x[3], x[4]};
}

IbAction IbAction::clipped(const Eigen::Vector3d& raw) {
    return {clamp(raw[0], -1.0, 1.0), clamp(raw[1], -1.0, 1.0), clamp(raw[2], -1.0, 1.0)};
}

void IbEnv::update_costs(IbState& st, Rng& rng) const {
    // fatigue first: consumption depends on the updated value
    const double f_acc = cfg_.fatigue_gain * (std::max(0.0, st.v - cfg_.fatigue_onset) +
                                              std::max(0.0, st.g - cfg_.fatigue_onset));
    st.fatigue = clamp(cfg_.fatigue_decay * st.fatigue + f_acc + cfg_.sigma_f * normal(rng), 0.0,
                       cfg_.fatigue_cap);
    const double hazard = cfg_.hazard_gain * (std::max(0.0, cfg_.hazard_knee - st.v) +
                                              std::max(0.0, cfg_.hazard_knee - st.g));
    st.consumption = clamp(0.02 * st.g + 0.01 * std::fabs(st.v - 50.0) + 0.5 * st.fatigue + hazard +
                               cfg_.sigma_c * normal(rng),
                           0.0, cfg_.consumption_cap);
}

IbState IbEnv::reset(Rng& rng) const {
    IbState st;
    st.v = uniform(rng, 20.0, 80.0);
    st.g = uniform(rng, 20.0, 80.0);
    st.s = uniform(rng, 20.0, 80.0);
    st.fatigue = 0.0;
    update_costs(st, rng); // burn-in populates consumption and fatigue
    return st;
}

std::pair<IbState, double> IbEnv::step(const IbState& state, const IbAction& action,
                                       Rng& rng) const {
    IbState next = state;
    next.v = clamp(state.v + cfg_.delta_scale * clamp(action.dv, -1.0, 1.0), 0.0, 100.0);
    next.g = clamp(state.g + cfg_.delta_scale * clamp(action.dg, -1.0, 1.0), 0.0, 100.0);
    next.s = clamp(state.s + cfg_.delta_scale * clamp(action.ds, -1.0, 1.0), 0.0, 100.0);
    update_costs(next, rng);
    return {next, -next.consumption - 3.0 * next.fatigue};
}

double IbEnv::reward_of_y(const Eigen::VectorXd& y) {
    if (y.size() != 5) throw std::invalid_argument("IbEnv::reward_of_y: expected 5 components");
    return -y[3] - 3.0 * y[4];
}

RewardFunction IbEnv::reward_function() const {
    return {"ib_cost", [](const Eigen::VectorXd& y) { return reward_of_y(y); }};
}

Schema IbEnv::schema() const {
    std::vector<VariableSpace> vars;
    const char* steer[] = {"v", "g", "s"};
    for (const char* nm : steer)
        vars.push_back({std::string("x_") + nm, VarKind::conditional, 0.0, 100.0});
    vars.push_back({"x_c", VarKind::conditional, 0.0, cfg_.consumption_cap});
    vars.push_back({"x_f", VarKind::conditional, 0.0, cfg_.fatigue_cap});
    for (const char* nm : {"dv", "dg", "ds"})
        vars.push_back({std::string("u_") + nm, VarKind::control, -1.0, 1.0});
    for (const char* nm : steer)
        vars.push_back({std::string("y_") + nm, VarKind::result, 0.0, 100.0});
    vars.push_back({"y_c", VarKind::result, 0.0, cfg_.consumption_cap});
    vars.push_back({"y_f", VarKind::result, 0.0, cfg_.fatigue_cap});
    Schema sc(std::move(vars));
    sc.set_y_to_x({0, 1, 2, 3, 4});
    return sc;
}

Eigen::Vector3d RandomBehavior::sample_raw(const IbState&, Rng& rng) const {
    return {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
}

Eigen::Vector3d SafeBehavior::sample_raw(const IbState& state, Rng& rng) const {
    const double z_sd = 1.0 / std::sqrt(3.0);
    auto steer = [&](double value) {
        if (value < 40.0) return normal(rng, 0.5, z_sd);
        if (value > 60.0) return -normal(rng, 0.5, z_sd);
        return uniform(rng, -1.0, 1.0);
    };
    return {steer(state.v), steer(state.g), uniform(rng, -1.0, 1.0)};
}

BehaviorKind behavior_from_string(const std::string& s) {
    if (s == "random") return BehaviorKind::random;
    if (s == "safe") return BehaviorKind::safe;
    throw ConfigError("unknown behavior policy: " + s);
}

std::pair<ProcessDataset, std::vector<Trajectory>> rollout_dataset(const IbEnv& env,
                                                                   BehaviorKind policy, int n_traj,
                                                                   int horizon, std::uint64_t seed) {
    RandomBehavior random_pi;
    SafeBehavior safe_pi;
    std::vector<ProcessRecord> records;
    records.reserve(static_cast<std::size_t>(n_traj) * static_cast<std::size_t>(horizon));
    std::vector<Trajectory> trajectories;
    trajectories.reserve(static_cast<std::size_t>(n_traj));

    for (int tr = 0; tr < n_traj; ++tr) {
        Rng rng = make_rng(seed, {0x1bULL, static_cast<std::uint64_t>(tr)});
        IbState st = env.reset(rng);
        Trajectory traj;
        for (int t = 0; t < horizon; ++t) {
            const Eigen::Vector3d raw = policy == BehaviorKind::random
                                            ? random_pi.sample_raw(st, rng)
                                            : safe_pi.sample_raw(st, rng);
            const IbAction act = IbAction::clipped(raw);
            auto [next, reward] = env.step(st, act, rng);

            ProcessRecord rec;
            rec.x = st.as_vector();
            rec.u = act.as_vector();
            rec.y = next.as_vector();
            rec.t = t;
            records.push_back(rec);

            traj.steps.push_back({rec.x, rec.u, reward, rec.y});
            st = next;
        }
        trajectories.push_back(std::move(traj));
    }

    ProcessDataset ds(env.schema(), std::move(records));
    if (!ds.empty()) ds.fit_normalization();
    return {std::move(ds), std::move(trajectories)};
}

} // namespace orpco
