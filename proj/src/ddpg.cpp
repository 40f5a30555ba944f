#include "orpco/ddpg.hpp"

#include "orpco/adam.hpp"
#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"

#include <algorithm>
#include <cmath>

namespace orpco {

nlohmann::json DdpgConfig::to_json() const {
    return {{"episodes", episodes},
            {"horizon", horizon},
            {"model_samples", model_samples},
            {"gamma", gamma},
            {"tau", tau},
            {"batch_size", batch_size},
            {"buffer_capacity", buffer_capacity},
            {"ou_theta", ou_theta},
            {"ou_sigma", ou_sigma},
            {"actor_lr", actor_lr},
            {"critic_lr", critic_lr},
            {"hidden", hidden},
            {"updates_per_step", updates_per_step},
            {"warmup_transitions", warmup_transitions}};
}

DdpgConfig DdpgConfig::from_json(const nlohmann::json& j) {
    DdpgConfig c;
    c.episodes = j.value("episodes", c.episodes);
    c.horizon = j.value("horizon", c.horizon);
    c.model_samples = j.value("model_samples", c.model_samples);
    c.gamma = j.value("gamma", c.gamma);
    c.tau = j.value("tau", c.tau);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
    c.ou_theta = j.value("ou_theta", c.ou_theta);
    c.ou_sigma = j.value("ou_sigma", c.ou_sigma);
    c.actor_lr = j.value("actor_lr", c.actor_lr);
    c.critic_lr = j.value("critic_lr", c.critic_lr);
    c.hidden = j.value("hidden", c.hidden);
    c.updates_per_step = j.value("updates_per_step", c.updates_per_step);
    c.warmup_transitions = j.value("warmup_transitions", c.warmup_transitions);
    return c;
}

void ReplayBuffer::add(Transition t) {
    if (items_.size() == capacity_) items_.pop_front(); // FIFO eviction
    items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(int batch, Rng& rng) const {
    std::vector<const Transition*> out(static_cast<std::size_t>(batch));
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    for (int i = 0; i < batch; ++i) out[static_cast<std::size_t>(i)] = &items_[pick(rng)];
    return out;
}

Eigen::VectorXd OuNoise::step(Rng& rng) {
    for (Eigen::Index i = 0; i < state.size(); ++i)
        state[i] += theta * (0.0 - state[i]) + sigma * normal(rng);
    return state;
}

DdpgAgent::DdpgAgent(const Schema& schema, const Normalizer& norm, const DdpgConfig& cfg,
                     std::uint64_t seed)
    : norm_(norm) {
    const int dx = schema.dim_x();
    const int du = schema.dim_u();
    MlpSpec actor_spec{dx, cfg.hidden, du, Activation::relu, Activation::identity};
    MlpSpec critic_spec{dx + du, cfg.hidden, 1, Activation::relu, Activation::identity};
    actor_ = Mlp(actor_spec);
    critic_ = Mlp(critic_spec);
    Rng rng = make_rng(seed, {0xddb6ULL});
    actor_.init_uniform_fanin(rng);
    critic_.init_uniform_fanin(rng);
    actor_target_ = actor_;
    critic_target_ = critic_;

    Eigen::VectorXd raw_lo(du), raw_hi(du);
    for (int i = 0; i < du; ++i) {
        raw_lo[i] = schema.u_var(i).lower;
        raw_hi[i] = schema.u_var(i).upper;
    }
    u_lo_ = norm_.normalize_u(raw_lo);
    u_hi_ = norm_.normalize_u(raw_hi);

    actor_opt_ = {cfg.actor_lr, 0.9, 0.999, 1e-8};
    critic_opt_ = {cfg.critic_lr, 0.9, 0.999, 1e-8};
}

Eigen::MatrixXd DdpgAgent::squash(const Eigen::MatrixXd& raw) const {
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
        for (Eigen::Index j = 0; j < raw.cols(); ++j)
            out(i, j) = u_lo_[j] + 0.5 * (std::tanh(raw(i, j)) + 1.0) * (u_hi_[j] - u_lo_[j]);
    return out;
}

Eigen::VectorXd DdpgAgent::act(const Eigen::VectorXd& xn) const {
    return squash(actor_.forward(xn.transpose())).row(0).transpose();
}

Eigen::VectorXd DdpgAgent::act_raw(const Eigen::VectorXd& x_raw) const {
    return norm_.denormalize_u(act(norm_.normalize_x(x_raw)));
}

double DdpgAgent::q_value(const Eigen::VectorXd& xn, const Eigen::VectorXd& un) const {
    Eigen::MatrixXd in(1, xn.size() + un.size());
    in << xn.transpose(), un.transpose();
    return critic_.forward(in)(0, 0);
}

namespace {

void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& main, double tau) {
    target = (1.0 - tau) * target + tau * main;
}

} // namespace

double DdpgAgent::update(const std::vector<const Transition*>& batch, double gamma, double tau) {
    const int b = static_cast<int>(batch.size());
    const int dx = static_cast<int>(batch[0]->x.size());
    const int du = static_cast<int>(batch[0]->u.size());

    Eigen::MatrixXd x(b, dx), u(b, du), xn(b, dx);
    Eigen::VectorXd r(b);
    for (int i = 0; i < b; ++i) {
        x.row(i) = batch[static_cast<std::size_t>(i)]->x;
        u.row(i) = batch[static_cast<std::size_t>(i)]->u;
        xn.row(i) = batch[static_cast<std::size_t>(i)]->x_next;
        r[i] = batch[static_cast<std::size_t>(i)]->reward;
    }

    // critic regression target from the target networks
    const Eigen::MatrixXd un_next = squash(actor_target_.forward(xn));
    Eigen::MatrixXd next_in(b, dx + du);
    next_in << xn, un_next;
    const Eigen::VectorXd q_next = critic_target_.forward(next_in).col(0);
    const Eigen::VectorXd target = r + gamma * q_next;

    Eigen::MatrixXd critic_in(b, dx + du);
    critic_in << x, u;
    Mlp::Cache ccache;
    const Eigen::VectorXd q = critic_.forward_cached(critic_in, ccache).col(0);
    const Eigen::VectorXd err = q - target;
    const double loss = err.squaredNorm() / static_cast<double>(b);
    if (!std::isfinite(loss)) throw TrainingError("ddpg: non-finite critic loss");

    Eigen::VectorXd cgrad = Eigen::VectorXd::Zero(critic_.params().size());
    critic_.backward(ccache, (2.0 / static_cast<double>(b)) * err, cgrad);
    adam_step(critic_.params(), cgrad, critic_state_, critic_opt_);

    // actor ascent on Q(x, squash(actor(x)))
    Mlp::Cache acache;
    const Eigen::MatrixXd raw = actor_.forward_cached(x, acache);
    Eigen::MatrixXd policy_in(b, dx + du);
    const Eigen::MatrixXd u_pi = squash(raw);
    policy_in << x, u_pi;
    Mlp::Cache qcache;
    critic_.forward_cached(policy_in, qcache);
    Eigen::VectorXd scratch = Eigen::VectorXd::Zero(critic_.params().size());
    const Eigen::MatrixXd dq_din = critic_.backward(
        qcache, Eigen::MatrixXd::Constant(b, 1, -1.0 / static_cast<double>(b)), scratch);
    // chain through the squash: du/draw = 0.5*(1 - tanh^2) * (hi - lo)
    Eigen::MatrixXd draw(b, du);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < du; ++j) {
            const double t = std::tanh(raw(i, j));
            draw(i, j) = dq_din(i, dx + j) * 0.5 * (1.0 - t * t) * (u_hi_[j] - u_lo_[j]);
        }
    Eigen::VectorXd agrad = Eigen::VectorXd::Zero(actor_.params().size());
    actor_.backward(acache, draw, agrad);
    adam_step(actor_.params(), agrad, actor_state_, actor_opt_);

    soft_update(critic_target_.params(), critic_.params(), tau);
    soft_update(actor_target_.params(), actor_.params(), tau);
    return loss;
}

nlohmann::json DdpgAgent::checkpoint() const {
    return {{"actor", actor_.checkpoint()},
            {"critic", critic_.checkpoint()},
            {"actor_target", actor_target_.checkpoint()},
            {"critic_target", critic_target_.checkpoint()},
            {"normalization", norm_.to_json()},
            {"u_lo", vec_to_json(u_lo_)},
            {"u_hi", vec_to_json(u_hi_)}};
}

DdpgAgent DdpgAgent::restore(const nlohmann::json& j) {
    DdpgAgent a;
    a.actor_ = Mlp::restore(j.at("actor"));
    a.critic_ = Mlp::restore(j.at("critic"));
    a.actor_target_ = Mlp::restore(j.at("actor_target"));
    a.critic_target_ = Mlp::restore(j.at("critic_target"));
    a.norm_ = Normalizer::from_json(j.at("normalization"));
    a.u_lo_ = vec_from_json(j.at("u_lo"));
    a.u_hi_ = vec_from_json(j.at("u_hi"));
    return a;
}

namespace {

double evaluate_with_spec(const EvaluatorSpec& spec, const SampleSet& set, PenaltyBranch& branch) {
    branch = PenaltyBranch::penalized_positive;
    switch (spec.kind) {
    case EvaluatorKind::rp: {
        const double kappa = compute_kappa(set.moments);
        const double varkappa = compute_varkappa(set.moments);
        if (varkappa > spec.calib.epsilon) {
            branch = PenaltyBranch::cutoff;
            return spec.calib.c;
        }
        if (set.raw_reward > 0.0) return (1.0 - kappa) * set.raw_reward;
        branch = PenaltyBranch::penalized_negative;
        return (1.0 + kappa) * set.raw_reward;
    }
    case EvaluatorKind::f1:
        return set.raw_reward;
    case EvaluatorKind::f3:
        return compute_disc(set.moments) <= spec.f3_threshold ? set.raw_reward : 0.0;
    case EvaluatorKind::f4: {
        double max_norm = 0.0;
        for (const auto& mo : set.moments) max_norm = std::max(max_norm, mo.cov.norm());
        return set.raw_reward - spec.f4_lambda * max_norm;
    }
    }
    throw std::logic_error("unreachable");
}

} // namespace

DdpgAgent train_offline_ddpg(const DynamicsEnsemble& ens, const ProcessDataset& data,
                             const RewardFunction& reward, const EvaluatorSpec& evaluator,
                             const DdpgConfig& cfg, std::uint64_t seed,
                             std::vector<EpisodeStats>* log, ReplayBuffer* buffer_out) {
    const Schema& schema = ens.schema;
    if (!schema.has_y_to_x())
        throw ConfigError("train_offline_ddpg: schema declares no result-to-conditional mapping");
    if (evaluator.kind == EvaluatorKind::rp) evaluator.calib.validate();
    if (data.empty()) throw DataError("train_offline_ddpg: empty dataset");

    DdpgAgent agent(schema, ens.norm, cfg, seed);
    ReplayBuffer buffer(cfg.buffer_capacity);
    Rng rng = make_rng(seed, {0xdd96ULL});
    OuNoise noise{Eigen::VectorXd::Zero(schema.dim_u()), cfg.ou_theta, cfg.ou_sigma};
    const auto& mapping = schema.y_to_x();

    std::uint64_t eval_counter = 0;
    for (int episode = 0; episode < cfg.episodes; ++episode) {
        noise.reset(schema.dim_u());
        std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
        Eigen::VectorXd x_raw = data.records()[pick(rng)].x;

        EpisodeStats stats;
        stats.episode = episode;
        for (int t = 0; t < cfg.horizon; ++t) {
            const Eigen::VectorXd xn = ens.norm.normalize_x(x_raw);
            Eigen::VectorXd un = agent.act(xn) + noise.step(rng);
            for (Eigen::Index i = 0; i < un.size(); ++i)
                un[i] = std::min(std::max(un[i], agent.control_lower()[i]), agent.control_upper()[i]);
            const Eigen::VectorXd u_raw = ens.norm.denormalize_u(un);

            const std::uint64_t eval_seed = mix_seed(seed, 0xabcdULL + eval_counter++);
            const SampleSet set = draw_samples(ens, x_raw, u_raw, reward, cfg.model_samples, eval_seed);
            PenaltyBranch branch;
            const double r = evaluate_with_spec(evaluator, set, branch);
            stats.penalized_return += r;
            if (branch == PenaltyBranch::cutoff) ++stats.cutoff_steps;

            // successor picked uniformly from the pooled member samples, then
            // projected to the conditional components in raw units
            std::uniform_int_distribution<int> pick_m(0, ens.size() - 1);
            std::uniform_int_distribution<int> pick_j(0, cfg.model_samples - 1);
            const Eigen::VectorXd yn = set.member_samples[static_cast<std::size_t>(pick_m(rng))]
                                           .row(pick_j(rng))
                                           .transpose();
            const Eigen::VectorXd y_raw = ens.norm.denormalize_y(yn);
            Eigen::VectorXd x_next_raw(schema.dim_x());
            for (int i = 0; i < schema.dim_x(); ++i) x_next_raw[i] = y_raw[mapping[i]];

            Transition tr;
            tr.x = xn;
            tr.u = un;
            tr.x_next = ens.norm.normalize_x(x_next_raw);
            tr.reward = r;
            tr.branch = branch;
            tr.eval_seed = eval_seed;
            buffer.add(std::move(tr));

            if (buffer.size() >= static_cast<std::size_t>(
                                     std::max(cfg.batch_size, cfg.warmup_transitions))) {
                for (int k = 0; k < cfg.updates_per_step; ++k) {
                    try {
                        stats.critic_loss = agent.update(buffer.sample(cfg.batch_size, rng),
                                                         cfg.gamma, cfg.tau);
                    } catch (const TrainingError& e) {
                        throw TrainingError("episode " + std::to_string(episode) + ": " + e.what());
                    }
                }
            }
            x_raw = x_next_raw;
        }
        if (log) log->push_back(stats);
    }
    if (buffer_out) *buffer_out = std::move(buffer);
    return agent;
}

std::pair<double, double> evaluate_policy(const DdpgAgent& agent, const IbEnv& env, int n_episodes,
                                          int horizon, std::uint64_t seed) {
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(n_episodes));
    for (int e = 0; e < n_episodes; ++e) {
        Rng rng = make_rng(seed, {0xeeaaULL, static_cast<std::uint64_t>(e)});
        IbState st = env.reset(rng);
        double total = 0.0;
        for (int t = 0; t < horizon; ++t) {
            const Eigen::VectorXd u = agent.act_raw(st.as_vector());
            auto [next, r] = env.step(st, IbAction::clipped(u.head<3>()), rng);
            total += r;
            st = next;
        }
        returns.push_back(total);
    }
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(n_episodes);
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    const double sd = n_episodes > 1 ? std::sqrt(var / static_cast<double>(n_episodes - 1)) : 0.0;
    return {mean, sd};
}

std::pair<double, double> evaluate_behavior(const IbEnv& env, BehaviorKind behavior, int n_episodes,
                                            int horizon, std::uint64_t seed) {
    RandomBehavior random_pi;
    SafeBehavior safe_pi;
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(n_episodes));
    for (int e = 0; e < n_episodes; ++e) {
        Rng rng = make_rng(seed, {0xebebULL, static_cast<std::uint64_t>(e)});
        IbState st = env.reset(rng);
        double total = 0.0;
        for (int t = 0; t < horizon; ++t) {
            const Eigen::Vector3d raw = behavior == BehaviorKind::random
                                            ? random_pi.sample_raw(st, rng)
                                            : safe_pi.sample_raw(st, rng);
            auto [next, r] = env.step(st, IbAction::clipped(raw), rng);
            total += r;
            st = next;
        }
        returns.push_back(total);
    }
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(n_episodes);
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    const double sd = n_episodes > 1 ? std::sqrt(var / static_cast<double>(n_episodes - 1)) : 0.0;
    return {mean, sd};
}

} // namespace orpco
