#include "orpco/reward.hpp"

#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"

#include <cmath>
#include <stdexcept>

namespace orpco {

void PenaltyCalibration::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("penalty calibration: epsilon must be positive");
    if (n_samples < 2) throw ConfigError("penalty calibration: need at least 2 samples per member");
}

std::string to_string(PenaltyBranch b) {
    switch (b) {
    case PenaltyBranch::penalized_positive: return "penalized_positive";
    case PenaltyBranch::penalized_negative: return "penalized_negative";
    case PenaltyBranch::cutoff: return "cutoff";
    }
    return "?";
}

nlohmann::json UncertaintyReport::to_json() const {
    nlohmann::json moments = nlohmann::json::array();
    for (const auto& m : per_member_moments)
        moments.push_back({{"mean", vec_to_json(m.mean)}, {"cov", mat_to_json(m.cov)}});
    return {{"kappa", kappa},
            {"varkappa", varkappa},
            {"disc", disc},
            {"raw_reward", raw_reward},
            {"penalized_reward", penalized_reward},
            {"branch", to_string(branch)},
            {"per_member_moments", std::move(moments)}};
}

double compute_kappa(std::span<const GaussianMoments> moments, double jitter) {
    const int m = static_cast<int>(moments.size());
    if (m < 2) throw std::invalid_argument("compute_kappa: need at least 2 members");
    double acc = 0.0;
    int pairs = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            acc += squared_hellinger(moments[static_cast<std::size_t>(i)],
                                     moments[static_cast<std::size_t>(j)], jitter);
            ++pairs;
        }
    return acc / static_cast<double>(pairs);
}

double compute_varkappa(std::span<const GaussianMoments> moments) {
    if (moments.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& mo : moments) acc += mo.cov.norm(); // Frobenius
    return acc / static_cast<double>(moments.size());
}

double compute_disc(std::span<const GaussianMoments> moments, double jitter) {
    const int m = static_cast<int>(moments.size());
    if (m < 2) throw std::invalid_argument("compute_disc: need at least 2 members");
    double best = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            best = std::max(best, squared_hellinger(moments[static_cast<std::size_t>(i)],
                                                    moments[static_cast<std::size_t>(j)], jitter));
    return best;
}

SampleSet draw_samples(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u, const RewardFunction& reward, int n_samples,
                       std::uint64_t seed) {
    if (ens.size() < 1) throw std::invalid_argument("draw_samples: empty ensemble");
    if (n_samples < 2) throw std::invalid_argument("draw_samples: need at least 2 samples");
    SampleSet set;
    set.member_samples.reserve(static_cast<std::size_t>(ens.size()));
    set.moments.reserve(static_cast<std::size_t>(ens.size()));
    double acc = 0.0;
    for (int i = 0; i < ens.size(); ++i) {
        // independent per-member streams derived from one master seed
        Eigen::MatrixXd yn =
            ens.sample_normalized(i, x, u, n_samples, mix_seed(seed, static_cast<std::uint64_t>(i)));
        for (Eigen::Index r = 0; r < yn.rows(); ++r)
            acc += reward(ens.norm.denormalize_y(yn.row(r).transpose()));
        set.moments.push_back(empirical_moments(yn));
        set.member_samples.push_back(std::move(yn));
    }
    set.raw_reward = acc / static_cast<double>(ens.size() * n_samples);
    return set;
}

SampleEvaluation evaluate_samples(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, const RewardFunction& reward,
                                  int n_samples, std::uint64_t seed) {
    auto set = draw_samples(ens, x, u, reward, n_samples, seed);
    return {set.raw_reward, std::move(set.moments)};
}

double expected_reward(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u, const RewardFunction& reward, int n_samples,
                       std::uint64_t seed) {
    return evaluate_samples(ens, x, u, reward, n_samples, seed).raw_reward;
}

UncertaintyReport penalized_reward(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u, const RewardFunction& reward,
                                   const PenaltyCalibration& calib, std::uint64_t seed) {
    calib.validate();
    auto ev = evaluate_samples(ens, x, u, reward, calib.n_samples, seed);
    UncertaintyReport rep;
    rep.per_member_moments = std::move(ev.moments);
    rep.raw_reward = ev.raw_reward;
    rep.kappa = compute_kappa(rep.per_member_moments);
    rep.varkappa = compute_varkappa(rep.per_member_moments);
    rep.disc = compute_disc(rep.per_member_moments);
    if (rep.varkappa > calib.epsilon) { // ties resolve to the penalized branch
        rep.branch = PenaltyBranch::cutoff;
        rep.penalized_reward = calib.c;
    } else if (rep.raw_reward > 0.0) {
        rep.branch = PenaltyBranch::penalized_positive;
        rep.penalized_reward = (1.0 - rep.kappa) * rep.raw_reward;
    } else {
        rep.branch = PenaltyBranch::penalized_negative;
        rep.penalized_reward = (1.0 + rep.kappa) * rep.raw_reward;
    }
    return rep;
}

namespace {

RewardFunction zero_reward() {
    return {"zero", [](const Eigen::VectorXd&) { return 0.0; }};
}

} // namespace

double calibrate_epsilon(const DynamicsEnsemble& ens, const ProcessDataset& validation,
                         int n_samples, std::uint64_t seed) {
    if (validation.empty()) throw ConfigError("calibrate_epsilon: empty validation set");
    const auto zero = zero_reward();
    double eps = 0.0;
    for (std::size_t k = 0; k < validation.size(); ++k) {
        const auto& rec = validation.records()[k];
        auto ev = evaluate_samples(ens, rec.x, rec.u, zero, n_samples,
                                   mix_seed(seed, static_cast<std::uint64_t>(k)));
        eps = std::max(eps, compute_varkappa(ev.moments));
    }
    return eps;
}

double max_disc_on(const DynamicsEnsemble& ens, const ProcessDataset& validation, int n_samples,
                   std::uint64_t seed) {
    if (validation.empty()) throw ConfigError("max_disc_on: empty validation set");
    const auto zero = zero_reward();
    double best = 0.0;
    for (std::size_t k = 0; k < validation.size(); ++k) {
        const auto& rec = validation.records()[k];
        auto ev = evaluate_samples(ens, rec.x, rec.u, zero, n_samples,
                                   mix_seed(seed, static_cast<std::uint64_t>(k)));
        best = std::max(best, compute_disc(ev.moments));
    }
    return best;
}

double f1_unpenalized(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u, const RewardFunction& reward, int n_samples,
                      std::uint64_t seed) {
    return expected_reward(ens, x, u, reward, n_samples, seed);
}

double f3_morel(const DynamicsEnsemble& ens, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                const RewardFunction& reward, double threshold, int n_samples, std::uint64_t seed) {
    auto ev = evaluate_samples(ens, x, u, reward, n_samples, seed);
    return compute_disc(ev.moments) <= threshold ? ev.raw_reward : 0.0;
}

double f4_mopo(const DynamicsEnsemble& ens, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               const RewardFunction& reward, double lambda_pen, int n_samples, std::uint64_t seed) {
    auto ev = evaluate_samples(ens, x, u, reward, n_samples, seed);
    double max_norm = 0.0;
    for (const auto& mo : ev.moments) max_norm = std::max(max_norm, mo.cov.norm());
    return ev.raw_reward - lambda_pen * max_norm;
}

} // namespace orpco
