#ifndef ORPCO_EXPERIMENT_HPP
#define ORPCO_EXPERIMENT_HPP

#include "orpco/cgan.hpp"
#include "orpco/ddpg.hpp"
#include "orpco/discrete_policy.hpp"
#include "orpco/ensemble.hpp"
#include "orpco/gpn.hpp"
#include "orpco/ib.hpp"
#include "orpco/ope.hpp"
#include "orpco/reward.hpp"
#include "orpco/synthetic.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace orpco {

/// Output root for run artifacts: $ORPCO_RUNS_DIR when set, else ./runs.
std::string runs_root();

/// Reproducibility record written next to every command's artifacts.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> artifacts;
    std::map<std::string, double> stage_seconds;
    std::map<std::string, double> metrics;

    void save(const std::string& dir) const;
};

std::string hash_hex(const std::string& payload);

// ---------------------------------------------------------------------------
// out-of-distribution diagnostics (curves, histograms, separation stats)

struct OodCurvePoint {
    int n_randomized = 0;
    double kappa_mean = 0.0, kappa_std = 0.0;
    double varkappa_mean = 0.0, varkappa_std = 0.0;
};

struct OodReport {
    std::vector<OodCurvePoint> curve; // n = 0 .. dim(x)+dim(u)
    // per-input signals for logged, control-randomized and fully-randomized sets
    std::vector<double> rp_logged, rp_control, rp_full;
    std::vector<double> kappa_logged, kappa_control, kappa_full;
    std::vector<double> vk_logged, vk_control, vk_full;
    double auroc_rp_full = 0.0, auroc_rp_control = 0.0;
    double auroc_kappa_full = 0.0, auroc_kappa_control = 0.0;
    double auroc_vk_full = 0.0, auroc_vk_control = 0.0;

    nlohmann::json to_json() const;
};

/// Sweeps n randomized input dimensions over evaluation records and collects
/// the OoD separation statistics at n = dim(u) (control-only) and full
/// randomization. AUROCs are oriented so that 1.0 means "the signal separates
/// OoD from logged perfectly".
OodReport run_ood_report(const DynamicsEnsemble& ens, const ProcessDataset& eval_set,
                         const RewardFunction& reward, const PenaltyCalibration& calib,
                         int n_inputs, std::uint64_t seed);

void write_ood_artifacts(const OodReport& rep, const std::string& dir);

// ---------------------------------------------------------------------------
// discrete case study

struct DiscreteExperimentConfig {
    SyntheticSpec truth;
    int n_records = 19760;
    double test_ratio = 0.2;     // historical split 4:1
    double val_carve = 0.1;      // carved from the training split for epsilon
    int m = 5;
    CganConfig cgan;
    GpnConfig gpn;
    bool grid_search_gpn = false;
    GpnGrid gpn_grid;
    int n_samples = 1000;        // N per member per evaluation
    double cutoff_reward = 0.0;  // c
    double f4_lambda = 1.0;
    BoConfig bo;
    int n_ope_records = 25;      // test records entering the OPE table
    int n_propensity_repeats = 10;
    int n_true_queries = 25;     // queries for the ground-truth value column
    int n_true_mc = 200000;      // brute-force samples per true evaluation
    std::uint64_t seed = 1;
};

struct DiscreteMethodRow {
    std::string method;
    OpeReport ope;
    double true_value = 0.0;
};

struct DiscreteExperimentReport {
    std::vector<DiscreteMethodRow> rows;
    double logging_true_value = 0.0;
    double epsilon = 0.0;
    double f3_threshold = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

DiscreteExperimentReport run_discrete_experiment(const DiscreteExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// continuous case study

struct ContinuousExperimentConfig {
    IbConfig ib;
    int n_traj = 300;
    int horizon = 100;
    CganConfig cgan;
    int m = 5;
    double cutoff_reward = -2000.0;
    double f4_lambda = 1000.0;
    DdpgConfig ddpg;
    int n_seeds = 5;
    std::vector<EvaluatorKind> methods = {EvaluatorKind::rp, EvaluatorKind::f1, EvaluatorKind::f3,
                                          EvaluatorKind::f4};
    bool include_gpn_rp = true;
    GpnConfig gpn;
    int eval_episodes = 20;
    std::vector<BehaviorKind> datasets = {BehaviorKind::random, BehaviorKind::safe};
    std::uint64_t seed = 1;
};

struct ContinuousCell {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_seed;
};

struct ContinuousExperimentReport {
    // row label -> dataset label -> cell
    std::vector<std::string> row_order;
    std::map<std::string, std::map<std::string, ContinuousCell>> cells;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

ContinuousExperimentReport run_continuous_experiment(const ContinuousExperimentConfig& cfg);

/// Shared ensemble-training entry used by the CLI and pipelines.
DynamicsEnsemble train_dynamics(const ProcessDataset& train, const std::string& kind, int m,
                                const CganConfig& cgan, const GpnConfig& gpn, std::uint64_t seed);

} // namespace orpco

#endif
