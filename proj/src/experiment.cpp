#include "orpco/experiment.hpp"

#include "orpco/errors.hpp"
#include "orpco/json_util.hpp"
#include "orpco/parallel.hpp"
#include "orpco/stats.hpp"
#include "orpco/svg.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace orpco {

namespace fs = std::filesystem;

std::string runs_root() {
    if (const char* env = std::getenv("ORPCO_RUNS_DIR")) return env;
    return "runs";
}

std::string hash_hex(const std::string& payload) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void RunManifest::save(const std::string& dir) const {
    fs::create_directories(dir);
    nlohmann::json j{{"command", command},
                     {"config_hash", config_hash},
                     {"seed", seed},
                     {"artifacts", artifacts},
                     {"stage_seconds", stage_seconds},
                     {"metrics", metrics}};
    std::ofstream out(fs::path(dir) / "run_manifest.json");
    if (!out) throw DataError("cannot write run manifest in " + dir);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// OoD diagnostics

namespace {

struct SignalTriple {
    double rp, kappa, vk;
};

SignalTriple signals_at(const DynamicsEnsemble& ens, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u, const RewardFunction& reward,
                        const PenaltyCalibration& calib, std::uint64_t seed) {
    const auto rep = penalized_reward(ens, x, u, reward, calib, seed);
    return {rep.penalized_reward, rep.kappa, rep.varkappa};
}

} // namespace

OodReport run_ood_report(const DynamicsEnsemble& ens, const ProcessDataset& eval_set,
                         const RewardFunction& reward, const PenaltyCalibration& calib,
                         int n_inputs, std::uint64_t seed) {
    if (eval_set.empty()) throw DataError("run_ood_report: empty evaluation set");
    const auto& schema = ens.schema;
    const int total_dims = schema.dim_input();
    const int du = schema.dim_u();
    const int n_use = std::min<int>(n_inputs, static_cast<int>(eval_set.size()));

    OodReport rep;
    rep.curve.resize(static_cast<std::size_t>(total_dims) + 1);

    std::vector<std::vector<double>> kappa_by_n(static_cast<std::size_t>(total_dims) + 1),
        vk_by_n(static_cast<std::size_t>(total_dims) + 1);

    for (int n = 0; n <= total_dims; ++n) {
        auto& ks = kappa_by_n[static_cast<std::size_t>(n)];
        auto& vs = vk_by_n[static_cast<std::size_t>(n)];
        for (int i = 0; i < n_use; ++i) {
            const auto& rec = eval_set.records()[static_cast<std::size_t>(i)];
            const ProcessRecord rnd = randomize_dims(
                rec, schema, n, mix_seed(seed, static_cast<std::uint64_t>(n * 100003 + i)));
            const auto sig =
                signals_at(ens, rnd.x, rnd.u, reward, calib,
                           mix_seed(seed, 0x0dULL + static_cast<std::uint64_t>(n * 100003 + i)));
            ks.push_back(sig.kappa);
            vs.push_back(sig.vk);
            if (n == 0) {
                rep.rp_logged.push_back(sig.rp);
                rep.kappa_logged.push_back(sig.kappa);
                rep.vk_logged.push_back(sig.vk);
            }
        }
        auto& pt = rep.curve[static_cast<std::size_t>(n)];
        pt.n_randomized = n;
        pt.kappa_mean = mean_of(ks);
        pt.kappa_std = stddev_of(ks);
        pt.varkappa_mean = mean_of(vs);
        pt.varkappa_std = stddev_of(vs);
    }

    // control-only randomization: resample every control dimension but keep
    // the logged conditionals; full randomization resamples everything
    for (int i = 0; i < n_use; ++i) {
        const auto& rec = eval_set.records()[static_cast<std::size_t>(i)];
        ProcessRecord ctrl = rec;
        Rng rng = make_rng(seed, {0xc7ULL, static_cast<std::uint64_t>(i)});
        for (int d = 0; d < du; ++d)
            ctrl.u[d] = uniform(rng, schema.u_var(d).lower, schema.u_var(d).upper);
        const auto sc = signals_at(ens, ctrl.x, ctrl.u, reward, calib,
                                   mix_seed(seed, 0xc70fULL + static_cast<std::uint64_t>(i)));
        rep.rp_control.push_back(sc.rp);
        rep.kappa_control.push_back(sc.kappa);
        rep.vk_control.push_back(sc.vk);

        const ProcessRecord full = randomize_dims(rec, schema, total_dims,
                                                  mix_seed(seed, 0xf11ULL + static_cast<std::uint64_t>(i)));
        const auto sf = signals_at(ens, full.x, full.u, reward, calib,
                                   mix_seed(seed, 0xf00fULL + static_cast<std::uint64_t>(i)));
        rep.rp_full.push_back(sf.rp);
        rep.kappa_full.push_back(sf.kappa);
        rep.vk_full.push_back(sf.vk);
    }

    rep.auroc_rp_full = auroc(rep.rp_logged, rep.rp_full);
    rep.auroc_rp_control = auroc(rep.rp_logged, rep.rp_control);
    rep.auroc_kappa_full = auroc(rep.kappa_full, rep.kappa_logged);
    rep.auroc_kappa_control = auroc(rep.kappa_control, rep.kappa_logged);
    rep.auroc_vk_full = auroc(rep.vk_full, rep.vk_logged);
    rep.auroc_vk_control = auroc(rep.vk_control, rep.vk_logged);
    return rep;
}

nlohmann::json OodReport::to_json() const {
    nlohmann::json curve_j = nlohmann::json::array();
    for (const auto& p : curve)
        curve_j.push_back({{"n", p.n_randomized},
                           {"kappa_mean", p.kappa_mean},
                           {"kappa_std", p.kappa_std},
                           {"varkappa_mean", p.varkappa_mean},
                           {"varkappa_std", p.varkappa_std}});
    return {{"curve", curve_j},
            {"auroc", {{"rp_full", auroc_rp_full},
                       {"rp_control", auroc_rp_control},
                       {"kappa_full", auroc_kappa_full},
                       {"kappa_control", auroc_kappa_control},
                       {"varkappa_full", auroc_vk_full},
                       {"varkappa_control", auroc_vk_control}}},
            {"rp_logged", rp_logged},
            {"rp_control", rp_control},
            {"rp_full", rp_full},
            {"kappa_logged", kappa_logged},
            {"kappa_control", kappa_control},
            {"kappa_full", kappa_full},
            {"varkappa_logged", vk_logged},
            {"varkappa_control", vk_control},
            {"varkappa_full", vk_full}};
}

void write_ood_artifacts(const OodReport& rep, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "ood_report.json");
        out << rep.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "ood_curve.csv");
        out << "n,kappa_mean,kappa_std,varkappa_mean,varkappa_std\n";
        for (const auto& p : rep.curve)
            out << p.n_randomized << "," << p.kappa_mean << "," << p.kappa_std << ","
                << p.varkappa_mean << "," << p.varkappa_std << "\n";
    }
    SvgSeries kappa_s{"kappa", {}, {}, {}, "#1f77b4"}, vk_s{"varkappa", {}, {}, {}, "#d62728"};
    for (const auto& p : rep.curve) {
        kappa_s.x.push_back(p.n_randomized);
        kappa_s.y.push_back(p.kappa_mean);
        kappa_s.band.push_back(p.kappa_std);
        vk_s.x.push_back(p.n_randomized);
        vk_s.y.push_back(p.varkappa_mean);
        vk_s.band.push_back(p.varkappa_std);
    }
    write_svg_curves((fs::path(dir) / "kappa_vs_n.svg").string(),
                     "model disagreement vs randomized dims", {kappa_s});
    write_svg_curves((fs::path(dir) / "varkappa_vs_n.svg").string(),
                     "predictive spread vs randomized dims", {vk_s});
    write_svg_histograms((fs::path(dir) / "rp_hist_full.svg").string(),
                         "penalized reward: logged vs fully randomized",
                         {{"logged", rep.rp_logged, "#1f77b4"}, {"ood", rep.rp_full, "#d62728"}});
    write_svg_histograms((fs::path(dir) / "rp_hist_control.svg").string(),
                         "penalized reward: logged vs control randomized",
                         {{"logged", rep.rp_logged, "#1f77b4"}, {"ood", rep.rp_control, "#d62728"}});
    write_svg_histograms((fs::path(dir) / "kappa_hist_full.svg").string(),
                         "kappa: logged vs fully randomized",
                         {{"logged", rep.kappa_logged, "#1f77b4"}, {"ood", rep.kappa_full, "#d62728"}});
    write_svg_histograms((fs::path(dir) / "varkappa_hist_full.svg").string(),
                         "varkappa: logged vs fully randomized",
                         {{"logged", rep.vk_logged, "#1f77b4"}, {"ood", rep.vk_full, "#d62728"}});
}

// ---------------------------------------------------------------------------
// shared training entry

DynamicsEnsemble train_dynamics(const ProcessDataset& train, const std::string& kind, int m,
                                const CganConfig& cgan, const GpnConfig& gpn, std::uint64_t seed) {
    if (kind == "cgan") return train_cgan_ensemble(train, m, cgan, seed);
    if (kind == "gpn") return train_gpn_ensemble(train, m, gpn, seed);
    throw ConfigError("unknown dynamics kind: " + kind);
}

// ---------------------------------------------------------------------------
// discrete experiment

namespace {

struct CalibratedArtifacts {
    DynamicsEnsemble cgan_ens, gpn_ens;
    ProcessDataset train, validation, test;
    double epsilon_cgan = 0.0, epsilon_gpn = 0.0;
    double f3_threshold = 0.0;
};

} // namespace

DiscreteExperimentReport run_discrete_experiment(const DiscreteExperimentConfig& cfg) {
    const RewardFunction reward = cfg.truth.box_reward();

    ProcessDataset data = generate_synthetic_discrete(cfg.truth, cfg.n_records, cfg.seed);
    auto top = data.split({1.0 - cfg.test_ratio, cfg.test_ratio}, mix_seed(cfg.seed, 1));
    auto carve = top[0].split({1.0 - cfg.val_carve, cfg.val_carve}, mix_seed(cfg.seed, 2));
    ProcessDataset train = std::move(carve[0]);
    ProcessDataset validation = std::move(carve[1]);
    ProcessDataset test = std::move(top[1]);
    // normalization comes from the training split only
    train.fit_normalization();
    validation.set_normalization(train.normalization());
    test.set_normalization(train.normalization());

    DynamicsEnsemble cgan_ens = train_cgan_ensemble(train, cfg.m, cfg.cgan, mix_seed(cfg.seed, 3));
    GpnConfig gpn_cfg = cfg.gpn;
    if (cfg.grid_search_gpn) {
        auto grid = gpn_grid_search(train.normalized_xu(), train.normalized_y(),
                                    validation.normalized_xu(), validation.normalized_y(),
                                    cfg.gpn_grid, cfg.gpn, mix_seed(cfg.seed, 4));
        gpn_cfg = grid.best;
    }
    DynamicsEnsemble gpn_ens = train_gpn_ensemble(train, cfg.m, gpn_cfg, mix_seed(cfg.seed, 5));

    const double eps_cgan =
        calibrate_epsilon(cgan_ens, validation, cfg.n_samples, mix_seed(cfg.seed, 6));
    const double eps_gpn =
        calibrate_epsilon(gpn_ens, validation, cfg.n_samples, mix_seed(cfg.seed, 7));
    const double f3_thr = max_disc_on(cgan_ens, validation, cfg.n_samples, mix_seed(cfg.seed, 8));

    auto make_policy = [&](EvaluatorKind kind, const DynamicsEnsemble& ens, double eps) {
        DiscretePolicy p;
        p.evaluator = kind;
        p.ensemble = &ens;
        p.reward = reward;
        p.calib = {eps, cfg.cutoff_reward, cfg.m, cfg.n_samples};
        p.f3_threshold = f3_thr;
        p.f4_lambda = cfg.f4_lambda;
        p.n_samples = cfg.n_samples;
        p.bo = cfg.bo;
        return p;
    };

    struct MethodDef {
        std::string name;
        DiscretePolicy policy;
    };
    std::vector<MethodDef> methods;
    methods.push_back({"rp", make_policy(EvaluatorKind::rp, cgan_ens, eps_cgan)});
    methods.push_back({"f1", make_policy(EvaluatorKind::f1, cgan_ens, eps_cgan)});
    methods.push_back({"rp_gpn", make_policy(EvaluatorKind::rp, gpn_ens, eps_gpn)});
    methods.push_back({"f3", make_policy(EvaluatorKind::f3, cgan_ens, eps_cgan)});
    methods.push_back({"f4", make_policy(EvaluatorKind::f4, cgan_ens, eps_cgan)});

    LoggingPropensity log_prop =
        fit_logging_propensity(train, cfg.gpn, mix_seed(cfg.seed, 9));
    RewardPredictor rhat = RewardPredictor::train(train, reward, mix_seed(cfg.seed, 10));

    const int n_ope = std::min<int>(cfg.n_ope_records, static_cast<int>(test.size()));

    DiscreteExperimentReport report;
    report.epsilon = eps_cgan;
    report.f3_threshold = f3_thr;
    report.logging_true_value =
        logging_policy_value(cfg.truth, reward, cfg.n_true_queries, cfg.n_true_mc,
                             mix_seed(cfg.seed, 11));

    for (const auto& method : methods) {
        OpeInputs in;
        for (int k = 0; k < n_ope; ++k) {
            const auto& rec = test.records()[static_cast<std::size_t>(k)];
            const std::uint64_t record_seed =
                mix_seed(cfg.seed, 0x0feULL + static_cast<std::uint64_t>(k));
            const DiagGaussian target = fit_target_propensity(
                method.policy, rec.x, cfg.n_propensity_repeats, record_seed);
            // the policy's reported choice is its first seed-varied output
            const Eigen::VectorXd u_star = method.policy.optimize(rec.x, mix_seed(record_seed, 0));

            in.logged_reward.push_back(reward(rec.y));
            in.log_density.push_back(log_prop.density(rec.x, rec.u));
            in.target_density.push_back(
                std::max(target.density(train.normalization().normalize_u(rec.u)), 1e-6));
            in.rhat_star.push_back(rhat.predict(rec.x, u_star));
            in.rhat_logged.push_back(rhat.predict(rec.x, rec.u));
        }
        DiscreteMethodRow row;
        row.method = method.name;
        row.ope = compute_ope(in);
        row.true_value = policy_value_true(method.policy, cfg.truth, reward, cfg.n_true_queries,
                                           cfg.n_true_mc, mix_seed(cfg.seed, 12));
        report.rows.push_back(std::move(row));
    }
    return report;
}

nlohmann::json DiscreteExperimentReport::to_json() const {
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j = r.ope.to_json();
        j.erase("weights");
        j["method"] = r.method;
        j["true_value"] = r.true_value;
        rows_j.push_back(std::move(j));
    }
    return {{"rows", rows_j},
            {"logging_true_value", logging_true_value},
            {"epsilon", epsilon},
            {"f3_threshold", f3_threshold}};
}

std::string DiscreteExperimentReport::to_csv() const {
    std::ostringstream os;
    os << "method,dm,ips,wis,dr,true\n";
    for (const auto& r : rows)
        os << r.method << "," << r.ope.dm << "," << r.ope.ips << "," << r.ope.wis << ","
           << r.ope.dr << "," << r.true_value << "\n";
    os << "logging,,,,," << logging_true_value << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// continuous experiment

ContinuousExperimentReport run_continuous_experiment(const ContinuousExperimentConfig& cfg) {
    IbEnv env(cfg.ib);
    const RewardFunction reward = env.reward_function();
    ContinuousExperimentReport report;
    report.row_order.push_back("behavior");
    for (auto m : cfg.methods) report.row_order.push_back(to_string(m));
    if (cfg.include_gpn_rp) report.row_order.push_back("rp_gpn");

    for (const BehaviorKind behavior : cfg.datasets) {
        const std::string ds_label = behavior == BehaviorKind::random ? "random" : "safe";
        const std::uint64_t ds_seed =
            mix_seed(cfg.seed, behavior == BehaviorKind::random ? 0x11ULL : 0x22ULL);

        auto [data, trajectories] = rollout_dataset(env, behavior, cfg.n_traj, cfg.horizon, ds_seed);
        auto carve = data.split({0.9, 0.1}, mix_seed(ds_seed, 1));
        ProcessDataset train = std::move(carve[0]);
        ProcessDataset validation = std::move(carve[1]);
        train.fit_normalization();
        validation.set_normalization(train.normalization());

        DynamicsEnsemble cgan_ens =
            train_cgan_ensemble(train, cfg.m, cfg.cgan, mix_seed(ds_seed, 2));
        const double eps = calibrate_epsilon(cgan_ens, validation, cfg.ddpg.model_samples,
                                             mix_seed(ds_seed, 3));
        const double f3_thr = max_disc_on(cgan_ens, validation, cfg.ddpg.model_samples,
                                          mix_seed(ds_seed, 4));

        {
            ContinuousCell cell;
            for (int s = 0; s < cfg.n_seeds; ++s) {
                auto [mean, sd] = evaluate_behavior(env, behavior, cfg.eval_episodes, cfg.horizon,
                                                    mix_seed(ds_seed, 0xbe00ULL + static_cast<std::uint64_t>(s)));
                (void)sd;
                cell.per_seed.push_back(mean);
            }
            cell.mean = mean_of(cell.per_seed);
            cell.stddev = cell.per_seed.size() > 1 ? stddev_of(cell.per_seed) : 0.0;
            report.cells["behavior"][ds_label] = std::move(cell);
        }

        auto run_method = [&](const std::string& label, const DynamicsEnsemble& ens, double eps_use) {
            EvaluatorSpec spec;
            if (label == "rp" || label == "rp_gpn") spec.kind = EvaluatorKind::rp;
            else spec.kind = evaluator_from_string(label);
            spec.calib = {eps_use, cfg.cutoff_reward, cfg.m, cfg.ddpg.model_samples};
            spec.f3_threshold = f3_thr;
            spec.f4_lambda = cfg.f4_lambda;

            ContinuousCell cell;
            cell.per_seed.resize(static_cast<std::size_t>(cfg.n_seeds));
            parallel_for(cfg.n_seeds, [&](int s) {
                DdpgAgent agent = train_offline_ddpg(
                    ens, train, reward, spec, cfg.ddpg,
                    mix_seed(ds_seed, 0xaa00ULL + static_cast<std::uint64_t>(s)));
                auto [mean, sd] = evaluate_policy(agent, env, cfg.eval_episodes, cfg.horizon,
                                                  mix_seed(ds_seed, 0xee00ULL + static_cast<std::uint64_t>(s)));
                (void)sd;
                cell.per_seed[static_cast<std::size_t>(s)] = mean;
            });
            cell.mean = mean_of(cell.per_seed);
            cell.stddev = cell.per_seed.size() > 1 ? stddev_of(cell.per_seed) : 0.0;
            report.cells[label][ds_label] = std::move(cell);
        };

        for (auto m : cfg.methods) run_method(to_string(m), cgan_ens, eps);
        if (cfg.include_gpn_rp) {
            DynamicsEnsemble gpn_ens = train_gpn_ensemble(train, cfg.m, cfg.gpn, mix_seed(ds_seed, 5));
            const double eps_gpn = calibrate_epsilon(gpn_ens, validation, cfg.ddpg.model_samples,
                                                     mix_seed(ds_seed, 6));
            run_method("rp_gpn", gpn_ens, eps_gpn);
        }
    }
    return report;
}

nlohmann::json ContinuousExperimentReport::to_json() const {
    nlohmann::json j;
    j["row_order"] = row_order;
    nlohmann::json cells_j;
    for (const auto& [row, by_ds] : cells) {
        for (const auto& [ds, cell] : by_ds) {
            cells_j[row][ds] = {{"mean", cell.mean}, {"std", cell.stddev}, {"per_seed", cell.per_seed}};
        }
    }
    j["cells"] = std::move(cells_j);
    return j;
}

std::string ContinuousExperimentReport::to_csv() const {
    std::ostringstream os;
    os << "method";
    std::vector<std::string> ds_labels;
    if (!cells.empty())
        for (const auto& [ds, cell] : cells.begin()->second) ds_labels.push_back(ds);
    for (const auto& ds : ds_labels) os << "," << ds << "_mean," << ds << "_std";
    os << "\n";
    for (const auto& row : row_order) {
        auto it = cells.find(row);
        if (it == cells.end()) continue;
        os << row;
        for (const auto& ds : ds_labels) {
            auto jt = it->second.find(ds);
            if (jt == it->second.end()) os << ",,";
            else os << "," << jt->second.mean << "," << jt->second.stddev;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace orpco
