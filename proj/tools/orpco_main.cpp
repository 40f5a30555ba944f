// Command-line front end: dataset simulation, dynamics training, reward
// evaluation, policy search and the two end-to-end case studies.

#include "orpco/errors.hpp"
#include "orpco/experiment.hpp"
#include "orpco/json_util.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace orpco;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

ProcessDataset load_dataset_dir(const std::string& data_dir) {
    const fs::path dir(data_dir);
    Schema schema = Schema::load((dir / "schema.json").string());
    return ProcessDataset::load_csv((dir / "data.csv").string(), schema);
}

void save_dataset_dir(const ProcessDataset& ds, const std::string& out_dir) {
    fs::create_directories(out_dir);
    ds.schema().save((fs::path(out_dir) / "schema.json").string());
    ds.save_csv((fs::path(out_dir) / "data.csv").string());
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"offline reliable process-control optimization toolkit"};
    app.set_config("--config", "", "TOML/INI config file; flags override file values");
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "master seed")->capture_default_str();

    // ---- simulate --------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "roll out a behavior policy on the surrogate env");
    std::string sim_policy = "random", sim_out = runs_root() + "/simulate";
    int sim_traj = 300, sim_len = 100;
    sim->add_option("--policy", sim_policy, "random|safe")->capture_default_str();
    sim->add_option("--n-traj", sim_traj)->capture_default_str();
    sim->add_option("--length", sim_len)->capture_default_str();
    sim->add_option("--out", sim_out)->capture_default_str();

    // ---- generate (synthetic discrete data) ------------------------------
    auto* gen = app.add_subcommand("generate", "sample a synthetic production dataset");
    std::string gen_out = runs_root() + "/synthetic", gen_spec_path;
    int gen_n = 19760;
    bool gen_trap = false;
    gen->add_option("--out", gen_out)->capture_default_str();
    gen->add_option("--n", gen_n)->capture_default_str();
    gen->add_option("--spec", gen_spec_path, "generator spec JSON (default: built-in)");
    gen->add_flag("--trap", gen_trap, "use the OoD-trap variant of the built-in spec");

    // ---- train-dynamics ---------------------------------------------------
    auto* td = app.add_subcommand("train-dynamics", "train a CGAN or GPN ensemble");
    std::string td_data, td_out = runs_root() + "/ensemble", td_kind = "cgan";
    int td_m = 5, td_epochs = -1;
    td->add_option("--data", td_data, "dataset directory (schema.json + data.csv)")->required();
    td->add_option("--out", td_out)->capture_default_str();
    td->add_option("--kind", td_kind, "cgan|gpn")->capture_default_str();
    td->add_option("--members", td_m, "ensemble size M")->capture_default_str();
    td->add_option("--epochs", td_epochs, "override training epochs");

    // ---- eval-reward -------------------------------------------------------
    auto* ev = app.add_subcommand("eval-reward", "penalized reward reports for input rows");
    std::string ev_ensemble, ev_data, ev_out = runs_root() + "/eval";
    double ev_epsilon = 0.0, ev_c = 0.0;
    int ev_n = 1000, ev_limit = 100;
    ev->add_option("--ensemble", ev_ensemble)->required();
    ev->add_option("--data", ev_data, "dataset directory with evaluation rows")->required();
    ev->add_option("--epsilon", ev_epsilon, "spread threshold (0: calibrate on the data)")
        ->capture_default_str();
    ev->add_option("--cutoff", ev_c, "reward outside the trust region")->capture_default_str();
    ev->add_option("--n-samples", ev_n)->capture_default_str();
    ev->add_option("--limit", ev_limit, "max rows to evaluate")->capture_default_str();
    ev->add_option("--out", ev_out)->capture_default_str();

    // ---- optimize ----------------------------------------------------------
    auto* opt = app.add_subcommand("optimize", "per-query control search");
    std::string opt_ensemble, opt_x, opt_evaluator = "rp", opt_out = runs_root() + "/optimize";
    double opt_epsilon = 0.0, opt_c = 0.0, opt_f4_lambda = 1.0;
    int opt_n = 1000;
    opt->add_option("--ensemble", opt_ensemble)->required();
    opt->add_option("--x", opt_x, "comma-separated conditional values")->required();
    opt->add_option("--evaluator", opt_evaluator, "rp|f1|f3|f4")->capture_default_str();
    opt->add_option("--epsilon", opt_epsilon)->capture_default_str();
    opt->add_option("--cutoff", opt_c)->capture_default_str();
    opt->add_option("--f4-lambda", opt_f4_lambda)->capture_default_str();
    opt->add_option("--n-samples", opt_n)->capture_default_str();
    opt->add_option("--out", opt_out)->capture_default_str();

    // ---- train-policy ------------------------------------------------------
    auto* tp = app.add_subcommand("train-policy", "offline model-based DDPG");
    std::string tp_data, tp_ensemble, tp_evaluator = "rp", tp_out = runs_root() + "/policy";
    int tp_seeds = 5, tp_episodes = 1500, tp_horizon = 100, tp_n = 1000;
    double tp_c = -2000.0, tp_f4_lambda = 1000.0;
    tp->add_option("--data", tp_data)->required();
    tp->add_option("--ensemble", tp_ensemble)->required();
    tp->add_option("--evaluator", tp_evaluator, "rp|f1|f3|f4")->capture_default_str();
    tp->add_option("--seeds", tp_seeds)->capture_default_str();
    tp->add_option("--episodes", tp_episodes)->capture_default_str();
    tp->add_option("--horizon", tp_horizon)->capture_default_str();
    tp->add_option("--n-samples", tp_n)->capture_default_str();
    tp->add_option("--cutoff", tp_c)->capture_default_str();
    tp->add_option("--f4-lambda", tp_f4_lambda)->capture_default_str();
    tp->add_option("--out", tp_out)->capture_default_str();

    // ---- ope ----------------------------------------------------------------
    auto* ope_cmd = app.add_subcommand("ope", "off-policy evaluation of a discrete policy");
    std::string ope_ensemble, ope_train, ope_test, ope_evaluator = "rp",
                ope_out = runs_root() + "/ope";
    int ope_records = 25, ope_repeats = 10, ope_n = 1000;
    double ope_epsilon = 0.0, ope_c = 0.0;
    ope_cmd->add_option("--ensemble", ope_ensemble)->required();
    ope_cmd->add_option("--train", ope_train, "training dataset directory")->required();
    ope_cmd->add_option("--test", ope_test, "test dataset directory")->required();
    ope_cmd->add_option("--evaluator", ope_evaluator)->capture_default_str();
    ope_cmd->add_option("--records", ope_records)->capture_default_str();
    ope_cmd->add_option("--repeats", ope_repeats)->capture_default_str();
    ope_cmd->add_option("--n-samples", ope_n)->capture_default_str();
    ope_cmd->add_option("--epsilon", ope_epsilon)->capture_default_str();
    ope_cmd->add_option("--cutoff", ope_c)->capture_default_str();
    ope_cmd->add_option("--out", ope_out)->capture_default_str();

    // ---- report-ood ----------------------------------------------------------
    auto* ood = app.add_subcommand("report-ood", "kappa/varkappa curves and separation stats");
    std::string ood_ensemble, ood_data, ood_out = runs_root() + "/ood";
    int ood_inputs = 200, ood_n = 1000;
    double ood_epsilon = 0.0, ood_c = 0.0;
    ood->add_option("--ensemble", ood_ensemble)->required();
    ood->add_option("--data", ood_data)->required();
    ood->add_option("--inputs", ood_inputs)->capture_default_str();
    ood->add_option("--n-samples", ood_n)->capture_default_str();
    ood->add_option("--epsilon", ood_epsilon)->capture_default_str();
    ood->add_option("--cutoff", ood_c)->capture_default_str();
    ood->add_option("--out", ood_out)->capture_default_str();

    // ---- experiment-discrete --------------------------------------------------
    auto* exd = app.add_subcommand("experiment-discrete", "full discrete case study");
    std::string exd_out = runs_root() + "/experiment_discrete";
    int exd_records = 6000, exd_epochs = 400, exd_m = 5, exd_n = 1000, exd_ope = 25;
    bool exd_trap = false, exd_smoke = false;
    exd->add_option("--out", exd_out)->capture_default_str();
    exd->add_option("--records", exd_records)->capture_default_str();
    exd->add_option("--epochs", exd_epochs)->capture_default_str();
    exd->add_option("--members", exd_m)->capture_default_str();
    exd->add_option("--n-samples", exd_n)->capture_default_str();
    exd->add_option("--ope-records", exd_ope)->capture_default_str();
    exd->add_flag("--trap", exd_trap, "plant the OoD reward trap");
    exd->add_flag("--smoke", exd_smoke, "minutes-scale sizes for CI");

    // ---- experiment-continuous -------------------------------------------------
    auto* exc = app.add_subcommand("experiment-continuous", "full continuous case study");
    std::string exc_out = runs_root() + "/experiment_continuous";
    int exc_traj = 300, exc_episodes = 1500, exc_m = 5, exc_n = 1000, exc_seeds = 5;
    int exc_epochs = 120;
    bool exc_smoke = false;
    exc->add_option("--out", exc_out)->capture_default_str();
    exc->add_option("--n-traj", exc_traj)->capture_default_str();
    exc->add_option("--episodes", exc_episodes)->capture_default_str();
    exc->add_option("--members", exc_m)->capture_default_str();
    exc->add_option("--n-samples", exc_n)->capture_default_str();
    exc->add_option("--seeds", exc_seeds)->capture_default_str();
    exc->add_option("--epochs", exc_epochs)->capture_default_str();
    exc->add_flag("--smoke", exc_smoke, "minutes-scale sizes for CI");

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad flags and config files are config errors
    }
    Timer timer;
    RunManifest manifest;
    manifest.seed = seed;

    if (*sim) {
        IbEnv env;
        auto [ds, trajectories] =
            rollout_dataset(env, behavior_from_string(sim_policy), sim_traj, sim_len, seed);
        save_dataset_dir(ds, sim_out);
        nlohmann::json traj_j = nlohmann::json::array();
        for (const auto& t : trajectories) traj_j.push_back(t.to_json());
        write_text((fs::path(sim_out) / "trajectories.json").string(), traj_j.dump());
        manifest.command = "simulate";
        manifest.config_hash = hash_hex(sim_policy + std::to_string(sim_traj) + "x" +
                                        std::to_string(sim_len) + std::to_string(seed));
        manifest.artifacts = {sim_out + "/schema.json", sim_out + "/data.csv",
                              sim_out + "/trajectories.json"};
        manifest.metrics["records"] = static_cast<double>(ds.size());
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(sim_out);
        std::cout << "wrote " << ds.size() << " records to " << sim_out << "\n";
        return 0;
    }

    if (*gen) {
        SyntheticSpec spec = !gen_spec_path.empty() ? SyntheticSpec::load(gen_spec_path)
                             : gen_trap             ? SyntheticSpec::with_ood_trap()
                                                    : SyntheticSpec::production_like();
        ProcessDataset ds = generate_synthetic_discrete(spec, gen_n, seed);
        save_dataset_dir(ds, gen_out);
        write_text((fs::path(gen_out) / "generator_spec.json").string(), spec.to_json().dump(2));
        manifest.command = "generate";
        manifest.config_hash = hash_hex(spec.to_json().dump() + std::to_string(gen_n));
        manifest.artifacts = {gen_out + "/schema.json", gen_out + "/data.csv",
                              gen_out + "/generator_spec.json"};
        manifest.metrics["records"] = static_cast<double>(ds.size());
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(gen_out);
        std::cout << "wrote " << ds.size() << " records to " << gen_out << "\n";
        return 0;
    }

    if (*td) {
        ProcessDataset data = load_dataset_dir(td_data);
        if (data.empty()) throw DataError("train-dynamics: dataset has no records");
        CganConfig cgan;
        GpnConfig gpn;
        if (td_epochs > 0) {
            cgan.epochs = td_epochs;
            gpn.epochs = td_epochs;
        }
        DynamicsEnsemble ens = train_dynamics(data, td_kind, td_m, cgan, gpn, seed);
        // atomic checkpoint: stage then rename
        const std::string stage = td_out + ".partial";
        fs::remove_all(stage);
        ens.save(stage);
        fs::remove_all(td_out);
        fs::rename(stage, td_out);
        manifest.command = "train-dynamics";
        manifest.config_hash = hash_hex(td_kind + std::to_string(td_m) + ens.train_config_json);
        manifest.artifacts = {td_out + "/manifest.json"};
        manifest.metrics["members"] = td_m;
        manifest.stage_seconds["train"] = timer.seconds();
        manifest.save(td_out);
        std::cout << "trained " << td_kind << " ensemble (M=" << td_m << ") -> " << td_out << "\n";
        return 0;
    }

    if (*ev) {
        DynamicsEnsemble ens = DynamicsEnsemble::load(ev_ensemble);
        ProcessDataset data = load_dataset_dir(ev_data);
        if (data.empty()) throw DataError("eval-reward: dataset has no records");
        double epsilon = ev_epsilon;
        if (epsilon <= 0.0) epsilon = calibrate_epsilon(ens, data, ev_n, mix_seed(seed, 1));
        PenaltyCalibration calib{epsilon, ev_c, ens.size(), ev_n};
        RewardFunction reward = ens.schema.dim_y() == 5
                                    ? IbEnv().reward_function()
                                    : SyntheticSpec::production_like().box_reward();
        nlohmann::json rows = nlohmann::json::array();
        const int limit = std::min<int>(ev_limit, static_cast<int>(data.size()));
        for (int i = 0; i < limit; ++i) {
            const auto& rec = data.records()[static_cast<std::size_t>(i)];
            auto rep = penalized_reward(ens, rec.x, rec.u, reward, calib,
                                        mix_seed(seed, static_cast<std::uint64_t>(i)));
            nlohmann::json row = rep.to_json();
            row.erase("per_member_moments");
            row["row"] = i;
            rows.push_back(std::move(row));
        }
        fs::create_directories(ev_out);
        write_text((fs::path(ev_out) / "reports.json").string(), rows.dump(2));
        manifest.command = "eval-reward";
        manifest.config_hash = hash_hex(ev_ensemble + std::to_string(epsilon));
        manifest.artifacts = {ev_out + "/reports.json"};
        manifest.metrics["epsilon"] = epsilon;
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(ev_out);
        std::cout << "evaluated " << limit << " rows (epsilon=" << epsilon << ") -> " << ev_out
                  << "\n";
        return 0;
    }

    if (*opt) {
        DynamicsEnsemble ens = DynamicsEnsemble::load(opt_ensemble);
        Eigen::VectorXd x(ens.schema.dim_x());
        {
            std::stringstream ss(opt_x);
            std::string cell;
            int i = 0;
            while (std::getline(ss, cell, ',') && i < x.size()) x[i++] = std::stod(cell);
            if (i != x.size()) throw ConfigError("optimize: --x needs " + std::to_string(x.size()) +
                                                 " comma-separated values");
        }
        DiscretePolicy policy;
        policy.evaluator = evaluator_from_string(opt_evaluator);
        policy.ensemble = &ens;
        policy.reward = ens.schema.dim_y() == 5 ? IbEnv().reward_function()
                                                : SyntheticSpec::production_like().box_reward();
        policy.calib = {opt_epsilon > 0 ? opt_epsilon : 1.0, opt_c, ens.size(), opt_n};
        policy.f4_lambda = opt_f4_lambda;
        policy.n_samples = opt_n;
        BoTrace trace;
        const Eigen::VectorXd u_star = policy.optimize(x, seed, &trace);
        nlohmann::json trace_j = nlohmann::json::array();
        for (const auto& p : trace.probes)
            trace_j.push_back({{"u", vec_to_json(p.u)}, {"value", p.value}});
        nlohmann::json out{{"u_star", vec_to_json(u_star)},
                           {"best_value", trace.best_value},
                           {"trace", std::move(trace_j)}};
        fs::create_directories(opt_out);
        write_text((fs::path(opt_out) / "optimize.json").string(), out.dump(2));
        manifest.command = "optimize";
        manifest.config_hash = hash_hex(opt_ensemble + opt_x + opt_evaluator);
        manifest.artifacts = {opt_out + "/optimize.json"};
        manifest.metrics["best_value"] = trace.best_value;
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(opt_out);
        std::cout << "u* = [";
        for (Eigen::Index i = 0; i < u_star.size(); ++i)
            std::cout << (i ? ", " : "") << u_star[i];
        std::cout << "] value " << trace.best_value << "\n";
        return 0;
    }

    if (*tp) {
        ProcessDataset data = load_dataset_dir(tp_data);
        DynamicsEnsemble ens = DynamicsEnsemble::load(tp_ensemble);
        ProcessDataset calib_data = data;
        calib_data.set_normalization(ens.norm);
        DdpgConfig ddpg;
        ddpg.episodes = tp_episodes;
        ddpg.horizon = tp_horizon;
        ddpg.model_samples = tp_n;
        EvaluatorSpec spec;
        spec.kind = evaluator_from_string(tp_evaluator);
        spec.calib = {calibrate_epsilon(ens, calib_data, tp_n, mix_seed(seed, 1)), tp_c, ens.size(),
                      tp_n};
        spec.f4_lambda = tp_f4_lambda;
        if (spec.kind == EvaluatorKind::f3)
            spec.f3_threshold = max_disc_on(ens, calib_data, tp_n, mix_seed(seed, 2));
        const RewardFunction reward = IbEnv().reward_function();
        fs::create_directories(tp_out);
        for (int s = 0; s < tp_seeds; ++s) {
            std::vector<EpisodeStats> log;
            DdpgAgent agent =
                train_offline_ddpg(ens, data, reward, spec, ddpg,
                                   mix_seed(seed, static_cast<std::uint64_t>(s)), &log);
            write_text((fs::path(tp_out) / ("agent_seed" + std::to_string(s) + ".json")).string(),
                       agent.checkpoint().dump());
            std::ostringstream csv;
            csv << "episode,penalized_return,cutoff_steps,critic_loss\n";
            for (const auto& e : log)
                csv << e.episode << "," << e.penalized_return << "," << e.cutoff_steps << ","
                    << e.critic_loss << "\n";
            write_text((fs::path(tp_out) / ("returns_seed" + std::to_string(s) + ".csv")).string(),
                       csv.str());
            manifest.artifacts.push_back(tp_out + "/agent_seed" + std::to_string(s) + ".json");
        }
        manifest.command = "train-policy";
        manifest.config_hash = hash_hex(tp_ensemble + tp_evaluator + std::to_string(tp_episodes));
        manifest.metrics["epsilon"] = spec.calib.epsilon;
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(tp_out);
        std::cout << "trained " << tp_seeds << " seeds -> " << tp_out << "\n";
        return 0;
    }

    if (*ope_cmd) {
        DynamicsEnsemble ens = DynamicsEnsemble::load(ope_ensemble);
        ProcessDataset train = load_dataset_dir(ope_train);
        ProcessDataset test = load_dataset_dir(ope_test);
        train.set_normalization(ens.norm);
        test.set_normalization(ens.norm);
        const RewardFunction reward = ens.schema.dim_y() == 5
                                          ? IbEnv().reward_function()
                                          : SyntheticSpec::production_like().box_reward();
        DiscretePolicy policy;
        policy.evaluator = evaluator_from_string(ope_evaluator);
        policy.ensemble = &ens;
        policy.reward = reward;
        policy.calib = {ope_epsilon > 0
                            ? ope_epsilon
                            : calibrate_epsilon(ens, train, ope_n, mix_seed(seed, 1)),
                        ope_c, ens.size(), ope_n};
        policy.n_samples = ope_n;
        LoggingPropensity log_prop = fit_logging_propensity(train, GpnConfig{}, mix_seed(seed, 2));
        RewardPredictor rhat = RewardPredictor::train(train, reward, mix_seed(seed, 3));
        OpeInputs in;
        const int n_ope = std::min<int>(ope_records, static_cast<int>(test.size()));
        for (int k = 0; k < n_ope; ++k) {
            const auto& rec = test.records()[static_cast<std::size_t>(k)];
            const std::uint64_t rs = mix_seed(seed, 0xfeULL + static_cast<std::uint64_t>(k));
            const DiagGaussian target = fit_target_propensity(policy, rec.x, ope_repeats, rs);
            const Eigen::VectorXd u_star = policy.optimize(rec.x, mix_seed(rs, 0));
            in.logged_reward.push_back(reward(rec.y));
            in.log_density.push_back(log_prop.density(rec.x, rec.u));
            in.target_density.push_back(
                std::max(target.density(ens.norm.normalize_u(rec.u)), 1e-6));
            in.rhat_star.push_back(rhat.predict(rec.x, u_star));
            in.rhat_logged.push_back(rhat.predict(rec.x, rec.u));
        }
        OpeReport rep = compute_ope(in);
        fs::create_directories(ope_out);
        write_text((fs::path(ope_out) / "ope.json").string(), rep.to_json().dump(2));
        manifest.command = "ope";
        manifest.config_hash = hash_hex(ope_ensemble + ope_evaluator);
        manifest.artifacts = {ope_out + "/ope.json"};
        manifest.metrics["dr"] = rep.dr;
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(ope_out);
        std::cout << "DM=" << rep.dm << " IPS=" << rep.ips << " WIS=" << rep.wis
                  << " DR=" << rep.dr << " (n_eff=" << rep.n_eff << ")\n";
        return 0;
    }

    if (*ood) {
        DynamicsEnsemble ens = DynamicsEnsemble::load(ood_ensemble);
        ProcessDataset data = load_dataset_dir(ood_data);
        data.set_normalization(ens.norm);
        double epsilon = ood_epsilon;
        if (epsilon <= 0.0) epsilon = calibrate_epsilon(ens, data, ood_n, mix_seed(seed, 1));
        PenaltyCalibration calib{epsilon, ood_c, ens.size(), ood_n};
        const RewardFunction reward = ens.schema.dim_y() == 5
                                          ? IbEnv().reward_function()
                                          : SyntheticSpec::production_like().box_reward();
        OodReport rep = run_ood_report(ens, data, reward, calib, ood_inputs, seed);
        write_ood_artifacts(rep, ood_out);
        manifest.command = "report-ood";
        manifest.config_hash = hash_hex(ood_ensemble + std::to_string(ood_inputs));
        manifest.artifacts = {ood_out + "/ood_report.json", ood_out + "/ood_curve.csv"};
        manifest.metrics["auroc_rp_full"] = rep.auroc_rp_full;
        manifest.metrics["auroc_rp_control"] = rep.auroc_rp_control;
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(ood_out);
        std::cout << "AUROC(-rp): full=" << rep.auroc_rp_full
                  << " control=" << rep.auroc_rp_control << " -> " << ood_out << "\n";
        return 0;
    }

    if (*exd) {
        DiscreteExperimentConfig cfg;
        cfg.truth = exd_trap ? SyntheticSpec::with_ood_trap() : SyntheticSpec::production_like();
        cfg.n_records = exd_records;
        cfg.cgan.epochs = exd_epochs;
        cfg.m = exd_m;
        cfg.n_samples = exd_n;
        cfg.n_ope_records = exd_ope;
        cfg.seed = seed;
        if (exd_smoke) {
            cfg.n_records = 1200;
            cfg.cgan.epochs = 40;
            cfg.cgan.batch_size = 128;
            cfg.n_samples = 100;
            cfg.n_ope_records = 4;
            cfg.n_propensity_repeats = 3;
            cfg.n_true_queries = 4;
            cfg.n_true_mc = 20000;
            cfg.bo.n_init = 4;
            cfg.bo.n_iter = 6;
            cfg.gpn.epochs = 30;
        }
        DiscreteExperimentReport rep = run_discrete_experiment(cfg);
        fs::create_directories(exd_out);
        write_text((fs::path(exd_out) / "report.json").string(), rep.to_json().dump(2));
        write_text((fs::path(exd_out) / "report.csv").string(), rep.to_csv());
        manifest.command = "experiment-discrete";
        manifest.config_hash = hash_hex(std::to_string(exd_records) + std::to_string(seed) +
                                        (exd_trap ? "trap" : "plain"));
        manifest.artifacts = {exd_out + "/report.json", exd_out + "/report.csv"};
        for (const auto& row : rep.rows) manifest.metrics["true_" + row.method] = row.true_value;
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(exd_out);
        std::cout << rep.to_csv();
        return 0;
    }

    if (*exc) {
        ContinuousExperimentConfig cfg;
        cfg.n_traj = exc_traj;
        cfg.ddpg.episodes = exc_episodes;
        cfg.m = exc_m;
        cfg.ddpg.model_samples = exc_n;
        cfg.n_seeds = exc_seeds;
        cfg.cgan.epochs = exc_epochs;
        cfg.seed = seed;
        if (exc_smoke) {
            cfg.n_traj = 40;
            cfg.ddpg.episodes = 20;
            cfg.ddpg.model_samples = 50;
            cfg.m = 2;
            cfg.n_seeds = 1;
            cfg.cgan.epochs = 8;
            cfg.cgan.batch_size = 128;
            cfg.eval_episodes = 4;
            cfg.gpn.epochs = 20;
        }
        ContinuousExperimentReport rep = run_continuous_experiment(cfg);
        fs::create_directories(exc_out);
        write_text((fs::path(exc_out) / "report.json").string(), rep.to_json().dump(2));
        write_text((fs::path(exc_out) / "report.csv").string(), rep.to_csv());
        manifest.command = "experiment-continuous";
        manifest.config_hash =
            hash_hex(std::to_string(exc_traj) + std::to_string(exc_episodes) + std::to_string(seed));
        manifest.artifacts = {exc_out + "/report.json", exc_out + "/report.csv"};
        manifest.stage_seconds["total"] = timer.seconds();
        manifest.save(exc_out);
        std::cout << rep.to_csv();
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
