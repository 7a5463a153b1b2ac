#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsense/config.hpp"
#include "swarmsense/coordinators.hpp"
#include "swarmsense/dorl.hpp"
#include "swarmsense/mappo.hpp"
#include "swarmsense/metrics.hpp"
#include "swarmsense/simworld.hpp"

namespace swarmsense {

// Experiment orchestration: builds worlds per seed, trains where the
// method learns, runs the evaluation mission over the full horizon and
// exports every log the analysis needs. Output layout is
// <out>/<config-hash>/<seed>/, so sweeps can run in parallel without
// collisions.

struct MissionLog {
    std::vector<PeriodOutcome> outcomes;
    std::vector<std::vector<SelectionTraceRow>> traces;  // one per period, may be empty
};

inline MissionLog run_mission(SimWorld& world, Coordinator& coord, int episode, int periods) {
    world.reset(episode);
    MissionLog log;
    const PowerProfile& power = world.power();
    for (int t = 1; t <= periods; ++t) {
        PeriodPlans pp = coord.plan_period(world, t);
        for (const Plan& p : pp.plans) validate_plan(p, world.grid(), world.time(), power);
        log.outcomes.push_back(world.execute_period(t, pp.plans));
        log.traces.push_back(std::move(pp.trace));
    }
    return log;
}

namespace harness_detail {

inline void write_hash_line(CsvWriter& w, const std::string& hash) {
    w.header("#config_hash=" + hash);
}

inline nlohmann::json mlp_to_json(const Mlp& net) {
    nlohmann::json j;
    j["input"] = net.input_dim();
    nlohmann::json shapes = nlohmann::json::array();
    for (const Mlp::Layer& l : net.layers()) shapes.push_back({{"in", l.in}, {"out", l.out}});
    j["layers"] = shapes;
    j["params"] = net.flatten();
    return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
    const auto& shapes = j.at("layers");
    if (shapes.empty()) throw ParseError("checkpoint: empty network");
    const int input = shapes.front().at("in").get<int>();
    const int output = shapes.back().at("out").get<int>();
    const int hidden_layers = static_cast<int>(shapes.size()) - 1;
    const int width = hidden_layers > 0 ? shapes.front().at("out").get<int>() : output;
    Mlp net(input, hidden_layers > 0 ? width : 1, hidden_layers, output);
    const std::vector<double> params = j.at("params").get<std::vector<double>>();
    net.unflatten(params);
    return net;
}

}  // namespace harness_detail

inline void save_checkpoint(const std::filesystem::path& path,
                            const std::vector<PolicyPair>& policies, const std::string& method,
                            const std::string& config_hash) {
    nlohmann::json j;
    j["version"] = 1;
    j["method"] = method;
    j["config_hash"] = config_hash;
    nlohmann::json agents = nlohmann::json::array();
    for (const PolicyPair& p : policies)
        agents.push_back({{"actor", harness_detail::mlp_to_json(p.actor)},
                          {"critic", harness_detail::mlp_to_json(p.critic)}});
    j["agents"] = agents;
    std::ofstream out(path, std::ios::binary);
    out << j.dump() << "\n";
}

inline std::vector<PolicyPair> load_checkpoint(const std::filesystem::path& path,
                                               std::string* method_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
    if (j.at("version").get<int>() != 1) throw ParseError("checkpoint: unsupported version");
    if (method_out) *method_out = j.at("method").get<std::string>();
    std::vector<PolicyPair> policies;
    for (const auto& a : j.at("agents")) {
        PolicyPair p;
        p.actor = harness_detail::mlp_from_json(a.at("actor"));
        p.critic = harness_detail::mlp_from_json(a.at("critic"));
        p.actor_old = p.actor;
        p.critic_target = p.critic;
        policies.push_back(std::move(p));
    }
    return policies;
}

inline void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& log,
                            const std::string& hash) {
    CsvWriter w(path);
    harness_detail::write_hash_line(w, hash);
    w.header(kTrainLogCsvHeader);
    for (const TrainLogRow& r : log)
        w.row(r.episode, r.mean_reward, r.critic_loss, r.actor_objective, r.clip_fraction);
}

inline const char* kEvalMetricsCsvHeader =
    "method,seed,period,heldout,eff,acc,mean_energy,mean_battery,overall";
inline const char* kAggregateCsvHeader = "period,cell,slot,count";

// Everything one evaluation mission leaves on disk.
inline void write_mission_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                  std::uint64_t seed, const SimWorld& world,
                                  const MissionLog& log) {
    namespace fs = std::filesystem;
    const std::string hash = cfg.hash();
    const int train_p = cfg.train_periods();

    {
        CsvWriter w(dir / "metrics.csv");
        harness_detail::write_hash_line(w, hash);
        w.header(kMetricsCsvHeader);
        for (const PeriodOutcome& o : log.outcomes)
            for (std::size_t u = 0; u < o.energy.size(); ++u)
                w.row(cfg.method, seed, o.period, u + 1, o.eff_hat, o.acc_hat, o.energy[u],
                      o.reward[u], 1.0 - o.energy[u]);
    }
    {
        CsvWriter w(dir / "eval_metrics.csv");
        harness_detail::write_hash_line(w, hash);
        w.header(kEvalMetricsCsvHeader);
        for (const PeriodOutcome& o : log.outcomes) {
            double mean_e = 0.0;
            for (double e : o.energy) mean_e += e;
            mean_e /= static_cast<double>(o.energy.size());
            const double score = overall(o.eff_true, o.acc_true, mean_e, cfg.alpha1, cfg.alpha2,
                                         cfg.alpha3);
            w.row(cfg.method, seed, o.period, o.period > train_p ? 1 : 0, o.eff_true, o.acc_true,
                  mean_e, 1.0 - mean_e, score);
        }
    }
    {
        std::vector<EpisodePlanRecord> records;
        for (const PeriodOutcome& o : log.outcomes)
            for (std::size_t u = 0; u < o.energy.size(); ++u)
                records.push_back({o.period, static_cast<int>(u) + 1,
                                   o.terminal[u], o.energy[u]});
        const ChargingReport rep =
            charging_report(records, world.grid().station_count(), world.drones(),
                            world.time().periods, world.fleet().spec.battery_capacity_j);
        CsvWriter w(dir / "stations.csv");
        harness_detail::write_hash_line(w, hash);
        w.header(kStationCsvHeader);
        for (const PeriodOutcome& o : log.outcomes)
            for (int m = 1; m <= world.grid().station_count(); ++m)
                w.row(cfg.method, seed, o.period,
                      m, rep.load_j(static_cast<std::size_t>(m - 1),
                                    static_cast<std::size_t>(o.period - 1)));
    }
    {
        CsvWriter w(dir / "forecast.csv");
        harness_detail::write_hash_line(w, hash);
        w.header(kForecastCsvHeader);
        for (const PeriodOutcome& o : log.outcomes) {
            const MatD& pred = o.predicted;
            const MatD& coll = o.collected;
            for (std::size_t n = 0; n < pred.rows(); ++n)
                for (std::size_t s = 0; s < pred.cols(); ++s)
                    w.row(o.period, n + 1, s + 1, pred(n, s), coll(n, s),
                          o.target_after(n, s));
        }
    }
    {
        CsvWriter w(dir / "aggregate.csv");
        harness_detail::write_hash_line(w, hash);
        w.header(kAggregateCsvHeader);
        for (const PeriodOutcome& o : log.outcomes)
            for (std::size_t n = 0; n < o.aggregate.rows(); ++n)
                for (std::size_t s = 0; s < o.aggregate.cols(); ++s)
                    if (o.aggregate(n, s) != 0) w.row(o.period, n + 1, s + 1, o.aggregate(n, s));
    }
    {
        const fs::path tdir = dir / "traces";
        fs::create_directories(tdir);
        for (std::size_t i = 0; i < log.traces.size(); ++i) {
            if (log.traces[i].empty()) continue;
            export_selection_trace(tdir / ("selection_trace_p" + std::to_string(i + 1) + ".csv"),
                                   log.traces[i]);
        }
    }
    export_traffic_csv(dir / "traffic.csv", world.field());
}

// One (config, seed) run end to end. Returns the run directory.
inline std::filesystem::path run_one(const ExperimentConfig& cfg, std::uint64_t seed,
                                     const std::filesystem::path& out_root) {
    namespace fs = std::filesystem;
    const fs::path dir = out_root / cfg.hash() / std::to_string(seed);
    fs::create_directories(dir);

    SimWorld world = cfg.build_world(seed);
    world.fit_omega_from_history(cfg.train_periods());

    std::unique_ptr<Coordinator> coord;
    std::vector<PolicyPair> policies;
    std::vector<PolicyPair> mappo_policies;

    if (cfg.method == "greedy") {
        coord = std::make_unique<GreedyCoordinator>();
    } else if (cfg.method == "epos") {
        coord = std::make_unique<EposCoordinator>();
    } else if (cfg.method == "do-rl") {
        TrainResult tr = train_dorl(world, cfg.rl, cfg.train_periods());
        policies = std::move(tr.policies);
        write_train_log(dir / "train_log.csv", tr.log, cfg.hash());
        save_checkpoint(dir / "checkpoint.json", policies, cfg.method, cfg.hash());
        coord = std::make_unique<DoRlCoordinator>(&policies);
    } else if (cfg.method == "mappo") {
        MappoTrainResult tr = train_mappo(world, cfg.rl, cfg.train_periods());
        mappo_policies = std::move(tr.policies);
        write_train_log(dir / "train_log.csv", tr.log, cfg.hash());
        save_checkpoint(dir / "checkpoint.json", mappo_policies, cfg.method, cfg.hash());
        {
            CsvWriter w(dir / "violations.csv");
            harness_detail::write_hash_line(w, cfg.hash());
            w.header("battery_violations");
            w.row(tr.battery_violations);
        }
        coord = std::make_unique<MappoCoordinator>(&mappo_policies);
    } else {
        throw InvalidInput("unknown method '" + cfg.method + "'");
    }

    // Evaluation mission over the full horizon; episode 0 keeps its
    // random streams distinct from the training episodes'.
    const MissionLog log = run_mission(world, *coord, 0, cfg.scenario.periods);
    write_mission_outputs(dir, cfg, seed, world, log);

    {
        std::ofstream cj(dir / "config.json", std::ios::binary);
        nlohmann::json j = cfg.to_json();
        j["config_hash"] = cfg.hash();
        j["scenario_key"] = cfg.scenario_key();
        j["seed"] = seed;
        cj << j.dump(2) << "\n";
    }
    return dir;
}

inline std::filesystem::path run_experiment(const ExperimentConfig& cfg,
                                            const std::filesystem::path& out_root) {
    cfg.validate();
    std::filesystem::path last;
    for (std::uint64_t seed : cfg.seeds) last = run_one(cfg, seed, out_root);
    return out_root / cfg.hash();
}

inline const char* kCompareCsvHeader =
    "method,config_hash,seeds,eff_mean,eff_std,acc_mean,acc_std,energy_mean,energy_std,"
    "battery_mean,battery_std,overall_mean,overall_std";

// Joins completed run directories (one per config) into a plot-ready
// mean +- std table, one row per directory. Directories must describe
// the same world (equal scenario keys) unless force is set.
inline void compare_runs(const std::vector<std::filesystem::path>& dirs,
                         const std::filesystem::path& out_path, bool force = false) {
    namespace fs = std::filesystem;
    if (dirs.size() < 2) throw InvalidInput("compare: need at least two run directories");

    CsvWriter w(out_path);
    w.header(kCompareCsvHeader);

    std::string expected_key;
    for (const fs::path& dir : dirs) {
        // Any seed subdirectory carries the run's config.
        std::vector<fs::path> seed_dirs;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_directory() && fs::exists(e.path() / "config.json"))
                seed_dirs.push_back(e.path());
        std::sort(seed_dirs.begin(), seed_dirs.end());
        if (seed_dirs.empty()) throw InvalidInput("compare: no completed runs in " + dir.string());

        nlohmann::json cj;
        {
            std::ifstream in(seed_dirs.front() / "config.json");
            in >> cj;
        }
        const std::string method = cj.at("method").get<std::string>();
        const std::string hash = cj.at("config_hash").get<std::string>();
        const std::string key = cj.at("scenario_key").get<std::string>();
        if (expected_key.empty()) expected_key = key;
        if (key != expected_key && !force)
            throw InvalidInput("compare: " + dir.string() +
                               " describes a different scenario (use force to join anyway)");

        // Per-seed mission means, then mean +- sample std across seeds.
        std::vector<double> eff, acc, energy, battery, score;
        for (const fs::path& sd : seed_dirs) {
            const CsvTable t = read_csv(sd / "eval_metrics.csv");
            const char* cols[] = {"eff", "acc", "mean_energy", "mean_battery", "overall"};
            int idx[5];
            for (int i = 0; i < 5; ++i) {
                idx[i] = t.column(cols[i]);
                if (idx[i] < 0)
                    throw InvalidInput("compare: " + (sd / "eval_metrics.csv").string() +
                                       " missing column '" + cols[i] + "'");
            }
            if (read_csv_hash(sd / "eval_metrics.csv") != hash)
                throw InvalidInput("compare: " + sd.string() +
                                   " holds outputs from a different config hash");
            double s[5] = {0, 0, 0, 0, 0};
            for (const auto& row : t.rows)
                for (int i = 0; i < 5; ++i)
                    s[i] += parse_double(row[static_cast<std::size_t>(idx[i])], 0, cols[i]);
            const double n = static_cast<double>(t.rows.size());
            eff.push_back(s[0] / n);
            acc.push_back(s[1] / n);
            energy.push_back(s[2] / n);
            battery.push_back(s[3] / n);
            score.push_back(s[4] / n);
        }

        auto mean_std = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double sq = 0.0;
            for (double x : v) sq += (x - m) * (x - m);
            const double sd = v.size() > 1 ? std::sqrt(sq / static_cast<double>(v.size() - 1)) : 0.0;
            return std::pair<double, double>(m, sd);
        };
        const auto [em, es] = mean_std(eff);
        const auto [am, as] = mean_std(acc);
        const auto [gm, gs] = mean_std(energy);
        const auto [bm, bs] = mean_std(battery);
        const auto [om, os] = mean_std(score);
        w.row(method, hash, seed_dirs.size(), em, es, am, as, gm, gs, bm, bs, om, os);
    }
}

}  // namespace swarmsense
