// Command-line front end: scenario materialization, experiment runs,
// training/evaluation from checkpoints, run comparison and plan export.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmsense/swarmsense.hpp"

namespace fs = std::filesystem;
using namespace swarmsense;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out = "out";
    std::string method;
    std::vector<std::uint64_t> seeds;
    int episodes = -1;
    double beta = -1.0;
    int iterations = -1;
    int plan_count = -1;
    int mobility = -1;
    double train_fraction = -1.0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
    cmd->add_option("-c,--config", o.config_path, "experiment config (JSON)")
        ->required(config_required);
    cmd->add_option("-o,--out", o.out, "output root directory");
    cmd->add_option("--method", o.method, "override: do-rl | greedy | epos | mappo");
    cmd->add_option("--seed", o.seeds, "override: master seed(s)");
    cmd->add_option("--episodes", o.episodes, "override: training episodes");
    cmd->add_option("--beta", o.beta, "override: agent behavior in [0,1]");
    cmd->add_option("--iterations", o.iterations, "override: collective learning iterations");
    cmd->add_option("--plans", o.plan_count, "override: plans per drone (L)");
    cmd->add_option("--mobility", o.mobility, "override: visited cells per plan (J)");
    cmd->add_option("--train-fraction", o.train_fraction, "override: training period fraction");
}

ExperimentConfig resolve(const CommonOpts& o) {
    ExperimentConfig cfg =
        o.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config_path);
    if (!o.method.empty()) cfg.method = o.method;
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    if (o.episodes >= 0) cfg.rl.episodes = o.episodes;
    if (o.beta >= 0.0) cfg.beta = o.beta;
    if (o.iterations >= 0) cfg.iterations = o.iterations;
    if (o.plan_count >= 0) cfg.plan_count = o.plan_count;
    if (o.mobility >= 0) cfg.mobility = o.mobility;
    if (o.train_fraction >= 0.0) cfg.train_fraction = o.train_fraction;
    cfg.validate();
    return cfg;
}

int cmd_scenario_gen(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve(o);
    const std::uint64_t seed = cfg.seeds.front();
    const GridMap grid = cfg.build_grid();
    const TimeStructure time = cfg.build_time();
    const SensingField field = cfg.build_field(grid, time, seed);
    fs::create_directories(o.out);
    export_traffic_csv(fs::path(o.out) / "traffic.csv", field);
    std::ofstream cj(fs::path(o.out) / "scenario.json", std::ios::binary);
    nlohmann::json j = cfg.to_json();
    j["config_hash"] = cfg.hash();
    cj << j.dump(2) << "\n";
    std::cout << "scenario written to " << o.out << " (hash " << cfg.hash() << ")\n";
    return 0;
}

int cmd_run(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve(o);
    const fs::path dir = run_experiment(cfg, o.out);
    std::cout << "run complete: " << dir.string() << "\n";
    return 0;
}

int cmd_train(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve(o);
    if (cfg.method != "do-rl" && cfg.method != "mappo")
        throw InvalidInput("train: method '" + cfg.method + "' does not train");
    for (std::uint64_t seed : cfg.seeds) {
        const fs::path dir = fs::path(o.out) / cfg.hash() / std::to_string(seed);
        fs::create_directories(dir);
        SimWorld world = cfg.build_world(seed);
        world.fit_omega_from_history(cfg.train_periods());
        if (cfg.method == "do-rl") {
            TrainResult tr = train_dorl(world, cfg.rl, cfg.train_periods());
            write_train_log(dir / "train_log.csv", tr.log, cfg.hash());
            save_checkpoint(dir / "checkpoint.json", tr.policies, cfg.method, cfg.hash());
        } else {
            MappoTrainResult tr = train_mappo(world, cfg.rl, cfg.train_periods());
            write_train_log(dir / "train_log.csv", tr.log, cfg.hash());
            save_checkpoint(dir / "checkpoint.json", tr.policies, cfg.method, cfg.hash());
        }
        std::cout << "checkpoint: " << (dir / "checkpoint.json").string() << "\n";
    }
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& checkpoint) {
    const ExperimentConfig cfg = resolve(o);
    std::string method;
    std::vector<PolicyPair> policies = load_checkpoint(checkpoint, &method);
    if (method != cfg.method)
        throw InvalidInput("eval: checkpoint was trained with method '" + method + "'");
    for (std::uint64_t seed : cfg.seeds) {
        const fs::path dir = fs::path(o.out) / cfg.hash() / std::to_string(seed);
        fs::create_directories(dir);
        SimWorld world = cfg.build_world(seed);
        world.fit_omega_from_history(cfg.train_periods());
        std::unique_ptr<Coordinator> coord;
        if (cfg.method == "do-rl")
            coord = std::make_unique<DoRlCoordinator>(&policies);
        else if (cfg.method == "mappo")
            coord = std::make_unique<MappoCoordinator>(&policies);
        else
            throw InvalidInput("eval: method '" + cfg.method + "' has no checkpoint to evaluate");
        const MissionLog log = run_mission(world, *coord, 0, cfg.scenario.periods);
        write_mission_outputs(dir, cfg, seed, world, log);
        std::cout << "evaluated seed " << seed << " into " << dir.string() << "\n";
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out, bool force) {
    std::vector<fs::path> paths(dirs.begin(), dirs.end());
    compare_runs(paths, out, force);
    std::cout << "comparison written to " << out << "\n";
    return 0;
}

int cmd_plans_export(const CommonOpts& o) {
    const ExperimentConfig cfg = resolve(o);
    const std::uint64_t seed = cfg.seeds.front();
    SimWorld world = cfg.build_world(seed);
    std::vector<std::vector<PlanGroup>> per_drone;
    for (int u = 1; u <= world.drones(); ++u) per_drone.push_back(world.plan_groups(u, 1));
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / "plans.csv";
    export_plans_csv(path, per_drone);
    std::cout << "plans written to " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drone-swarm spatio-temporal sensing simulator and coordination harness"};
    app.require_subcommand(1);

    CommonOpts scen_o, run_o, train_o, eval_o, plans_o;
    std::string checkpoint;
    std::vector<std::string> compare_dirs;
    std::string compare_out = "comparison.csv";
    bool compare_force = false;

    CLI::App* scenario = app.add_subcommand("scenario", "scenario utilities");
    scenario->require_subcommand(1);
    CLI::App* gen = scenario->add_subcommand("gen", "materialize traffic CSV + scenario config");
    add_common(gen, scen_o);

    CLI::App* run = app.add_subcommand("run", "full experiment: build, train if needed, evaluate");
    add_common(run, run_o);

    CLI::App* train = app.add_subcommand("train", "train only; writes checkpoint and training log");
    add_common(train, train_o);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the configured scenario");
    add_common(eval, eval_o);
    eval->add_option("--checkpoint", checkpoint, "checkpoint.json to evaluate")->required();

    CLI::App* compare = app.add_subcommand("compare", "join completed runs into one table");
    compare->add_option("dirs", compare_dirs, "run directories (out/<hash>)")
        ->required()
        ->expected(2, -1);
    compare->add_option("-o,--out", compare_out, "comparison CSV path");
    compare->add_flag("--force", compare_force, "join runs even if scenarios differ");

    CLI::App* plans = app.add_subcommand("plans", "plan utilities");
    plans->require_subcommand(1);
    CLI::App* pexport = plans->add_subcommand("export", "export generated plans as CSV");
    add_common(pexport, plans_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_scenario_gen(scen_o);
        if (run->parsed()) return cmd_run(run_o);
        if (train->parsed()) return cmd_train(train_o);
        if (eval->parsed()) return cmd_eval(eval_o, checkpoint);
        if (compare->parsed()) return cmd_compare(compare_dirs, compare_out, compare_force);
        if (pexport->parsed()) return cmd_plans_export(plans_o);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
