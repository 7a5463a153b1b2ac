#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmsense/dorl.hpp"
#include "swarmsense/errors.hpp"
#include "swarmsense/rng.hpp"
#include "swarmsense/scenario.hpp"
#include "swarmsense/simworld.hpp"

namespace swarmsense {

// Experiment configuration: one JSON document resolves to a scenario, a
// method and all knobs. Defaults reproduce the basic 8x8 scenario with
// 16 drones. The canonical dump (sorted keys) feeds a stable hash that
// every output file carries for provenance.

struct TrafficConfig {
    std::string kind = "synthetic";  // synthetic | csv
    std::vector<Hotspot> hotspots;
    double noise_amplitude = 0.1;
    std::string csv_path;
};

struct ScenarioConfig {
    int rows = 8;
    int cols = 8;
    double cell_size_m = 200.0;
    std::vector<std::array<int, 2>> stations = {{2, 2}, {2, 6}, {6, 2}, {6, 6}};  // 1-based
    int periods = 8;
    int slots_per_period = 30;
    double slot_duration_s = 60.0;
    TrafficConfig traffic;
};

struct FleetConfig {
    int count = 16;
    std::string profile = "dji-phantom4pro";
    nlohmann::json overrides = nlohmann::json::object();
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    FleetConfig fleet;
    std::string method = "do-rl";  // do-rl | greedy | epos | mappo
    double beta = 0.25;
    int iterations = 40;
    int plan_count = 64;
    int mobility = 2;
    bool origin_hover = true;
    double alpha1 = 1.0, alpha2 = 1.0, alpha3 = 1.0;
    double accuracy_cap = 10.0;
    TrainConfig rl;
    double train_fraction = 0.8;
    std::vector<std::uint64_t> seeds = {42};

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);

    std::string hash() const;
    // Hash over everything that defines the experiment's world (not the
    // method or seeds); comparisons across methods require equal keys.
    std::string scenario_key() const;

    GridMap build_grid() const;
    TimeStructure build_time() const;
    DroneFleet build_fleet() const;
    SensingField build_field(const GridMap& grid, const TimeStructure& time,
                             std::uint64_t seed) const;
    SimWorld build_world(std::uint64_t seed) const;

    int train_periods() const {
        const int t = static_cast<int>(std::lround(train_fraction * scenario.periods));
        return std::clamp(t, 1, scenario.periods);
    }
};

inline std::string hash_hex(std::string_view s) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(s)));
    return std::string(buf);
}

namespace cfg_detail {

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline DroneSpec resolve_spec(const FleetConfig& fc) {
    DroneSpec spec;
    if (fc.profile == "dji-phantom4pro") {
        spec = DroneSpec::dji_phantom4pro();
    } else {
        throw InvalidInput("unknown drone profile '" + fc.profile + "'");
    }
    const nlohmann::json& o = fc.overrides;
    get_if(o, "body_mass_kg", spec.body_mass_kg);
    get_if(o, "battery_mass_kg", spec.battery_mass_kg);
    get_if(o, "rotor_count", spec.rotor_count);
    get_if(o, "rotor_diameter_m", spec.rotor_diameter_m);
    get_if(o, "power_efficiency", spec.power_efficiency);
    get_if(o, "ground_speed_mps", spec.ground_speed_mps);
    get_if(o, "air_density", spec.air_density);
    get_if(o, "gravity", spec.gravity);
    get_if(o, "battery_capacity_j", spec.battery_capacity_j);
    get_if(o, "drag_force_n", spec.drag_force_n);
    spec.validate();
    return spec;
}

}  // namespace cfg_detail

inline void ExperimentConfig::validate() const {
    if (method != "do-rl" && method != "greedy" && method != "epos" && method != "mappo")
        throw InvalidInput("config: unknown method '" + method + "'");
    if (scenario.rows < 1 || scenario.cols < 1) throw InvalidInput("config: bad grid size");
    if (scenario.stations.empty()) throw InvalidInput("config: need at least one station");
    if (fleet.count < 1) throw InvalidInput("config: need at least one drone");
    if (fleet.count > scenario.rows * scenario.cols)
        throw InvalidInput("config: more drones than cells");
    if (beta < 0.0 || beta > 1.0) throw InvalidInput("config: beta must be in [0,1]");
    if (iterations < 1) throw InvalidInput("config: iterations must be >= 1");
    if (plan_count < 9) throw InvalidInput("config: plan count must be >= 9");
    if (mobility < 1) throw InvalidInput("config: mobility must be >= 1");
    if (train_fraction <= 0.0 || train_fraction > 1.0)
        throw InvalidInput("config: train_fraction must be in (0,1]");
    if (seeds.empty()) throw InvalidInput("config: need at least one seed");
    if (scenario.traffic.kind != "synthetic" && scenario.traffic.kind != "csv")
        throw InvalidInput("config: traffic kind must be synthetic or csv");
    if (scenario.traffic.kind == "csv" && scenario.traffic.csv_path.empty())
        throw InvalidInput("config: csv traffic needs csv_path");
    cfg_detail::resolve_spec(fleet);
    build_grid();
    build_time().validate();
}

inline nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    nlohmann::json sc;
    sc["rows"] = scenario.rows;
    sc["cols"] = scenario.cols;
    sc["cell_size_m"] = scenario.cell_size_m;
    sc["stations"] = scenario.stations;
    sc["periods"] = scenario.periods;
    sc["slots_per_period"] = scenario.slots_per_period;
    sc["slot_duration_s"] = scenario.slot_duration_s;
    nlohmann::json tr;
    tr["kind"] = scenario.traffic.kind;
    tr["noise_amplitude"] = scenario.traffic.noise_amplitude;
    tr["csv_path"] = scenario.traffic.csv_path;
    nlohmann::json hs = nlohmann::json::array();
    for (const Hotspot& h : scenario.traffic.hotspots)
        hs.push_back({{"center_cell", h.center_cell},
                      {"peak", h.peak},
                      {"spread_m", h.spread_m},
                      {"profile", to_string(h.profile)}});
    tr["hotspots"] = hs;
    sc["traffic"] = tr;
    j["scenario"] = sc;
    j["fleet"] = {{"count", fleet.count}, {"profile", fleet.profile}, {"overrides", fleet.overrides}};
    j["method"] = method;
    j["selection"] = {{"beta", beta}, {"iterations", iterations}};
    j["plans"] = {{"count", plan_count}, {"mobility", mobility}, {"origin_hover", origin_hover}};
    j["weights"] = {{"alpha1", alpha1}, {"alpha2", alpha2}, {"alpha3", alpha3}};
    j["accuracy_cap"] = accuracy_cap;
    j["rl"] = {{"episodes", rl.episodes},
               {"minibatch", rl.minibatch},
               {"gamma", rl.gamma},
               {"clip", rl.clip},
               {"hidden", rl.hidden},
               {"hidden_layers", rl.hidden_layers},
               {"actor_lr", rl.actor_lr},
               {"critic_lr", rl.critic_lr},
               {"update_epochs", rl.update_epochs},
               {"buffer_capacity", rl.buffer_capacity}};
    j["train_fraction"] = train_fraction;
    j["seeds"] = seeds;
    return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.contains("scenario")) {
        const auto& sc = j.at("scenario");
        cfg_detail::get_if(sc, "rows", c.scenario.rows);
        cfg_detail::get_if(sc, "cols", c.scenario.cols);
        cfg_detail::get_if(sc, "cell_size_m", c.scenario.cell_size_m);
        cfg_detail::get_if(sc, "stations", c.scenario.stations);
        cfg_detail::get_if(sc, "periods", c.scenario.periods);
        cfg_detail::get_if(sc, "slots_per_period", c.scenario.slots_per_period);
        cfg_detail::get_if(sc, "slot_duration_s", c.scenario.slot_duration_s);
        if (sc.contains("traffic")) {
            const auto& tr = sc.at("traffic");
            cfg_detail::get_if(tr, "kind", c.scenario.traffic.kind);
            cfg_detail::get_if(tr, "noise_amplitude", c.scenario.traffic.noise_amplitude);
            cfg_detail::get_if(tr, "csv_path", c.scenario.traffic.csv_path);
            if (tr.contains("hotspots")) {
                c.scenario.traffic.hotspots.clear();
                for (const auto& hj : tr.at("hotspots")) {
                    Hotspot h;
                    cfg_detail::get_if(hj, "center_cell", h.center_cell);
                    cfg_detail::get_if(hj, "peak", h.peak);
                    cfg_detail::get_if(hj, "spread_m", h.spread_m);
                    std::string prof = to_string(h.profile);
                    cfg_detail::get_if(hj, "profile", prof);
                    h.profile = temporal_profile_from_string(prof);
                    c.scenario.traffic.hotspots.push_back(h);
                }
            }
        }
    }
    if (j.contains("fleet")) {
        const auto& f = j.at("fleet");
        cfg_detail::get_if(f, "count", c.fleet.count);
        cfg_detail::get_if(f, "profile", c.fleet.profile);
        if (f.contains("overrides")) c.fleet.overrides = f.at("overrides");
    }
    cfg_detail::get_if(j, "method", c.method);
    if (j.contains("selection")) {
        cfg_detail::get_if(j.at("selection"), "beta", c.beta);
        cfg_detail::get_if(j.at("selection"), "iterations", c.iterations);
    }
    if (j.contains("plans")) {
        cfg_detail::get_if(j.at("plans"), "count", c.plan_count);
        cfg_detail::get_if(j.at("plans"), "mobility", c.mobility);
        cfg_detail::get_if(j.at("plans"), "origin_hover", c.origin_hover);
    }
    if (j.contains("weights")) {
        cfg_detail::get_if(j.at("weights"), "alpha1", c.alpha1);
        cfg_detail::get_if(j.at("weights"), "alpha2", c.alpha2);
        cfg_detail::get_if(j.at("weights"), "alpha3", c.alpha3);
    }
    cfg_detail::get_if(j, "accuracy_cap", c.accuracy_cap);
    if (j.contains("rl")) {
        const auto& r = j.at("rl");
        cfg_detail::get_if(r, "episodes", c.rl.episodes);
        cfg_detail::get_if(r, "minibatch", c.rl.minibatch);
        cfg_detail::get_if(r, "gamma", c.rl.gamma);
        cfg_detail::get_if(r, "clip", c.rl.clip);
        cfg_detail::get_if(r, "hidden", c.rl.hidden);
        cfg_detail::get_if(r, "hidden_layers", c.rl.hidden_layers);
        cfg_detail::get_if(r, "actor_lr", c.rl.actor_lr);
        cfg_detail::get_if(r, "critic_lr", c.rl.critic_lr);
        cfg_detail::get_if(r, "update_epochs", c.rl.update_epochs);
        cfg_detail::get_if(r, "buffer_capacity", c.rl.buffer_capacity);
    }
    cfg_detail::get_if(j, "train_fraction", c.train_fraction);
    cfg_detail::get_if(j, "seeds", c.seeds);
    return c;
}

inline ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    ExperimentConfig c = from_json(j);
    c.validate();
    return c;
}

inline std::string ExperimentConfig::hash() const { return hash_hex(to_json().dump()); }

inline std::string ExperimentConfig::scenario_key() const {
    nlohmann::json j = to_json();
    j.erase("method");
    j.erase("seeds");
    j.erase("rl");
    return hash_hex(j.dump());
}

inline GridMap ExperimentConfig::build_grid() const {
    std::vector<Station> stations;
    int id = 1;
    for (const auto& rc : scenario.stations) {
        if (rc[0] < 1 || rc[0] > scenario.rows || rc[1] < 1 || rc[1] > scenario.cols)
            throw InvalidInput("config: station (" + std::to_string(rc[0]) + "," +
                               std::to_string(rc[1]) + ") outside grid");
        stations.push_back({id++, rc[0] - 1, rc[1] - 1});
    }
    return GridMap(scenario.rows, scenario.cols, scenario.cell_size_m, std::move(stations));
}

inline TimeStructure ExperimentConfig::build_time() const {
    return TimeStructure{scenario.periods, scenario.slots_per_period, scenario.slot_duration_s};
}

inline DroneFleet ExperimentConfig::build_fleet() const {
    DroneFleet f;
    f.spec = cfg_detail::resolve_spec(fleet);
    const int stations = static_cast<int>(scenario.stations.size());
    for (int u = 1; u <= fleet.count; ++u)
        f.drones.push_back({u, (u - 1) % stations + 1});  // homes round-robin over stations
    return f;
}

inline SensingField ExperimentConfig::build_field(const GridMap& grid, const TimeStructure& time,
                                                  std::uint64_t seed) const {
    if (scenario.traffic.kind == "csv") return import_traffic_csv(scenario.traffic.csv_path, grid, time);
    return generate_synthetic_traffic(grid, time, scenario.traffic.hotspots,
                                      sub_seed(seed, "scenario"),
                                      scenario.traffic.noise_amplitude);
}

inline SimWorld ExperimentConfig::build_world(std::uint64_t seed) const {
    GridMap grid = build_grid();
    TimeStructure time = build_time();
    SensingField field = build_field(grid, time, seed);
    WorldKnobs knobs;
    knobs.alpha1 = alpha1;
    knobs.alpha2 = alpha2;
    knobs.alpha3 = alpha3;
    knobs.accuracy_cap = accuracy_cap;
    knobs.beta = beta;
    knobs.iterations = iterations;
    knobs.plan_count = plan_count;
    knobs.plan_options.mobility = mobility;
    knobs.plan_options.origin_hover = origin_hover;
    return SimWorld(std::move(grid), time, build_fleet(), std::move(field), knobs, seed);
}

}  // namespace swarmsense
