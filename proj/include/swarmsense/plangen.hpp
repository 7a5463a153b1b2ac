#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "swarmsense/csv.hpp"
#include "swarmsense/energy.hpp"
#include "swarmsense/errors.hpp"
#include "swarmsense/plan.hpp"
#include "swarmsense/rng.hpp"
#include "swarmsense/scenario.hpp"

namespace swarmsense {

struct PlanGenOptions {
    int mobility = 2;          // |J|, visited cells per plan
    bool origin_hover = true;  // action-0 plans spend one sensing slot at the origin cell
    int max_attempts = 100;
};

// Cells in a rectangular corridor from the origin station along the
// direction vector. Corridor half-width is half the distance to the
// nearest other charging station (one cell on single-station grids);
// length is unbounded within the grid. A cell belongs to the corridor
// when its center projects strictly forward onto the direction and its
// perpendicular offset is within the half-width.
inline std::vector<int> search_range(const GridMap& grid, int origin_station, Action direction) {
    if (direction == Action::ReturnToOrigin)
        throw InvalidInput("search_range: direction 0 has no corridor");
    const Station& origin = grid.station(origin_station);

    double half_width = 0.5 * grid.nearest_other_station_distance(origin_station);
    if (half_width <= 0.0) half_width = grid.cell_size();

    const auto delta = action_delta(direction);
    const double norm = std::sqrt(static_cast<double>(delta[0] * delta[0] + delta[1] * delta[1]));
    const double ur = delta[0] / norm;
    const double uc = delta[1] / norm;

    constexpr double kEps = 1e-9;
    std::vector<int> cells;
    for (int n = 1; n <= grid.cell_count(); ++n) {
        const double dr = (grid.row_of(n) - origin.row) * grid.cell_size();
        const double dc = (grid.col_of(n) - origin.col) * grid.cell_size();
        const double along = dr * ur + dc * uc;
        if (along <= kEps) continue;
        const double pr = dr - along * ur;
        const double pc = dc - along * uc;
        if (std::sqrt(pr * pr + pc * pc) <= half_width + kEps) cells.push_back(n);
    }
    return cells;
}

namespace detail {

inline int travel_slots(double distance_m, const DroneSpec& spec, const TimeStructure& time) {
    if (distance_m <= 0.0) return 0;
    const double t = distance_m / spec.ground_speed_mps;
    return static_cast<int>(std::ceil(t / time.slot_duration_s - 1e-12));
}

struct Route {
    std::vector<int> order;
    int terminal_station = 1;
    double length_m = 0.0;
};

inline double route_length(const GridMap& grid, int origin_cell, const std::vector<int>& order,
                           int* terminal_out) {
    double len = 0.0;
    int prev = origin_cell;
    for (int c : order) {
        len += grid.cell_distance(prev, c);
        prev = c;
    }
    const int terminal = grid.nearest_station(prev);
    len += grid.cell_distance(prev, grid.station_cell(terminal));
    if (terminal_out) *terminal_out = terminal;
    return len;
}

// Shortest visit order over the sampled cells, ending at the nearest
// station to the last cell. Exhaustive for small sets; nearest-neighbor
// with 2-opt beyond that. Ties prefer the lexicographically smallest
// cell sequence so generation stays deterministic.
inline Route best_route(const GridMap& grid, int origin_cell, std::vector<int> cells) {
    std::sort(cells.begin(), cells.end());
    Route best;
    if (cells.size() <= 6) {
        bool first = true;
        std::vector<int> perm = cells;
        do {
            int terminal = 1;
            const double len = route_length(grid, origin_cell, perm, &terminal);
            if (first || len < best.length_m - 1e-9) {
                best = {perm, terminal, len};
                first = false;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }

    // Nearest-neighbor construction.
    std::vector<int> order;
    std::vector<int> remaining = cells;
    int cur = origin_cell;
    while (!remaining.empty()) {
        std::size_t pick = 0;
        double pick_d = grid.cell_distance(cur, remaining[0]);
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const double d = grid.cell_distance(cur, remaining[i]);
            if (d < pick_d - 1e-9) {
                pick = i;
                pick_d = d;
            }
        }
        order.push_back(remaining[pick]);
        cur = remaining[pick];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    // 2-opt until no improving swap.
    bool improved = true;
    int terminal = 1;
    double len = route_length(grid, origin_cell, order, &terminal);
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i),
                             order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                int term2 = 1;
                const double len2 = route_length(grid, origin_cell, order, &term2);
                if (len2 < len - 1e-9) {
                    len = len2;
                    terminal = term2;
                    improved = true;
                } else {
                    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i),
                                 order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                }
            }
        }
    }
    return {order, terminal, len};
}

inline Plan origin_hover_plan(const GridMap& grid, const PowerProfile& power,
                              const TimeStructure& time, int origin_station, Action direction,
                              const PlanGenOptions& opts) {
    Plan p;
    p.direction = direction;
    p.terminal_station = origin_station;
    p.occupancy = MatI(static_cast<std::size_t>(grid.cell_count()),
                       static_cast<std::size_t>(time.slots_per_period), 0);
    if (opts.origin_hover) {
        p.occupancy(static_cast<std::size_t>(grid.station_cell(origin_station) - 1), 0) = 1;
        p.hover_time_s = time.slot_duration_s;
    }
    p.energy = power.energy(p.fly_time_s, p.hover_time_s);
    return p;
}

}  // namespace detail

// Generates one plan: sample |J| distinct cells from the corridor,
// order them by shortest total route (origin -> cells -> nearest
// station to the last cell), lay the route out on the slot grid with
// travel legs rounded up to whole slots and one hover slot per visited
// cell. Samples that run over the period or the battery are rejected
// and redrawn.
inline Plan generate_plan(const GridMap& grid, const DroneSpec& spec, const PowerProfile& power,
                          const TimeStructure& time, int origin_station, Action direction,
                          Rng& rng, const PlanGenOptions& opts) {
    if (direction == Action::ReturnToOrigin)
        return detail::origin_hover_plan(grid, power, time, origin_station, direction, opts);

    const std::vector<int> range = search_range(grid, origin_station, direction);
    if (range.empty()) {
        // Station on the grid edge facing outward: nothing to visit in
        // this direction, degrade to staying at the origin.
        return detail::origin_hover_plan(grid, power, time, origin_station, direction, opts);
    }

    const int origin_cell = grid.station_cell(origin_station);
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(opts.mobility), range.size());

    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        const auto picks = rng.sample_without_replacement(range.size(), take);
        std::vector<int> cells;
        cells.reserve(picks.size());
        for (std::size_t i : picks) cells.push_back(range[i]);

        const detail::Route route = detail::best_route(grid, origin_cell, cells);

        Plan p;
        p.direction = direction;
        p.search_range = range;
        p.visited = route.order;
        p.terminal_station = route.terminal_station;
        p.occupancy = MatI(static_cast<std::size_t>(grid.cell_count()),
                           static_cast<std::size_t>(time.slots_per_period), 0);

        int cursor = 0;
        int travel_total = 0;
        int prev = origin_cell;
        bool feasible = true;
        for (int c : route.order) {
            const int legs = detail::travel_slots(grid.cell_distance(prev, c), spec, time);
            cursor += legs;
            travel_total += legs;
            if (cursor >= time.slots_per_period) {
                feasible = false;
                break;
            }
            p.occupancy(static_cast<std::size_t>(c - 1), static_cast<std::size_t>(cursor)) = 1;
            ++cursor;
            prev = c;
        }
        if (feasible) {
            const int ret = detail::travel_slots(
                grid.cell_distance(prev, grid.station_cell(route.terminal_station)), spec, time);
            cursor += ret;
            travel_total += ret;
            feasible = cursor <= time.slots_per_period;
        }
        if (!feasible) continue;

        p.fly_time_s = travel_total * time.slot_duration_s;
        p.hover_time_s = static_cast<double>(route.order.size()) * time.slot_duration_s;
        p.energy = power.energy(p.fly_time_s, p.hover_time_s);
        if (p.energy > 1.0) continue;
        return p;
    }
    throw GenerationError("generate_plan: no feasible plan after " +
                          std::to_string(opts.max_attempts) +
                          " attempts (over-constrained scenario)");
}

// L plans split over the 9 direction groups: floor(L/9) each, remainder
// round-robin over directions 1..8. Plan indices are 1-based per group.
inline std::vector<PlanGroup> generate_all(const GridMap& grid, const DroneSpec& spec,
                                           const TimeStructure& time, int origin_station,
                                           int total_plans, Rng& rng,
                                           const PlanGenOptions& opts = {}) {
    if (total_plans < kActionCount)
        throw InvalidInput("generate_all: need at least 9 plans (one per direction)");
    const PowerProfile power(spec);

    std::array<int, kActionCount> sizes{};
    sizes.fill(total_plans / kActionCount);
    int remainder = total_plans % kActionCount;
    for (int d = 1; remainder > 0; d = d % 8 + 1, --remainder) sizes[static_cast<std::size_t>(d)]++;

    std::vector<PlanGroup> groups;
    groups.reserve(kActionCount);
    for (int a = 0; a < kActionCount; ++a) {
        PlanGroup g;
        g.direction = static_cast<Action>(a);
        for (int l = 1; l <= sizes[static_cast<std::size_t>(a)]; ++l) {
            Plan p = generate_plan(grid, spec, power, time, origin_station, g.direction, rng, opts);
            p.index = l;
            g.plans.push_back(std::move(p));
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

// Zero-occupancy plan for a drone that stays landed at a station.
inline Plan make_idle_plan(const GridMap& grid, const TimeStructure& time, int station) {
    Plan p;
    p.terminal_station = station;
    p.occupancy = MatI(static_cast<std::size_t>(grid.cell_count()),
                       static_cast<std::size_t>(time.slots_per_period), 0);
    return p;
}

// Moves a plan's final leg to a different terminal station, keeping the
// visited route and hover schedule. Returns false when the new return
// leg no longer fits the period or the battery.
inline bool reterminate_plan(Plan& p, const GridMap& grid, const DroneSpec& spec,
                             const PowerProfile& power, const TimeStructure& time,
                             int origin_station, int new_station) {
    const int origin_cell = grid.station_cell(origin_station);
    const int last_cell = p.visited.empty() ? origin_cell : p.visited.back();

    int travel = 0;
    int prev = origin_cell;
    int last_hover_end = 0;
    for (int c : p.visited) {
        travel += detail::travel_slots(grid.cell_distance(prev, c), spec, time);
        prev = c;
    }
    for (std::size_t s = 0; s < p.occupancy.cols(); ++s)
        for (std::size_t n = 0; n < p.occupancy.rows(); ++n)
            if (p.occupancy(n, s) != 0) last_hover_end = static_cast<int>(s) + 1;

    const int ret =
        detail::travel_slots(grid.cell_distance(last_cell, grid.station_cell(new_station)), spec, time);
    if (last_hover_end + ret > time.slots_per_period) return false;

    p.terminal_station = new_station;
    p.fly_time_s = (travel + ret) * time.slot_duration_s;
    p.energy = power.energy(p.fly_time_s, p.hover_time_s);
    return p.energy <= 1.0;
}

// Structural invariants every executed plan must satisfy; throws with a
// description of the first violation.
inline void validate_plan(const Plan& p, const GridMap& grid, const TimeStructure& time,
                          const PowerProfile& power) {
    if (p.occupancy.rows() != static_cast<std::size_t>(grid.cell_count()) ||
        p.occupancy.cols() != static_cast<std::size_t>(time.slots_per_period))
        throw InvalidInput("plan: occupancy shape mismatch");
    for (std::size_t s = 0; s < p.occupancy.cols(); ++s) {
        int ones = 0;
        for (std::size_t n = 0; n < p.occupancy.rows(); ++n) {
            const int v = p.occupancy(n, s);
            if (v != 0 && v != 1) throw InvalidInput("plan: occupancy entries must be 0/1");
            ones += v;
        }
        if (ones > 1) throw InvalidInput("plan: drone in two cells at one timeslot");
    }
    if (!p.search_range.empty())
        for (int c : p.visited)
            if (std::find(p.search_range.begin(), p.search_range.end(), c) ==
                p.search_range.end())
                throw InvalidInput("plan: visited cell outside search range");
    if (p.terminal_station < 1 || p.terminal_station > grid.station_count())
        throw InvalidInput("plan: bad terminal station");
    const double expect = power.energy(p.fly_time_s, p.hover_time_s);
    if (std::abs(p.energy - expect) > 1e-9 * std::max(1.0, expect))
        throw InvalidInput("plan: energy inconsistent with its fly/hover times");
    if (p.energy > 1.0) throw InvalidInput("plan: energy exceeds battery");
    if (p.fly_time_s + p.hover_time_s >
        time.slots_per_period * time.slot_duration_s + 1e-9)
        throw InvalidInput("plan: route does not fit the period");
}

inline const char* kPlanCsvHeader = "drone,direction,plan,energy,fly_s,hover_s,terminal,cell,slot";

// One row per nonzero occupancy entry, each carrying its plan's
// metadata columns.
inline void export_plans_csv(const std::filesystem::path& path,
                             const std::vector<std::vector<PlanGroup>>& per_drone_groups) {
    CsvWriter w(path);
    w.header(kPlanCsvHeader);
    for (std::size_t u = 0; u < per_drone_groups.size(); ++u) {
        for (const PlanGroup& g : per_drone_groups[u]) {
            for (const Plan& p : g.plans) {
                for (std::size_t n = 0; n < p.occupancy.rows(); ++n)
                    for (std::size_t s = 0; s < p.occupancy.cols(); ++s)
                        if (p.occupancy(n, s) != 0)
                            w.row(u + 1, static_cast<int>(g.direction), p.index, p.energy,
                                  p.fly_time_s, p.hover_time_s, p.terminal_station, n + 1, s + 1);
            }
        }
    }
}

}  // namespace swarmsense
