#pragma once

#include <memory>
#include <vector>

#include "swarmsense/collective.hpp"
#include "swarmsense/plangen.hpp"
#include "swarmsense/rl.hpp"
#include "swarmsense/simworld.hpp"

namespace swarmsense {

// Uniform seam between the experiment harness and the four methods:
// given the world's current state, produce one executed plan per drone
// for the period.

struct PeriodPlans {
    std::vector<Plan> plans;                // one per drone, id order
    std::vector<SelectionTraceRow> trace;   // filled by methods that run collective selection
};

class Coordinator {
  public:
    virtual ~Coordinator() = default;
    virtual const char* name() const = 0;
    virtual PeriodPlans plan_period(SimWorld& world, int period) = 0;
};

// Each drone flies alone to the reachable cell with the best predicted
// value per unit of round-trip distance, hovers one slot and lands at
// the nearest station. No coordination, no awareness of other drones.
class GreedyCoordinator : public Coordinator {
  public:
    const char* name() const override { return "greedy"; }

    PeriodPlans plan_period(SimWorld& world, int period) override {
        (void)period;
        const GridMap& grid = world.grid();
        const TimeStructure& time = world.time();
        const MatD predicted = world.predicted_for_planning();

        PeriodPlans out;
        for (int u = 1; u <= world.drones(); ++u) {
            const int origin_station = world.station_of(u);
            const int origin_cell = grid.station_cell(origin_station);

            int best_cell = -1;
            double best_score = 0.0;
            int best_arrival = 0, best_travel = 0, best_terminal = origin_station;
            for (int n = 1; n <= grid.cell_count(); ++n) {
                const int out_slots =
                    detail::travel_slots(grid.cell_distance(origin_cell, n), world.fleet().spec, time);
                const int terminal = grid.nearest_station(n);
                const int back_slots = detail::travel_slots(
                    grid.cell_distance(n, grid.station_cell(terminal)), world.fleet().spec, time);
                if (out_slots + 1 + back_slots > time.slots_per_period) continue;
                const double energy = world.power().energy(
                    (out_slots + back_slots) * time.slot_duration_s, time.slot_duration_s);
                if (energy > 1.0) continue;

                double value = 0.0;
                for (std::size_t s = 0; s < predicted.cols(); ++s)
                    value += predicted(static_cast<std::size_t>(n - 1), s);
                // cell_size in the denominator keeps the score finite when
                // a drone's own station cell is the best candidate.
                const double rt = grid.cell_distance(origin_cell, n) +
                                  grid.cell_distance(n, grid.station_cell(terminal));
                const double score = value / (rt + grid.cell_size());
                if (best_cell < 0 || score > best_score) {
                    best_cell = n;
                    best_score = score;
                    best_arrival = out_slots;
                    best_travel = out_slots + back_slots;
                    best_terminal = terminal;
                }
            }

            if (best_cell < 0) {
                out.plans.push_back(make_idle_plan(grid, time, origin_station));
                continue;
            }
            Plan p;
            p.visited = {best_cell};
            p.terminal_station = best_terminal;
            p.occupancy = MatI(static_cast<std::size_t>(grid.cell_count()),
                               static_cast<std::size_t>(time.slots_per_period), 0);
            p.occupancy(static_cast<std::size_t>(best_cell - 1),
                        static_cast<std::size_t>(best_arrival)) = 1;
            p.fly_time_s = best_travel * time.slot_duration_s;
            p.hover_time_s = time.slot_duration_s;
            p.energy = world.power().energy(p.fly_time_s, p.hover_time_s);
            out.plans.push_back(std::move(p));
        }
        return out;
    }
};

// Collective plan selection over each drone's full plan set, with the
// terminal station redrawn uniformly at random every period. Short-term
// coordination only; no learned direction policy.
class EposCoordinator : public Coordinator {
  public:
    const char* name() const override { return "epos"; }

    PeriodPlans plan_period(SimWorld& world, int period) override {
        const GridMap& grid = world.grid();
        const TimeStructure& time = world.time();

        std::vector<std::vector<Plan>> pools(static_cast<std::size_t>(world.drones()));
        for (int u = 1; u <= world.drones(); ++u) {
            Rng station_rng(sub_seed(world.master_seed(), "epos-station",
                                     static_cast<std::uint64_t>(world.episode()),
                                     static_cast<std::uint64_t>(period),
                                     static_cast<std::uint64_t>(u)));
            const int station =
                1 + static_cast<int>(station_rng.next_index(
                        static_cast<std::uint64_t>(grid.station_count())));

            const int origin = world.station_of(u);
            std::vector<Plan>& pool = pools[static_cast<std::size_t>(u - 1)];
            for (const PlanGroup& g : world.plan_groups(u, period)) {
                for (Plan p : g.plans) {
                    if (reterminate_plan(p, grid, world.fleet().spec, world.power(), time, origin,
                                         station))
                        pool.push_back(std::move(p));
                }
            }
            if (pool.empty()) pool.push_back(make_idle_plan(grid, time, world.station_of(u)));
        }

        std::vector<std::vector<const Plan*>> candidates(pools.size());
        for (std::size_t i = 0; i < pools.size(); ++i)
            for (const Plan& p : pools[i]) candidates[i].push_back(&p);

        const SelectionResult sel =
            run_collective_selection(world.tree(), candidates, world.target(),
                                     world.knobs().beta, world.knobs().iterations);

        PeriodPlans out;
        out.trace = sel.trace;
        for (int u = 1; u <= world.drones(); ++u)
            out.plans.push_back(
                pools[static_cast<std::size_t>(u - 1)]
                     [static_cast<std::size_t>(sel.selected[static_cast<std::size_t>(u - 1)])]);
        return out;
    }
};

// Trained period-level policies: every drone picks a flying direction
// from its own observation (argmax, no exploration), then the swarm
// refines plan choices through collective selection.
class DoRlCoordinator : public Coordinator {
  public:
    explicit DoRlCoordinator(const std::vector<PolicyPair>* policies) : policies_(policies) {}

    const char* name() const override { return "do-rl"; }

    PeriodPlans plan_period(SimWorld& world, int period) override {
        Rng unused(0);
        std::vector<std::vector<PlanGroup>> groups(static_cast<std::size_t>(world.drones()));
        std::vector<std::vector<const Plan*>> candidates(static_cast<std::size_t>(world.drones()));
        for (int u = 1; u <= world.drones(); ++u) {
            const std::vector<double> obs = world.observation(u);
            const int a =
                act((*policies_)[static_cast<std::size_t>(u - 1)].actor, obs, false, unused);
            groups[static_cast<std::size_t>(u - 1)] = world.plan_groups(u, period);
            for (const Plan& p :
                 groups[static_cast<std::size_t>(u - 1)][static_cast<std::size_t>(a)].plans)
                candidates[static_cast<std::size_t>(u - 1)].push_back(&p);
        }

        const SelectionResult sel =
            run_collective_selection(world.tree(), candidates, world.target(),
                                     world.knobs().beta, world.knobs().iterations);

        PeriodPlans out;
        out.trace = sel.trace;
        for (int u = 1; u <= world.drones(); ++u)
            out.plans.push_back(
                *candidates[static_cast<std::size_t>(u - 1)]
                           [static_cast<std::size_t>(sel.selected[static_cast<std::size_t>(u - 1)])]);
        return out;
    }

  private:
    const std::vector<PolicyPair>* policies_;
};

}  // namespace swarmsense
