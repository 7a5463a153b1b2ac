#pragma once

#include <cstdint>
#include <vector>

#include "swarmsense/coordinators.hpp"
#include "swarmsense/dorl.hpp"
#include "swarmsense/rl.hpp"
#include "swarmsense/simworld.hpp"

namespace swarmsense {

// Timeslot-level PPO baseline: at every slot each drone moves to an
// adjacent cell (eight directions) or hovers to sense, and must reach
// the nearest charging station within the period's slot budget. The
// PPO machinery is reused unchanged at S times the decision frequency.

struct MappoObsSpec {
    int cells = 0;
    int slots = 0;
    int dim() const { return cells + 1 + 2 * cells * slots; }
};

namespace mappo_detail {

inline std::vector<double> build_obs(const MappoObsSpec& spec, int cell, double battery,
                                     const MatI& own, const MatI& shared) {
    std::vector<double> o;
    o.reserve(static_cast<std::size_t>(spec.dim()));
    for (int n = 1; n <= spec.cells; ++n) o.push_back(n == cell ? 1.0 : 0.0);
    o.push_back(battery);
    for (int v : own.data()) o.push_back(static_cast<double>(v));
    for (std::size_t i = 0; i < shared.size(); ++i)
        o.push_back(static_cast<double>(shared.data()[i] - own.data()[i]));
    return o;
}

struct DroneSlotState {
    int cell = 1;
    double fly_s = 0.0;
    double hover_s = 0.0;
    MatI occupancy;
    bool returned = false;
    bool violation = false;  // battery-forced early return
    int terminal_station = 1;
    std::vector<double> slot_cost;  // battery fraction spent per slot
};

struct PeriodRollout {
    std::vector<Plan> plans;
    std::vector<DroneSlotState> drones;
    // Training bookkeeping: observation and action per (slot, drone).
    std::vector<std::vector<std::vector<double>>> obs;  // [slot][drone]
    std::vector<std::vector<int>> actions;              // [slot][drone]
    std::vector<std::vector<char>> decided;             // [slot][drone], 0 once parked
};

// Runs one period slot by slot. Drones keep moving only while the
// return leg to the nearest station still fits in the remaining slots
// and the remaining battery; a battery-forced return is flagged as a
// violation. A move clamped at the grid boundary degrades to loitering
// in place (hover power, no sensing).
inline PeriodRollout rollout_period(const SimWorld& world, std::vector<PolicyPair>& policies,
                                    int episode, int period, bool explore, bool record) {
    const GridMap& grid = world.grid();
    const TimeStructure& time = world.time();
    const DroneSpec& spec = world.fleet().spec;
    const PowerProfile& power = world.power();
    const int agents = world.drones();
    const int slots = time.slots_per_period;
    const MappoObsSpec ospec{grid.cell_count(), slots};

    auto return_slots = [&](int cell) {
        const int st = grid.nearest_station(cell);
        return detail::travel_slots(grid.cell_distance(cell, grid.station_cell(st)), spec, time);
    };

    PeriodRollout r;
    r.drones.resize(static_cast<std::size_t>(agents));
    for (int u = 1; u <= agents; ++u) {
        DroneSlotState& d = r.drones[static_cast<std::size_t>(u - 1)];
        d.cell = grid.station_cell(world.station_of(u));
        d.terminal_station = world.station_of(u);
        d.occupancy = MatI(static_cast<std::size_t>(grid.cell_count()),
                           static_cast<std::size_t>(slots), 0);
        d.slot_cost.assign(static_cast<std::size_t>(slots), 0.0);
    }
    MatI shared(static_cast<std::size_t>(grid.cell_count()), static_cast<std::size_t>(slots), 0);

    auto start_return = [&](DroneSlotState& d, int slot) {
        d.terminal_station = grid.nearest_station(d.cell);
        const int ret = return_slots(d.cell);
        if (ret > 0) {
            d.fly_s += ret * time.slot_duration_s;
            const double before =
                power.energy(d.fly_s - ret * time.slot_duration_s, d.hover_s);
            d.slot_cost[static_cast<std::size_t>(std::min(slot, slots - 1))] +=
                power.energy(d.fly_s, d.hover_s) - before;
        }
        d.returned = true;
    };

    if (record) {
        r.obs.resize(static_cast<std::size_t>(slots));
        r.actions.assign(static_cast<std::size_t>(slots),
                         std::vector<int>(static_cast<std::size_t>(agents), 0));
        r.decided.assign(static_cast<std::size_t>(slots),
                         std::vector<char>(static_cast<std::size_t>(agents), 1));
    }

    for (int s = 0; s < slots; ++s) {
        if (record) r.obs[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(agents));
        for (int u = 1; u <= agents; ++u) {
            DroneSlotState& d = r.drones[static_cast<std::size_t>(u - 1)];
            if (d.returned) {
                if (record) {
                    r.obs[static_cast<std::size_t>(s)][static_cast<std::size_t>(u - 1)] =
                        build_obs(ospec, d.cell, 1.0 - power.energy(d.fly_s, d.hover_s),
                                  d.occupancy, shared);
                    r.decided[static_cast<std::size_t>(s)][static_cast<std::size_t>(u - 1)] = 0;
                }
                continue;
            }
            const double battery = 1.0 - power.energy(d.fly_s, d.hover_s);
            const std::vector<double> obs =
                build_obs(ospec, d.cell, battery, d.occupancy, shared);
            Rng arng(sub_seed(world.master_seed(), "mappo-act",
                              static_cast<std::uint64_t>(episode),
                              static_cast<std::uint64_t>(period) * 1000 +
                                  static_cast<std::uint64_t>(s),
                              static_cast<std::uint64_t>(u)));
            const int a =
                act(policies[static_cast<std::size_t>(u - 1)].actor, obs, explore, arng);
            if (record) {
                r.obs[static_cast<std::size_t>(s)][static_cast<std::size_t>(u - 1)] = obs;
                r.actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(u - 1)] = a;
            }

            // Resolve the action: hover senses in place, moves go one
            // cell and clamp at the boundary.
            int new_cell = d.cell;
            bool senses = a == 0;
            if (a != 0) {
                const auto delta = action_delta(static_cast<Action>(a));
                const int row = std::clamp(grid.row_of(d.cell) + delta[0], 0, grid.rows() - 1);
                const int col = std::clamp(grid.col_of(d.cell) + delta[1], 0, grid.cols() - 1);
                new_cell = grid.cell_of(row, col);
            }
            const bool moves = new_cell != d.cell;
            const double dfly = moves ? time.slot_duration_s : 0.0;
            const double dhover = moves ? 0.0 : time.slot_duration_s;

            const bool time_ok = s + 1 + return_slots(new_cell) <= slots;
            const double energy_after =
                power.energy(d.fly_s + dfly + return_slots(new_cell) * time.slot_duration_s,
                             d.hover_s + dhover);
            const bool energy_ok = energy_after <= 1.0;
            if (!time_ok || !energy_ok) {
                if (!energy_ok) d.violation = true;
                start_return(d, s);
                continue;
            }

            const double before = power.energy(d.fly_s, d.hover_s);
            d.fly_s += dfly;
            d.hover_s += dhover;
            d.slot_cost[static_cast<std::size_t>(s)] =
                power.energy(d.fly_s, d.hover_s) - before;
            if (senses && moves == false) {
                d.occupancy(static_cast<std::size_t>(d.cell - 1), static_cast<std::size_t>(s)) = 1;
                shared(static_cast<std::size_t>(d.cell - 1), static_cast<std::size_t>(s)) += 1;
            }
            d.cell = new_cell;
        }
    }
    for (DroneSlotState& d : r.drones)
        if (!d.returned) start_return(d, slots - 1);

    r.plans.reserve(static_cast<std::size_t>(agents));
    for (DroneSlotState& d : r.drones) {
        Plan p;
        p.occupancy = d.occupancy;
        for (std::size_t sl = 0; sl < p.occupancy.cols(); ++sl)
            for (std::size_t n = 0; n < p.occupancy.rows(); ++n)
                if (p.occupancy(n, sl) != 0) p.visited.push_back(static_cast<int>(n) + 1);
        p.fly_time_s = d.fly_s;
        p.hover_time_s = d.hover_s;
        p.energy = power.energy(d.fly_s, d.hover_s);
        p.terminal_station = d.terminal_station;
        r.plans.push_back(std::move(p));
    }
    return r;
}

}  // namespace mappo_detail

struct MappoTrainResult {
    std::vector<PolicyPair> policies;
    std::vector<TrainLogRow> log;
    std::uint64_t skipped_ratios = 0;
    std::uint64_t battery_violations = 0;
};

// Slot-level training loop. Slot rewards become available once the
// period has executed (the field estimate needs the period's collected
// data), so each period's transitions are finalized retroactively with
// the period's efficiency/accuracy terms and the slot's own energy
// cost. Transitions chain across periods; only the episode's last slot
// is terminal.
inline MappoTrainResult train_mappo(SimWorld& world, const TrainConfig& cfg, int train_periods) {
    if (cfg.episodes < 1) throw InvalidInput("train: episodes must be >= 1");
    const int agents = world.drones();
    const int slots = world.time().slots_per_period;
    const MappoObsSpec ospec{world.grid().cell_count(), slots};

    MappoTrainResult result;
    for (int u = 1; u <= agents; ++u) {
        Rng rng(sub_seed(world.master_seed(), "mappo-net-init", static_cast<std::uint64_t>(u)));
        result.policies.push_back(
            PolicyPair::make(ospec.dim(), kActionCount, cfg.hidden, cfg.hidden_layers, rng));
    }

    TransitionBuffer buffer(cfg.buffer_capacity);

    for (int ep = 1; ep <= cfg.episodes; ++ep) {
        world.reset(ep);
        double reward_sum = 0.0;
        std::vector<StepGroup> pending;  // previous period awaiting its successor obs

        for (int t = 1; t <= train_periods; ++t) {
            mappo_detail::PeriodRollout roll =
                mappo_detail::rollout_period(world, result.policies, ep, t, true, true);
            for (const auto& d : roll.drones)
                if (d.violation) ++result.battery_violations;

            const PeriodOutcome outcome = world.execute_period(t, roll.plans);

            // The new period's first observations close out the pending
            // transitions of the previous one.
            if (!pending.empty()) {
                for (StepGroup& g : pending) buffer.add(std::move(g));
                pending.clear();
            }

            const double base = world.knobs().alpha1 * outcome.eff_hat +
                                world.knobs().alpha2 * outcome.acc_hat;
            std::vector<StepGroup> groups(static_cast<std::size_t>(slots));
            for (int s = 0; s < slots; ++s) {
                StepGroup g(static_cast<std::size_t>(agents));
                for (int u = 0; u < agents; ++u) {
                    Transition& tr = g[static_cast<std::size_t>(u)];
                    tr.obs = std::move(roll.obs[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)]);
                    tr.action = roll.actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
                    tr.valid =
                        roll.decided[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] != 0;
                    tr.reward =
                        base - world.knobs().alpha3 *
                                   roll.drones[static_cast<std::size_t>(u)]
                                       .slot_cost[static_cast<std::size_t>(s)];
                    reward_sum += tr.reward;
                    if (s + 1 < slots) {
                        tr.next_obs = roll.obs[static_cast<std::size_t>(s + 1)][static_cast<std::size_t>(u)];
                    } else {
                        // Post-period state; replaced by the next period's
                        // first observation unless the episode ends here.
                        const auto& d = roll.drones[static_cast<std::size_t>(u)];
                        MatI shared_final = outcome.aggregate;
                        tr.next_obs = mappo_detail::build_obs(
                            ospec, world.grid().station_cell(d.terminal_station),
                            1.0 - roll.plans[static_cast<std::size_t>(u)].energy, d.occupancy,
                            shared_final);
                        tr.terminal = t == train_periods;
                    }
                }
                groups[static_cast<std::size_t>(s)] = std::move(g);
            }
            // The last slot of a non-final period bridges to the next
            // period; hold it back until that observation exists.
            if (t < train_periods) {
                pending.push_back(std::move(groups.back()));
                groups.pop_back();
            }
            for (StepGroup& g : groups) buffer.add(std::move(g));
        }
        for (StepGroup& g : pending) buffer.add(std::move(g));

        TrainLogRow row;
        row.episode = ep;
        row.mean_reward = reward_sum / (static_cast<double>(agents) * slots * train_periods);
        Rng srng(sub_seed(world.master_seed(), "mappo-sample", static_cast<std::uint64_t>(ep)));
        const std::vector<std::size_t> picks =
            buffer.sample(static_cast<std::size_t>(cfg.minibatch), srng);
        detail::update_round(result.policies, buffer, picks, cfg, row, result.skipped_ratios);
        result.log.push_back(row);
    }
    return result;
}

class MappoCoordinator : public Coordinator {
  public:
    explicit MappoCoordinator(std::vector<PolicyPair>* policies) : policies_(policies) {}

    const char* name() const override { return "mappo"; }

    PeriodPlans plan_period(SimWorld& world, int period) override {
        mappo_detail::PeriodRollout roll = mappo_detail::rollout_period(
            world, *policies_, world.episode(), period, false, false);
        PeriodPlans out;
        out.plans = std::move(roll.plans);
        return out;
    }

  private:
    std::vector<PolicyPair>* policies_;
};

}  // namespace swarmsense
