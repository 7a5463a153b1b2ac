#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "swarmsense/collective.hpp"
#include "swarmsense/energy.hpp"
#include "swarmsense/errors.hpp"
#include "swarmsense/forecast.hpp"
#include "swarmsense/metrics.hpp"
#include "swarmsense/plangen.hpp"
#include "swarmsense/rl.hpp"
#include "swarmsense/scenario.hpp"

namespace swarmsense {

struct WorldKnobs {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double alpha3 = 1.0;
    double accuracy_cap = 10.0;
    double beta = 0.25;          // agent behavior in plan selection
    int iterations = 40;         // collective learning iterations per period
    int plan_count = 64;         // L
    PlanGenOptions plan_options;
};

struct PeriodOutcome {
    int period = 1;
    MatI aggregate;   // summed selected occupancies
    MatD collected;   // truth the swarm actually gathered
    MatD predicted;   // field estimate the rewards were computed from
    double eff_hat = 0.0;   // reward-side efficiency (predicted field)
    double acc_hat = 0.0;   // reward-side accuracy (predicted field)
    double eff_true = 0.0;  // evaluation efficiency (true field)
    double acc_true = 0.0;  // evaluation accuracy (true field)
    std::vector<double> energy;
    std::vector<double> reward;
    std::vector<int> terminal;
    MatI target_after;  // target state once this period's pruning ran
};

// The discrete-event world one mission runs in. Drones only ever see
// forecasts of the sensing field; the true values of a period become
// visible (through the collected tensor) only after its plans execute.
// Stepping is single-threaded; all state mutation happens in
// execute_period.
class SimWorld {
  public:
    SimWorld(GridMap grid, TimeStructure time, DroneFleet fleet, SensingField field,
             WorldKnobs knobs, std::uint64_t master_seed)
        : grid_(std::move(grid)),
          time_(time),
          fleet_(std::move(fleet)),
          field_(std::move(field)),
          knobs_(knobs),
          seed_(master_seed),
          power_(fleet_.spec),
          forecaster_(static_cast<std::size_t>(grid_.cell_count()),
                      static_cast<std::size_t>(time_.slots_per_period)) {
        time_.validate();
        fleet_.validate(grid_);
        if (fleet_.count() > grid_.cell_count())
            throw InvalidInput("scenario: more drones than cells");
        reset(1);
    }

    const GridMap& grid() const { return grid_; }
    const TimeStructure& time() const { return time_; }
    const DroneFleet& fleet() const { return fleet_; }
    const SensingField& field() const { return field_; }
    const WorldKnobs& knobs() const { return knobs_; }
    const PowerProfile& power() const { return power_; }
    std::uint64_t master_seed() const { return seed_; }
    int drones() const { return fleet_.count(); }
    int episode() const { return episode_; }

    ObservationSpec obs_spec() const {
        return ObservationSpec{grid_.station_count(), grid_.cell_count(),
                               time_.slots_per_period};
    }

    void set_omega(MatD omega) { forecaster_.omega = std::move(omega); }
    const Forecaster& forecaster() const { return forecaster_; }

    // Fits the prediction coefficients against the training split of the
    // recorded field, treating those periods as past experience.
    void fit_omega_from_history(int train_periods) {
        if (train_periods < 2) return;  // keep the 0.5 default
        std::vector<MatD> hist(field_.required.begin(),
                               field_.required.begin() + train_periods);
        forecaster_.omega = fit_coefficients(hist, hist, time_.periods);
    }

    void reset(int episode) {
        episode_ = episode;
        station_.assign(static_cast<std::size_t>(drones()) + 1, 0);
        battery_.assign(static_cast<std::size_t>(drones()) + 1, 1.0);
        for (const Drone& d : fleet_.drones) station_[static_cast<std::size_t>(d.id)] = d.home_station;
        const auto n = static_cast<std::size_t>(grid_.cell_count());
        const auto s = static_cast<std::size_t>(time_.slots_per_period);
        own_prev_.assign(static_cast<std::size_t>(drones()) + 1, MatI(n, s, 0));
        others_prev_.assign(static_cast<std::size_t>(drones()) + 1, MatI(n, s, 0));
        target_ = make_initial_target(n, s);
        forecaster_.reset_history();
        for (MatD& m : field_.collected) m.fill(0.0);
    }

    int station_of(int drone) const { return station_[static_cast<std::size_t>(drone)]; }
    double battery_of(int drone) const { return battery_[static_cast<std::size_t>(drone)]; }
    const MatI& target() const { return target_; }
    const MatI& own_previous(int drone) const { return own_prev_[static_cast<std::size_t>(drone)]; }

    // Latest shared field estimate: what the swarm can know before the
    // next period flies (prediction over everything collected so far).
    MatD predicted_for_planning() const {
        return predict(forecaster_, static_cast<int>(forecaster_.history.size()), time_.periods);
    }

    std::vector<double> observation(int drone) const {
        return build_observation(obs_spec(), station_of(drone), battery_of(drone),
                                 own_prev_[static_cast<std::size_t>(drone)],
                                 others_prev_[static_cast<std::size_t>(drone)]);
    }

    // The drone's nine direction groups for a period, deterministic in
    // (master seed, episode, period, drone).
    std::vector<PlanGroup> plan_groups(int drone, int period) const {
        Rng rng(sub_seed(seed_, "plans", static_cast<std::uint64_t>(episode_),
                         static_cast<std::uint64_t>(period), static_cast<std::uint64_t>(drone)));
        return generate_all(grid_, fleet_.spec, time_, station_of(drone), knobs_.plan_count, rng,
                            knobs_.plan_options);
    }

    // Agents organize into the communication tree by proximity; drones
    // sit at their charging stations when the tree forms.
    TreeTopology tree() const {
        std::vector<int> ids;
        std::vector<std::pair<double, double>> pos;
        for (const Drone& d : fleet_.drones) {
            ids.push_back(d.id);
            const Station& st = grid_.station(station_of(d.id));
            pos.emplace_back(st.row * grid_.cell_size(), st.col * grid_.cell_size());
        }
        return build_tree(ids, pos);
    }

    PeriodOutcome execute_period(int period, const std::vector<Plan>& plans) {
        if (period < 1 || period > time_.periods)
            throw InvalidInput("execute_period: period out of range");
        if (static_cast<int>(plans.size()) != drones())
            throw InvalidInput("execute_period: one plan per drone required");

        const auto n = static_cast<std::size_t>(grid_.cell_count());
        const auto s = static_cast<std::size_t>(time_.slots_per_period);
        PeriodOutcome out;
        out.period = period;
        out.aggregate = MatI(n, s, 0);
        for (const Plan& p : plans) out.aggregate += p.occupancy;

        // A visited cell yields at most its requirement, however many
        // drones hover there.
        const MatD& truth = field_.required_at(period);
        MatD& collected = field_.collected_at(period);
        for (std::size_t i = 0; i < collected.size(); ++i)
            collected.data()[i] = out.aggregate.data()[i] > 0 ? truth.data()[i] : 0.0;
        out.collected = collected;

        forecaster_.record(collected);
        out.predicted =
            predict(forecaster_, static_cast<int>(forecaster_.history.size()), time_.periods);

        out.eff_hat = clamped_efficiency(out.aggregate, out.predicted);
        out.acc_hat = oversensing_accuracy(out.aggregate, out.predicted);
        out.eff_true = efficiency(collected, truth);
        out.acc_true = oversensing_accuracy(out.aggregate, truth);

        out.energy.resize(plans.size());
        out.reward.resize(plans.size());
        out.terminal.resize(plans.size());
        for (std::size_t u = 0; u < plans.size(); ++u) {
            out.energy[u] = plans[u].energy;
            out.reward[u] = knobs_.alpha1 * out.eff_hat + knobs_.alpha2 * out.acc_hat -
                            knobs_.alpha3 * plans[u].energy;
            out.terminal[u] = plans[u].terminal_station;
        }

        update_target(target_, out.predicted, collected, out.aggregate, drones(),
                      grid_.cell_count());
        out.target_after = target_;

        for (std::size_t u = 0; u < plans.size(); ++u) {
            const int id = static_cast<int>(u) + 1;
            station_[static_cast<std::size_t>(id)] = plans[u].terminal_station;
            battery_[static_cast<std::size_t>(id)] = 1.0 - plans[u].energy;
            own_prev_[static_cast<std::size_t>(id)] = plans[u].occupancy;
            MatI others = out.aggregate;
            others -= plans[u].occupancy;
            others_prev_[static_cast<std::size_t>(id)] = std::move(others);
        }
        return out;
    }

    // Efficiency against a field estimate, with multiple visits to one
    // cell-slot counting once.
    double clamped_efficiency(const MatI& aggregate, const MatD& field) const {
        const double total = field.sum();
        if (total <= 0.0) return 1.0;
        double got = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i)
            if (aggregate.data()[i] > 0) got += field.data()[i];
        return got / total;
    }

    // Accuracy with the aggregated-plan convention v = p * V, so
    // simultaneous visits over-count and get penalized as over-sensing.
    double oversensing_accuracy(const MatI& aggregate, const MatD& field) const {
        double sq = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i) {
            const double d = aggregate.data()[i] * field.data()[i] - field.data()[i];
            sq += d * d;
        }
        if (sq <= 0.0) return knobs_.accuracy_cap;
        return std::min(knobs_.accuracy_cap,
                        std::sqrt(static_cast<double>(field.size()) / sq));
    }

  private:
    GridMap grid_;
    TimeStructure time_;
    DroneFleet fleet_;
    SensingField field_;
    WorldKnobs knobs_;
    std::uint64_t seed_;
    PowerProfile power_;
    Forecaster forecaster_;

    int episode_ = 1;
    std::vector<int> station_;      // 1-based by drone id
    std::vector<double> battery_;   // 1-based by drone id
    std::vector<MatI> own_prev_;    // previous period selections
    std::vector<MatI> others_prev_;
    MatI target_;
};

}  // namespace swarmsense
