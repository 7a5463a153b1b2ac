#pragma once

#include <cmath>
#include <vector>

#include "swarmsense/errors.hpp"
#include "swarmsense/mat.hpp"

namespace swarmsense {

// Evaluation quantities: mission efficiency, sensing accuracy, overall
// performance and the charging-infrastructure view.

// Fraction of the required sensing value actually collected. A period
// with nothing required counts as trivially satisfied.
inline double efficiency(const MatD& collected, const MatD& required) {
    if (!collected.same_shape(required)) throw InvalidInput("efficiency: dimension mismatch");
    const double total = required.sum();
    if (total <= 0.0) return 1.0;
    return collected.sum() / total;
}

// Inverse-RMSE match between collected and required values:
// sqrt(N*S / sum (v - V)^2), capped. The cap bounds the otherwise
// unbounded value as the mismatch approaches zero; it is the one
// intervention on the formula and is disclosed wherever accuracy is
// reported.
inline double accuracy(const MatD& collected, const MatD& required, double cap = 10.0) {
    if (!collected.same_shape(required)) throw InvalidInput("accuracy: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < collected.size(); ++i) {
        const double d = collected.data()[i] - required.data()[i];
        sq += d * d;
    }
    if (sq <= 0.0) return cap;
    const double value = std::sqrt(static_cast<double>(collected.size()) / sq);
    return std::min(value, cap);
}

// Weighted per-drone period score; the harness sums it over drones and
// periods for the mission-level objective.
inline double overall(double eff, double acc, double energy, double alpha1 = 1.0,
                      double alpha2 = 1.0, double alpha3 = 1.0) {
    if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0)
        throw InvalidInput("overall: weights must be >= 0");
    return alpha1 * eff + alpha2 * acc - alpha3 * energy;
}

struct EpisodePlanRecord {
    int period = 1;
    int drone = 1;
    int terminal_station = 1;
    double energy = 0.0;  // battery fraction used by the period's plan
};

struct ChargingReport {
    MatD load_j;             // stations x periods, energy drawn per station
    MatD remaining_battery;  // drones x periods, 1 - plan energy
};

// Per-station energy demand and per-drone remaining battery over a
// completed episode. Load conservation holds by construction: summing
// a period's station loads gives exactly the fleet's energy draw.
inline ChargingReport charging_report(const std::vector<EpisodePlanRecord>& records, int stations,
                                      int drones, int periods, double battery_capacity_j) {
    ChargingReport r;
    r.load_j = MatD(static_cast<std::size_t>(stations), static_cast<std::size_t>(periods), 0.0);
    r.remaining_battery =
        MatD(static_cast<std::size_t>(drones), static_cast<std::size_t>(periods), 1.0);
    for (const EpisodePlanRecord& rec : records) {
        if (rec.terminal_station < 1 || rec.terminal_station > stations)
            throw InvalidInput("charging_report: unknown station");
        if (rec.drone < 1 || rec.drone > drones) throw InvalidInput("charging_report: unknown drone");
        if (rec.period < 1 || rec.period > periods)
            throw InvalidInput("charging_report: period out of range");
        r.load_j(static_cast<std::size_t>(rec.terminal_station - 1),
                 static_cast<std::size_t>(rec.period - 1)) +=
            rec.energy * battery_capacity_j;
        r.remaining_battery(static_cast<std::size_t>(rec.drone - 1),
                            static_cast<std::size_t>(rec.period - 1)) = 1.0 - rec.energy;
    }
    return r;
}

inline const char* kMetricsCsvHeader =
    "method,seed,period,drone,eff,acc,energy,reward,battery_remaining";
inline const char* kStationCsvHeader = "method,seed,period,station,load_joules";

}  // namespace swarmsense
