#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "swarmsense/errors.hpp"
#include "swarmsense/mat.hpp"

namespace swarmsense {

// Periodic state update: time-reverse-decay prediction of the sensing
// field from collected history, one OLS coefficient per (cell, slot),
// and percentile-based pruning of the coordination target.

struct Forecaster {
    MatD omega;                 // per (cell, slot) coefficient, strictly inside (0, 1)
    std::vector<MatD> history;  // collected values per executed period

    Forecaster() = default;
    Forecaster(std::size_t cells, std::size_t slots, double initial_omega = 0.5)
        : omega(cells, slots, initial_omega) {}

    void record(MatD collected) { history.push_back(std::move(collected)); }
    void reset_history() { history.clear(); }
};

// Predicted value after period t of a mission with T periods:
//   V^hat[n][s] = sum_{t'=1..t} (T - t + t') * omega[n][s] * collected[t'][n][s]
// Recent periods get the largest weights. An empty history predicts zero.
inline MatD predict(const Forecaster& f, int t, int periods) {
    if (t < 0 || static_cast<std::size_t>(t) > f.history.size())
        throw InvalidInput("predict: history does not cover periods 1..t");
    MatD out(f.omega.rows(), f.omega.cols(), 0.0);
    for (int tp = 1; tp <= t; ++tp) {
        const double w = static_cast<double>(periods - t + tp);
        const MatD& v = f.history[static_cast<std::size_t>(tp - 1)];
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data()[i] += w * f.omega.data()[i] * v.data()[i];
    }
    return out;
}

// Per-(cell, slot) least squares for omega: with x_t the omega-free
// accumulation of Eq-style weights over the history prefix and y_t the
// realized value, omega = sum(x y) / sum(x^2), clamped into
// (1e-3, 1 - 1e-3). Degenerate all-zero regressors fall back to 0.5.
inline MatD fit_coefficients(const std::vector<MatD>& history, const std::vector<MatD>& realized,
                             int periods) {
    if (history.size() < 2) throw InvalidInput("fit_coefficients: need >= 2 training periods");
    if (realized.size() != history.size())
        throw InvalidInput("fit_coefficients: one realized field per training period required");
    const std::size_t cells = history[0].rows();
    const std::size_t slots = history[0].cols();

    MatD num(cells, slots, 0.0);
    MatD den(cells, slots, 0.0);
    MatD x(cells, slots, 0.0);
    for (std::size_t t = 1; t <= history.size(); ++t) {
        x.fill(0.0);
        for (std::size_t tp = 1; tp <= t; ++tp) {
            const double w = static_cast<double>(periods) - static_cast<double>(t) +
                             static_cast<double>(tp);
            const MatD& v = history[tp - 1];
            for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += w * v.data()[i];
        }
        const MatD& y = realized[t - 1];
        for (std::size_t i = 0; i < x.size(); ++i) {
            num.data()[i] += x.data()[i] * y.data()[i];
            den.data()[i] += x.data()[i] * x.data()[i];
        }
    }

    constexpr double kDelta = 1e-3;
    MatD omega(cells, slots, 0.5);
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (den.data()[i] > 0.0)
            omega.data()[i] = std::clamp(num.data()[i] / den.data()[i], kDelta, 1.0 - kDelta);
    }
    return omega;
}

// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidInput("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double rank = std::clamp(q, 0.0, 100.0) / 100.0 *
                        static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Prunes the target: entries whose collected value fell below the
// 100(1 - U/N)th percentile of the predicted field, in cells the swarm
// actually visited, stop being required. Entries never re-activate.
inline void update_target(MatI& target, const MatD& predicted, const MatD& collected,
                          const MatI& aggregate, int drones, int cells) {
    if (drones > cells) throw InvalidInput("update_target: more drones than cells");
    if (!predicted.same_shape(collected) || !target.same_shape(predicted) ||
        !aggregate.same_shape(predicted))
        throw InvalidInput("update_target: dimension mismatch");

    const double q = 100.0 * (1.0 - static_cast<double>(drones) / static_cast<double>(cells));
    const double threshold = percentile(predicted.data(), q);

    for (std::size_t i = 0; i < target.size(); ++i)
        if (collected.data()[i] < threshold && aggregate.data()[i] > 0) target.data()[i] = 0;
}

inline const char* kForecastCsvHeader = "period,cell,slot,predicted,collected,target";

}  // namespace swarmsense
