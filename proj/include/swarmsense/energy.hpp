#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "swarmsense/errors.hpp"

namespace swarmsense {

// Quadrotor power model. A drone produces thrust to balance weight plus
// drag; the induced velocity through the rotor disk follows momentum
// theory and is the root of a nonlinear fixed-point equation. Forward
// and hover power are derived from it.

struct DroneSpec {
    double body_mass_kg = 1.07;
    double battery_mass_kg = 0.31;
    int rotor_count = 4;
    double rotor_diameter_m = 0.35;
    double power_efficiency = 0.578;  // overall electrical+aero efficiency, (0,1]
    double ground_speed_mps = 6.94;
    double air_density = 1.225;       // kg/m^3
    double gravity = 9.81;            // m/s^2
    double battery_capacity_j = 159840.0;  // 6000 mAh LiPo 2S at 7.4 V nominal
    double drag_force_n = 4.1134;     // steady forward flight at ground_speed

    double total_mass() const { return body_mass_kg + battery_mass_kg; }
    double weight() const { return total_mass() * gravity; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw InvalidInput(std::string("drone spec: ") + name + " must be > 0");
        };
        positive(body_mass_kg, "body_mass_kg");
        positive(battery_mass_kg, "battery_mass_kg");
        positive(static_cast<double>(rotor_count), "rotor_count");
        positive(rotor_diameter_m, "rotor_diameter_m");
        positive(power_efficiency, "power_efficiency");
        if (power_efficiency > 1.0) throw InvalidInput("drone spec: power_efficiency must be <= 1");
        if (ground_speed_mps < 0.0) throw InvalidInput("drone spec: ground_speed_mps must be >= 0");
        positive(air_density, "air_density");
        positive(gravity, "gravity");
        positive(battery_capacity_j, "battery_capacity_j");
        if (drag_force_n < 0.0) throw InvalidInput("drone spec: drag_force_n must be >= 0");
    }

    // DJI Phantom 4 Pro profile. Power efficiency chosen so that hover
    // endurance on the stock battery is ~30 min, matching the airframe's
    // rated maximum flight time.
    static DroneSpec dji_phantom4pro() { return DroneSpec{}; }
};

// Rotor disk area term pi/2 * d^2 * r * rho shared by the hover closed
// form and the induced-velocity equation.
inline double half_disk_loading(const DroneSpec& spec) {
    return 0.5 * std::numbers::pi * spec.rotor_diameter_m * spec.rotor_diameter_m *
           static_cast<double>(spec.rotor_count) * spec.air_density;
}

struct FlightRegime {
    double thrust_n = 0.0;
    double pitch_rad = 0.0;
    double drag_n = 0.0;
    double induced_velocity_mps = 0.0;
};

namespace detail {

inline double induced_velocity_rhs(const DroneSpec& spec, double thrust, double pitch, double vi) {
    const double v = spec.ground_speed_mps;
    const double horiz = v * std::cos(pitch);
    const double vert = v * std::sin(pitch) + vi;
    const double denom = 2.0 * half_disk_loading(spec) * std::sqrt(horiz * horiz + vert * vert);
    return 2.0 * thrust / denom;
}

}  // namespace detail

// Solves v_i = 2T / (pi d^2 r rho * sqrt((v cos th)^2 + (v sin th + v_i)^2))
// by damped fixed-point iteration (damping 0.5; the map contracts slowly
// near hover) with a bisection fallback. Converges to relative residual
// below 1e-12, well inside the 1e-9 contract.
inline double solve_induced_velocity(const DroneSpec& spec, double thrust_n, double pitch_rad) {
    if (!(thrust_n > 0.0)) throw InvalidInput("solve_induced_velocity: thrust must be > 0");
    constexpr double kRelTol = 1e-12;
    constexpr int kMaxIters = 10000;

    // Hover closed form as the starting point; exact when v = 0.
    double vi = std::sqrt(thrust_n / half_disk_loading(spec));
    int iters = 0;
    for (; iters < kMaxIters / 2; ++iters) {
        const double f = detail::induced_velocity_rhs(spec, thrust_n, pitch_rad, vi);
        if (std::abs(vi - f) <= kRelTol * vi) return vi;
        vi = 0.5 * vi + 0.5 * f;
    }

    // The rhs is strictly decreasing in v_i, so g(x) = f(x) - x has exactly
    // one positive root and bisection cannot fail once bracketed.
    double lo = vi, hi = vi;
    while (detail::induced_velocity_rhs(spec, thrust_n, pitch_rad, lo) < lo) lo *= 0.5;
    while (detail::induced_velocity_rhs(spec, thrust_n, pitch_rad, hi) > hi) hi *= 2.0;
    for (; iters < kMaxIters; ++iters) {
        const double mid = 0.5 * (lo + hi);
        const double f = detail::induced_velocity_rhs(spec, thrust_n, pitch_rad, mid);
        if (std::abs(mid - f) <= kRelTol * mid) return mid;
        if (f > mid)
            lo = mid;
        else
            hi = mid;
    }
    throw NumericalError("solve_induced_velocity: no convergence after 10000 iterations");
}

// Thrust, pitch and induced velocity for steady forward flight at the
// spec's ground speed and drag force.
inline FlightRegime forward_regime(const DroneSpec& spec) {
    FlightRegime r;
    r.drag_n = spec.drag_force_n;
    r.thrust_n = spec.weight() + r.drag_n;
    r.pitch_rad = std::atan2(r.drag_n, spec.weight());
    r.induced_velocity_mps = solve_induced_velocity(spec, r.thrust_n, r.pitch_rad);
    return r;
}

// Forward-flight power C^f = (v sin th + v_i) * T / eps.
inline double forward_power(const DroneSpec& spec) {
    const FlightRegime r = forward_regime(spec);
    return (spec.ground_speed_mps * std::sin(r.pitch_rad) + r.induced_velocity_mps) * r.thrust_n /
           spec.power_efficiency;
}

// Hover power C^h = T^{3/2} / (eps * sqrt(pi/2 d^2 r rho)), T = weight.
inline double hover_power(const DroneSpec& spec) {
    const double thrust = spec.weight();
    return std::pow(thrust, 1.5) / (spec.power_efficiency * std::sqrt(half_disk_loading(spec)));
}

// Battery fraction consumed by a plan: E = (C^f t^f + C^h t^h) / B.
// Callers treat E > 1 as infeasible.
inline double plan_energy(const DroneSpec& spec, double fly_time_s, double hover_time_s) {
    if (fly_time_s < 0.0 || hover_time_s < 0.0)
        throw InvalidInput("plan_energy: times must be >= 0");
    return (forward_power(spec) * fly_time_s + hover_power(spec) * hover_time_s) /
           spec.battery_capacity_j;
}

// Same, but with powers precomputed once per spec. Plan generation costs
// many plans against one spec and the solver is the expensive part.
struct PowerProfile {
    double forward_w;
    double hover_w;
    double battery_j;

    explicit PowerProfile(const DroneSpec& spec)
        : forward_w(forward_power(spec)),
          hover_w(hover_power(spec)),
          battery_j(spec.battery_capacity_j) {}

    double energy(double fly_time_s, double hover_time_s) const {
        return (forward_w * fly_time_s + hover_w * hover_time_s) / battery_j;
    }
};

}  // namespace swarmsense
