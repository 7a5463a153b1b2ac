#pragma once

#include <array>
#include <string>
#include <vector>

#include "swarmsense/errors.hpp"
#include "swarmsense/mat.hpp"

namespace swarmsense {

// Period-level flying directions. 0 keeps the drone at its origin
// station; 1..8 are the eight compass directions.
enum class Action : int {
    ReturnToOrigin = 0,
    North = 1,
    East = 2,
    South = 3,
    West = 4,
    NorthEast = 5,
    SouthEast = 6,
    SouthWest = 7,
    NorthWest = 8,
};

inline constexpr int kActionCount = 9;

inline Action action_from_int(int a) {
    if (a < 0 || a >= kActionCount)
        throw InvalidInput("action code " + std::to_string(a) + " out of range 0..8");
    return static_cast<Action>(a);
}

// (row, col) step per direction; row grows southward.
inline std::array<int, 2> action_delta(Action a) {
    switch (a) {
        case Action::ReturnToOrigin: return {0, 0};
        case Action::North: return {-1, 0};
        case Action::East: return {0, 1};
        case Action::South: return {1, 0};
        case Action::West: return {0, -1};
        case Action::NorthEast: return {-1, 1};
        case Action::SouthEast: return {1, 1};
        case Action::SouthWest: return {1, -1};
        case Action::NorthWest: return {-1, -1};
    }
    return {0, 0};
}

// One navigation/sensing option for a drone within a period: the cells
// it hovers over per timeslot, plus the cost of flying that route.
struct Plan {
    int index = 1;                 // l, 1-based within its group
    Action direction = Action::ReturnToOrigin;
    std::vector<int> search_range;  // K, candidate cells along the direction
    std::vector<int> visited;       // J, route order
    MatI occupancy;                 // N x S, 1 where the drone hovers
    double fly_time_s = 0.0;
    double hover_time_s = 0.0;
    double energy = 0.0;            // battery fraction, <= 1 for a feasible plan
    int terminal_station = 1;
};

struct PlanGroup {
    Action direction = Action::ReturnToOrigin;
    std::vector<Plan> plans;
};

}  // namespace swarmsense
