#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "swarmsense/csv.hpp"
#include "swarmsense/energy.hpp"
#include "swarmsense/errors.hpp"
#include "swarmsense/mat.hpp"
#include "swarmsense/rng.hpp"

namespace swarmsense {

// World model: grid geometry, charging stations, mission time structure
// and the required-sensing-value field. Immutable after construction;
// only the collected tensor is written during simulation, by the
// single-threaded step.

struct TimeStructure {
    int periods = 8;            // T
    int slots_per_period = 30;  // S
    double slot_duration_s = 60.0;

    void validate() const {
        if (periods < 1 || slots_per_period < 1)
            throw InvalidInput("time structure: periods and slots_per_period must be >= 1");
        if (!(slot_duration_s > 0.0))
            throw InvalidInput("time structure: slot_duration_s must be > 0");
    }
};

struct Station {
    int id = 0;   // 1..M
    int row = 0;  // 0-based
    int col = 0;
};

class GridMap {
  public:
    GridMap() = default;
    GridMap(int rows, int cols, double cell_size_m, std::vector<Station> stations)
        : rows_(rows), cols_(cols), cell_size_(cell_size_m), stations_(std::move(stations)) {
        if (rows_ < 1 || cols_ < 1) throw InvalidInput("grid: rows and cols must be >= 1");
        if (!(cell_size_ > 0.0)) throw InvalidInput("grid: cell_size must be > 0");
        std::set<int> ids;
        for (const Station& st : stations_) {
            if (st.row < 0 || st.row >= rows_ || st.col < 0 || st.col >= cols_)
                throw InvalidInput("grid: station " + std::to_string(st.id) + " outside grid");
            if (!ids.insert(st.id).second)
                throw InvalidInput("grid: duplicate station id " + std::to_string(st.id));
        }
        for (int m = 1; m <= static_cast<int>(stations_.size()); ++m)
            if (!ids.count(m)) throw InvalidInput("grid: station ids must be 1..M");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int cell_count() const { return rows_ * cols_; }
    double cell_size() const { return cell_size_; }
    const std::vector<Station>& stations() const { return stations_; }
    int station_count() const { return static_cast<int>(stations_.size()); }

    // Cells are 1..N in row-major order.
    int cell_of(int row, int col) const { return row * cols_ + col + 1; }
    int row_of(int cell) const { return (cell - 1) / cols_; }
    int col_of(int cell) const { return (cell - 1) % cols_; }

    bool valid_cell(int cell) const { return cell >= 1 && cell <= cell_count(); }

    void require_cell(int cell, const char* what) const {
        if (!valid_cell(cell))
            throw InvalidInput(std::string(what) + ": cell id " + std::to_string(cell) +
                               " out of range 1.." + std::to_string(cell_count()));
    }

    const Station& station(int id) const {
        if (id < 1 || id > station_count())
            throw InvalidInput("station id " + std::to_string(id) + " out of range");
        return stations_[static_cast<std::size_t>(id - 1)];
    }

    int station_cell(int id) const {
        const Station& st = station(id);
        return cell_of(st.row, st.col);
    }

    // Euclidean distance between cell centers.
    double cell_distance(int a, int b) const {
        require_cell(a, "cell_distance");
        require_cell(b, "cell_distance");
        const double dr = row_of(a) - row_of(b);
        const double dc = col_of(a) - col_of(b);
        return cell_size_ * std::sqrt(dr * dr + dc * dc);
    }

    // Nearest station to a cell; ties go to the lowest station id.
    int nearest_station(int cell) const {
        require_cell(cell, "nearest_station");
        int best = 1;
        double best_d = cell_distance(cell, station_cell(1));
        for (int m = 2; m <= station_count(); ++m) {
            const double d = cell_distance(cell, station_cell(m));
            if (d < best_d) {
                best = m;
                best_d = d;
            }
        }
        return best;
    }

    // Distance from a station to its nearest other station; 0 if M == 1.
    double nearest_other_station_distance(int id) const {
        double best = 0.0;
        bool found = false;
        for (int m = 1; m <= station_count(); ++m) {
            if (m == id) continue;
            const double d = cell_distance(station_cell(id), station_cell(m));
            if (!found || d < best) {
                best = d;
                found = true;
            }
        }
        return found ? best : 0.0;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    double cell_size_ = 0.0;
    std::vector<Station> stations_;
};

struct Drone {
    int id = 0;  // 1..U
    int home_station = 1;
};

struct DroneFleet {
    DroneSpec spec;  // one airframe profile for the whole fleet
    std::vector<Drone> drones;

    int count() const { return static_cast<int>(drones.size()); }

    void validate(const GridMap& grid) const {
        spec.validate();
        std::set<int> ids;
        for (const Drone& d : drones) {
            if (!ids.insert(d.id).second)
                throw InvalidInput("fleet: duplicate drone id " + std::to_string(d.id));
            if (d.home_station < 1 || d.home_station > grid.station_count())
                throw InvalidInput("fleet: drone " + std::to_string(d.id) +
                                   " home station does not exist");
        }
        for (int u = 1; u <= count(); ++u)
            if (!ids.count(u)) throw InvalidInput("fleet: drone ids must be 1..U");
    }
};

// required[t-1](n-1, s-1) is the value at period t, cell n, slot s.
// collected is filled during simulation and never exceeds required.
struct SensingField {
    std::vector<MatD> required;
    std::vector<MatD> collected;

    static SensingField zeros(const GridMap& grid, const TimeStructure& time) {
        SensingField f;
        const auto n = static_cast<std::size_t>(grid.cell_count());
        const auto s = static_cast<std::size_t>(time.slots_per_period);
        f.required.assign(static_cast<std::size_t>(time.periods), MatD(n, s, 0.0));
        f.collected.assign(static_cast<std::size_t>(time.periods), MatD(n, s, 0.0));
        return f;
    }

    const MatD& required_at(int period) const {
        return required[static_cast<std::size_t>(period - 1)];
    }
    MatD& collected_at(int period) { return collected[static_cast<std::size_t>(period - 1)]; }
    const MatD& collected_at(int period) const {
        return collected[static_cast<std::size_t>(period - 1)];
    }
};

enum class TemporalProfile { Flat, Rising, Falling, Pulse };

inline TemporalProfile temporal_profile_from_string(const std::string& s) {
    if (s == "flat") return TemporalProfile::Flat;
    if (s == "rising") return TemporalProfile::Rising;
    if (s == "falling") return TemporalProfile::Falling;
    if (s == "pulse") return TemporalProfile::Pulse;
    throw InvalidInput("unknown temporal profile '" + s + "'");
}

inline std::string to_string(TemporalProfile p) {
    switch (p) {
        case TemporalProfile::Flat: return "flat";
        case TemporalProfile::Rising: return "rising";
        case TemporalProfile::Falling: return "falling";
        case TemporalProfile::Pulse: return "pulse";
    }
    return "flat";
}

struct Hotspot {
    int center_cell = 1;
    double peak = 1.0;
    double spread_m = 200.0;  // spatial Gaussian sigma; ~0 collapses to the center cell
    TemporalProfile profile = TemporalProfile::Flat;
};

namespace detail {

inline double temporal_weight(TemporalProfile p, int t, int s, const TimeStructure& time) {
    const double total = static_cast<double>(time.periods) * time.slots_per_period;
    const double g = static_cast<double>(t - 1) * time.slots_per_period + (s - 1);
    switch (p) {
        case TemporalProfile::Flat: return 1.0;
        case TemporalProfile::Rising: return (g + 1.0) / total;
        case TemporalProfile::Falling: return (total - g) / total;
        case TemporalProfile::Pulse: {
            const double mid = 0.5 * (total - 1.0);
            const double sigma = std::max(total / 6.0, 1.0);
            const double z = (g - mid) / sigma;
            return std::exp(-0.5 * z * z);
        }
    }
    return 1.0;
}

}  // namespace detail

// Synthetic traffic: a sum of spatial Gaussians around hotspot centers,
// modulated over time. The seed perturbs each hotspot's peak by a
// uniform +-noise_amplitude factor (default 10%); everything else is
// closed-form, so identical inputs give bit-identical tensors.
inline SensingField generate_synthetic_traffic(const GridMap& grid, const TimeStructure& time,
                                               const std::vector<Hotspot>& hotspots,
                                               std::uint64_t seed,
                                               double noise_amplitude = 0.1) {
    time.validate();
    for (const Hotspot& h : hotspots) {
        grid.require_cell(h.center_cell, "synthetic traffic hotspot");
        if (h.peak < 0.0) throw InvalidInput("synthetic traffic: hotspot peak must be >= 0");
    }

    Rng rng(sub_seed(seed, "traffic"));
    std::vector<double> peaks;
    peaks.reserve(hotspots.size());
    for (const Hotspot& h : hotspots)
        peaks.push_back(h.peak * (1.0 + noise_amplitude * rng.next_real(-1.0, 1.0)));

    SensingField field = SensingField::zeros(grid, time);
    for (int t = 1; t <= time.periods; ++t) {
        MatD& v = field.required[static_cast<std::size_t>(t - 1)];
        for (int n = 1; n <= grid.cell_count(); ++n) {
            for (int s = 1; s <= time.slots_per_period; ++s) {
                double acc = 0.0;
                for (std::size_t h = 0; h < hotspots.size(); ++h) {
                    const Hotspot& hs = hotspots[h];
                    double spatial;
                    if (hs.spread_m < 1e-9) {
                        spatial = (n == hs.center_cell) ? 1.0 : 0.0;
                    } else {
                        const double d = grid.cell_distance(n, hs.center_cell);
                        spatial = std::exp(-0.5 * (d / hs.spread_m) * (d / hs.spread_m));
                    }
                    acc += peaks[h] * spatial * detail::temporal_weight(hs.profile, t, s, time);
                }
                v(static_cast<std::size_t>(n - 1), static_cast<std::size_t>(s - 1)) = acc;
            }
        }
    }
    return field;
}

inline const char* kTrafficCsvHeader = "period,cell,slot,value";

// Reads `period,cell,slot,value` rows (1-based indices). Unlisted
// entries default to 0; duplicates and out-of-range indices are errors
// naming the offending line.
inline SensingField import_traffic_csv(const std::filesystem::path& path, const GridMap& grid,
                                       const TimeStructure& time) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path.string());

    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header");
    {
        auto fields = split_csv_line(line);
        if (fields != std::vector<std::string>{"period", "cell", "slot", "value"})
            throw ParseError("line 1: expected header '" + std::string(kTrafficCsvHeader) + "'");
    }

    SensingField field = SensingField::zeros(grid, time);
    std::set<std::tuple<long, long, long>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        const long t = parse_long(fields[0], line_no, "period");
        const long n = parse_long(fields[1], line_no, "cell");
        const long s = parse_long(fields[2], line_no, "slot");
        const double value = parse_double(fields[3], line_no, "value");
        if (t < 1 || t > time.periods)
            throw ParseError("line " + std::to_string(line_no) + ": period out of range");
        if (n < 1 || n > grid.cell_count())
            throw ParseError("line " + std::to_string(line_no) + ": cell out of range");
        if (s < 1 || s > time.slots_per_period)
            throw ParseError("line " + std::to_string(line_no) + ": slot out of range");
        if (value < 0.0)
            throw ParseError("line " + std::to_string(line_no) + ": negative value");
        if (!seen.insert({t, n, s}).second)
            throw ParseError("line " + std::to_string(line_no) + ": duplicate (period,cell,slot)");
        field.required[static_cast<std::size_t>(t - 1)](static_cast<std::size_t>(n - 1),
                                                        static_cast<std::size_t>(s - 1)) = value;
    }
    return field;
}

inline void export_traffic_csv(const std::filesystem::path& path, const SensingField& field) {
    CsvWriter w(path);
    w.header(kTrafficCsvHeader);
    for (std::size_t ti = 0; ti < field.required.size(); ++ti) {
        const MatD& v = field.required[ti];
        for (std::size_t n = 0; n < v.rows(); ++n)
            for (std::size_t s = 0; s < v.cols(); ++s)
                if (v(n, s) != 0.0) w.row(ti + 1, n + 1, s + 1, v(n, s));
    }
}

}  // namespace swarmsense
