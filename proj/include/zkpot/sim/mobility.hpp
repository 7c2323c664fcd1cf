#pragma once

#include "zkpot/sim/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace zkpot::sim {

struct Pose {
    double x = 0, y = 0;
    double heading_deg = 0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

struct VehicleState {
    bool present = false;
    Pose pose;
    Vec2 velocity;  // displacement over the last tick, zero on the first
};

/// Per-tick vehicle poses. Vehicle indices are stable for the whole run.
class MobilitySource {
public:
    virtual ~MobilitySource() = default;
    virtual std::size_t vehicle_count() const = 0;
    /// Label used as the number plate and in trace files.
    virtual std::string label(std::size_t vehicle) const = 0;
    /// Moves to `tick`; ticks are visited in increasing order from 0.
    virtual void advance(std::uint64_t tick) = 0;
    virtual const std::vector<VehicleState>& states() const = 0;
};

struct ManhattanParams {
    std::uint32_t rows = 10;
    std::uint32_t cols = 10;
    double block_m = 100.0;
    std::uint32_t n_vehicles = 100;
    double speed_min = 8.0;
    double speed_max = 14.0;
    double lane_offset_m = 1.75;

    void validate() const;
    double width_m() const { return cols * block_m; }
    double height_m() const { return rows * block_m; }
};

/// Vehicles on a (rows+1) x (cols+1) intersection lattice following random
/// shortest paths between random intersections, at constant per-vehicle
/// speed, in the right-hand lane.
class ManhattanMobility final : public MobilitySource {
public:
    ManhattanMobility(const ManhattanParams& params, std::uint64_t seed);

    std::size_t vehicle_count() const override { return vehicles_.size(); }
    std::string label(std::size_t vehicle) const override { return std::to_string(vehicle); }
    void advance(std::uint64_t tick) override;
    const std::vector<VehicleState>& states() const override { return states_; }

    double speed(std::size_t vehicle) const { return vehicles_[vehicle].speed; }
    /// Number of destinations reached so far, summed over vehicles.
    std::uint64_t arrivals() const { return arrivals_; }

private:
    struct Node {
        std::int32_t i = 0, j = 0;
        friend bool operator==(Node, Node) = default;
    };
    struct Vehicle {
        std::mt19937_64 rng;
        double speed = 0;
        Node from, to;
        double s = 0;  // metres travelled along from -> to
        std::vector<Node> route;  // remaining nodes after `to`, in order
    };

    Node random_node(std::mt19937_64& rng) const;
    void plan(Vehicle& v);
    Pose pose_of(const Vehicle& v) const;

    ManhattanParams params_;
    std::vector<Vehicle> vehicles_;
    std::vector<VehicleState> states_;
    std::uint64_t arrivals_ = 0;
    bool started_ = false;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class GapError : public std::runtime_error {
public:
    GapError(std::string vehicle, std::uint64_t tick)
        : std::runtime_error("trace: vehicle " + vehicle + " has no row for tick " + std::to_string(tick)),
          vehicle_(std::move(vehicle)),
          tick_(tick) {}
    const std::string& vehicle() const { return vehicle_; }
    std::uint64_t tick() const { return tick_; }

private:
    std::string vehicle_;
    std::uint64_t tick_;
};

/// Parsed trace: one contiguous run of poses per vehicle.
struct Trace {
    struct Track {
        std::string vehicle_id;
        std::uint64_t first_tick = 0;
        std::vector<Pose> poses;
    };
    std::vector<Track> tracks;  // numeric ids in numeric order, otherwise lexicographic

    std::uint64_t end_tick() const;  // one past the last tick with a row
};

/// CSV with header `tick,vehicle_id,x,y,heading_deg`. Rows may come in any
/// order. Throws ParseError or GapError.
Trace parse_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);

/// Writes rows ordered by tick then vehicle, with round-trip exact numbers.
void write_trace(std::ostream& out, const Trace& trace);

/// Records `ticks` ticks of a mobility source.
Trace record_trace(MobilitySource& source, std::uint64_t ticks);

class TraceMobility final : public MobilitySource {
public:
    explicit TraceMobility(Trace trace);

    std::size_t vehicle_count() const override { return trace_.tracks.size(); }
    std::string label(std::size_t vehicle) const override { return trace_.tracks[vehicle].vehicle_id; }
    void advance(std::uint64_t tick) override;
    const std::vector<VehicleState>& states() const override { return states_; }

private:
    Trace trace_;
    std::vector<VehicleState> states_;
};

}  // namespace zkpot::sim
