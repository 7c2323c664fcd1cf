// Camera model: a target is seen when its rear number plate is in range, in
// the field of view and not hidden behind another vehicle.
#pragma once

#include "zkpot/sim/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace zkpot::sim {

struct PerceptionParams {
    double range_m = 65.0;
    double fov_deg = 120.0;
    double plate_width_m = 0.35;
    double vehicle_length_m = 4.0;
    double vehicle_width_m = 1.8;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Vehicle footprint at one instant; `center` is the middle of the rectangle.
struct Body {
    Vec2 center;
    double heading_deg = 0;

    Vec2 forward() const { return heading_vector(heading_deg); }
    Vec2 camera(const PerceptionParams& p) const { return center + forward() * (p.vehicle_length_m / 2); }
    Vec2 rear_plate(const PerceptionParams& p) const { return center - forward() * (p.vehicle_length_m / 2); }
    Obb footprint(const PerceptionParams& p) const {
        return Obb{center, forward(), p.vehicle_length_m / 2, p.vehicle_width_m / 2};
    }
};

/// Left edge, center and right edge of the rear plate.
std::vector<Vec2> plate_samples(const Body& target, const PerceptionParams& p);

/// Range and field-of-view test only.
bool in_view(const Body& ego, const Body& target, const PerceptionParams& p);

/// Full test: range, field of view, and at least one plate sample whose sight
/// line crosses none of `occluders` (ego and target indices are skipped).
bool is_seen(std::span<const Body> bodies, std::size_t ego, std::size_t target, const PerceptionParams& p,
             std::span<const std::size_t> occluders);

/// Uniform grid over body centers for neighbour queries.
class SpatialIndex {
public:
    explicit SpatialIndex(double cell_m) : cell_(cell_m) {}

    void build(std::span<const Body> bodies, std::span<const std::size_t> present);
    /// Indices of bodies whose center lies within `radius` of `at`, ascending.
    std::vector<std::size_t> query(Vec2 at, double radius) const;

private:
    std::int64_t key(std::int64_t cx, std::int64_t cy) const { return (cx << 32) ^ (cy & 0xFFFFFFFF); }

    double cell_;
    std::span<const Body> bodies_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

/// All targets `ego` sees, ascending by index, among the present bodies.
std::vector<std::size_t> visible_targets(std::span<const Body> bodies, std::size_t ego, const SpatialIndex& index,
                                         const PerceptionParams& p);

}  // namespace zkpot::sim
