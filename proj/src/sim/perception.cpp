#include "zkpot/sim/perception.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zkpot::sim {

void PerceptionParams::validate() const {
    if (!(range_m > 0)) throw std::invalid_argument("perception.range_m must be positive");
    if (!(fov_deg > 0) || fov_deg > 360) throw std::invalid_argument("perception.fov_deg must be in (0, 360]");
    if (!(plate_width_m > 0)) throw std::invalid_argument("perception.plate_width_m must be positive");
    if (!(vehicle_length_m > 0)) throw std::invalid_argument("perception.vehicle_length_m must be positive");
    if (!(vehicle_width_m > 0)) throw std::invalid_argument("perception.vehicle_width_m must be positive");
    if (plate_width_m > vehicle_width_m) {
        throw std::invalid_argument("perception.plate_width_m must not exceed vehicle_width_m");
    }
}

std::vector<Vec2> plate_samples(const Body& target, const PerceptionParams& p) {
    const Vec2 c = target.rear_plate(p);
    const Vec2 f = target.forward();
    const Vec2 lateral{-f.y, f.x};
    const double h = p.plate_width_m / 2;
    return {c + lateral * h, c, c - lateral * h};
}

bool in_view(const Body& ego, const Body& target, const PerceptionParams& p) {
    const Vec2 cam = ego.camera(p);
    const Vec2 to = target.rear_plate(p) - cam;
    if (norm(to) > p.range_m) {
        return false;
    }
    return std::abs(bearing_deg(ego.heading_deg, to)) <= p.fov_deg / 2;
}

bool is_seen(std::span<const Body> bodies, std::size_t ego, std::size_t target, const PerceptionParams& p,
             std::span<const std::size_t> occluders) {
    if (ego == target || !in_view(bodies[ego], bodies[target], p)) {
        return false;
    }
    const Vec2 cam = bodies[ego].camera(p);
    for (const Vec2& pt : plate_samples(bodies[target], p)) {
        bool blocked = false;
        for (std::size_t o : occluders) {
            if (o == ego || o == target) {
                continue;
            }
            if (segment_hits_obb(cam, pt, bodies[o].footprint(p))) {
                blocked = true;
                break;
            }
        }
        if (!blocked) {
            return true;
        }
    }
    return false;
}

void SpatialIndex::build(std::span<const Body> bodies, std::span<const std::size_t> present) {
    bodies_ = bodies;
    cells_.clear();
    for (std::size_t i : present) {
        const auto cx = static_cast<std::int64_t>(std::floor(bodies[i].center.x / cell_));
        const auto cy = static_cast<std::int64_t>(std::floor(bodies[i].center.y / cell_));
        cells_[key(cx, cy)].push_back(i);
    }
}

std::vector<std::size_t> SpatialIndex::query(Vec2 at, double radius) const {
    std::vector<std::size_t> out;
    const auto x0 = static_cast<std::int64_t>(std::floor((at.x - radius) / cell_));
    const auto x1 = static_cast<std::int64_t>(std::floor((at.x + radius) / cell_));
    const auto y0 = static_cast<std::int64_t>(std::floor((at.y - radius) / cell_));
    const auto y1 = static_cast<std::int64_t>(std::floor((at.y + radius) / cell_));
    for (auto cx = x0; cx <= x1; ++cx) {
        for (auto cy = y0; cy <= y1; ++cy) {
            auto it = cells_.find(key(cx, cy));
            if (it == cells_.end()) {
                continue;
            }
            for (std::size_t i : it->second) {
                if (distance(bodies_[i].center, at) <= radius) {
                    out.push_back(i);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> visible_targets(std::span<const Body> bodies, std::size_t ego, const SpatialIndex& index,
                                         const PerceptionParams& p) {
    const Vec2 cam = bodies[ego].camera(p);
    // Any rectangle that can touch a sight line has its center within range
    // plus a vehicle diagonal of the camera.
    const double reach = p.range_m + std::hypot(p.vehicle_length_m, p.vehicle_width_m);
    const auto near = index.query(cam, reach);
    std::vector<std::size_t> seen;
    for (std::size_t t : near) {
        if (is_seen(bodies, ego, t, p, near)) {
            seen.push_back(t);
        }
    }
    return seen;
}

}  // namespace zkpot::sim
