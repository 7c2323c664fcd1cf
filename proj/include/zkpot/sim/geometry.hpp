#pragma once

#include <cmath>
#include <numbers>

namespace zkpot::sim {

struct Vec2 {
    double x = 0, y = 0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline Vec2 heading_vector(double heading_deg) {
    const double r = heading_deg * std::numbers::pi / 180.0;
    return {std::cos(r), std::sin(r)};
}

/// Oriented rectangle: center, unit axis along the length, half extents.
struct Obb {
    Vec2 center;
    Vec2 axis;
    double half_length = 0;
    double half_width = 0;

    Vec2 to_local(Vec2 p) const {
        const Vec2 d = p - center;
        return {dot(d, axis), cross(axis, d)};
    }
};

/// True if the open interior of `box` meets the segment a + t(b - a) for
/// some t in [0, t_max]. Touching the boundary does not count.
bool segment_hits_obb(Vec2 a, Vec2 b, const Obb& box, double t_max = 1.0);

/// Strict interior test.
bool point_in_obb(Vec2 p, const Obb& box, double margin = 0.0);

/// Signed angle from heading to the direction of `v`, in degrees within (-180, 180].
double bearing_deg(double heading_deg, Vec2 v);

}  // namespace zkpot::sim
