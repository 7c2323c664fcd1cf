#include "zkpot/sim/geometry.hpp"

#include <algorithm>

namespace zkpot::sim {

bool segment_hits_obb(Vec2 a, Vec2 b, const Obb& box, double t_max) {
    const Vec2 p = box.to_local(a);
    const Vec2 q = box.to_local(b);
    const double d[2] = {q.x - p.x, q.y - p.y};
    const double o[2] = {p.x, p.y};
    const double h[2] = {box.half_length, box.half_width};
    double lo = 0.0;
    double hi = t_max;
    for (int i = 0; i < 2; ++i) {
        if (std::abs(d[i]) < 1e-15) {
            if (o[i] <= -h[i] || o[i] >= h[i]) {
                return false;
            }
            continue;
        }
        double t1 = (-h[i] - o[i]) / d[i];
        double t2 = (h[i] - o[i]) / d[i];
        if (t1 > t2) {
            std::swap(t1, t2);
        }
        lo = std::max(lo, t1);
        hi = std::min(hi, t2);
        if (lo >= hi) {
            return false;
        }
    }
    return lo < hi;
}

bool point_in_obb(Vec2 p, const Obb& box, double margin) {
    const Vec2 l = box.to_local(p);
    return std::abs(l.x) < box.half_length - margin && std::abs(l.y) < box.half_width - margin;
}

double bearing_deg(double heading_deg, Vec2 v) {
    const Vec2 h = heading_vector(heading_deg);
    return std::atan2(cross(h, v), dot(h, v)) * 180.0 / std::numbers::pi;
}

}  // namespace zkpot::sim
