#include "zkpot/sim/mobility.hpp"

#include "zkpot/sim/rng.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace zkpot::sim {

void ManhattanParams::validate() const {
    if (rows == 0 || cols == 0) throw std::invalid_argument("mobility.rows and mobility.cols must be positive");
    if (!(block_m > 0)) throw std::invalid_argument("mobility.block_m must be positive");
    if (n_vehicles == 0) throw std::invalid_argument("mobility.n_vehicles must be positive");
    if (!(speed_min > 0) || !(speed_max >= speed_min)) {
        throw std::invalid_argument("mobility.speed_min/speed_max must satisfy 0 < min <= max");
    }
    if (!(lane_offset_m >= 0) || lane_offset_m * 2 >= block_m) {
        throw std::invalid_argument("mobility.lane_offset_m out of range");
    }
}

ManhattanMobility::ManhattanMobility(const ManhattanParams& params, std::uint64_t seed) : params_(params) {
    params_.validate();
    const std::uint64_t horizontal = std::uint64_t{params_.cols} * (params_.rows + 1);
    const std::uint64_t vertical = std::uint64_t{params_.cols + 1} * params_.rows;
    vehicles_.reserve(params_.n_vehicles);
    for (std::uint32_t k = 0; k < params_.n_vehicles; ++k) {
        Vehicle v{make_engine(seed, k), 0, {}, {}, 0, {}};
        v.speed = uniform(v.rng, params_.speed_min, params_.speed_max);
        const auto e = uniform_index(v.rng, horizontal + vertical);
        Node a, b;
        if (e < horizontal) {
            a = {static_cast<std::int32_t>(e % params_.cols), static_cast<std::int32_t>(e / params_.cols)};
            b = {a.i + 1, a.j};
        } else {
            const auto f = e - horizontal;
            a = {static_cast<std::int32_t>(f % (params_.cols + 1)), static_cast<std::int32_t>(f / (params_.cols + 1))};
            b = {a.i, a.j + 1};
        }
        if (v.rng() & 1) {
            std::swap(a, b);
        }
        v.from = a;
        v.to = b;
        v.s = uniform(v.rng, 0.0, params_.block_m);
        plan(v);
        vehicles_.push_back(std::move(v));
    }
    states_.resize(vehicles_.size());
}

ManhattanMobility::Node ManhattanMobility::random_node(std::mt19937_64& rng) const {
    const auto i = static_cast<std::int32_t>(uniform_index(rng, params_.cols + 1));
    const auto j = static_cast<std::int32_t>(uniform_index(rng, params_.rows + 1));
    return {i, j};
}

void ManhattanMobility::plan(Vehicle& v) {
    Node dest;
    do {
        dest = random_node(v.rng);
    } while (dest == v.to);
    // Uniformly random monotone lattice path: each step goes along x with
    // probability proportional to the x steps still needed.
    std::int64_t nx = std::abs(dest.i - v.to.i);
    std::int64_t ny = std::abs(dest.j - v.to.j);
    const std::int32_t sx = dest.i > v.to.i ? 1 : -1;
    const std::int32_t sy = dest.j > v.to.j ? 1 : -1;
    Node cur = v.to;
    v.route.clear();
    while (nx + ny > 0) {
        if (uniform_index(v.rng, static_cast<std::uint64_t>(nx + ny)) < static_cast<std::uint64_t>(nx)) {
            cur.i += sx;
            --nx;
        } else {
            cur.j += sy;
            --ny;
        }
        v.route.push_back(cur);
    }
}

Pose ManhattanMobility::pose_of(const Vehicle& v) const {
    const int dx = v.to.i - v.from.i;
    const int dy = v.to.j - v.from.j;
    const double b = params_.block_m;
    const double off = params_.lane_offset_m;
    Pose p;
    p.x = v.from.i * b + dx * v.s + dy * off;
    p.y = v.from.j * b + dy * v.s - dx * off;
    p.heading_deg = dx > 0 ? 0.0 : dy > 0 ? 90.0 : dx < 0 ? 180.0 : 270.0;
    return p;
}

void ManhattanMobility::advance(std::uint64_t) {
    if (started_) {
        for (auto& v : vehicles_) {
            double remaining = v.speed;
            while (remaining > 0) {
                const double left = params_.block_m - v.s;
                if (remaining < left) {
                    v.s += remaining;
                    break;
                }
                remaining -= left;
                if (v.route.empty()) {
                    ++arrivals_;
                    plan(v);
                }
                v.from = v.to;
                v.to = v.route.front();
                v.route.erase(v.route.begin());
                v.s = 0;
            }
        }
    }
    for (std::size_t k = 0; k < vehicles_.size(); ++k) {
        const Pose p = pose_of(vehicles_[k]);
        auto& st = states_[k];
        st.velocity = started_ ? Vec2{p.x - st.pose.x, p.y - st.pose.y} : Vec2{};
        st.pose = p;
        st.present = true;
    }
    started_ = true;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) {
        return false;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

}  // namespace

std::uint64_t Trace::end_tick() const {
    std::uint64_t end = 0;
    for (const auto& t : tracks) {
        end = std::max<std::uint64_t>(end, t.first_tick + t.poses.size());
    }
    return end;
}

Trace parse_trace(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            break;
        }
    }
    if (trim(line) != "tick,vehicle_id,x,y,heading_deg") {
        throw ParseError(line_no, "expected header tick,vehicle_id,x,y,heading_deg");
    }

    std::map<std::string, std::map<std::uint64_t, Pose>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = trim(line);
        if (body.empty()) {
            continue;
        }
        auto fields = split(body);
        if (fields.size() != 5) {
            throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
        }
        std::uint64_t tick = 0;
        Pose p;
        const auto id = std::string(trim(fields[1]));
        if (!parse_number(trim(fields[0]), tick)) throw ParseError(line_no, "bad tick");
        if (id.empty()) throw ParseError(line_no, "empty vehicle_id");
        if (!parse_number(trim(fields[2]), p.x) || !std::isfinite(p.x)) throw ParseError(line_no, "bad x");
        if (!parse_number(trim(fields[3]), p.y) || !std::isfinite(p.y)) throw ParseError(line_no, "bad y");
        if (!parse_number(trim(fields[4]), p.heading_deg) || !std::isfinite(p.heading_deg)) {
            throw ParseError(line_no, "bad heading_deg");
        }
        if (!rows[id].emplace(tick, p).second) {
            throw ParseError(line_no, "duplicate row for vehicle " + id + " at tick " + std::to_string(tick));
        }
    }

    Trace trace;
    for (auto& [id, by_tick] : rows) {
        Trace::Track track{id, by_tick.begin()->first, {}};
        std::uint64_t expect = track.first_tick;
        for (const auto& [tick, pose] : by_tick) {
            if (tick != expect) {
                throw GapError(id, expect);
            }
            track.poses.push_back(pose);
            ++expect;
        }
        trace.tracks.push_back(std::move(track));
    }
    const bool numeric = std::all_of(trace.tracks.begin(), trace.tracks.end(), [](const Trace::Track& t) {
        std::uint64_t v;
        return parse_number(std::string_view(t.vehicle_id), v);
    });
    if (numeric) {
        std::sort(trace.tracks.begin(), trace.tracks.end(), [](const Trace::Track& a, const Trace::Track& b) {
            std::uint64_t x = 0, y = 0;
            parse_number(std::string_view(a.vehicle_id), x);
            parse_number(std::string_view(b.vehicle_id), y);
            return x < y;
        });
    }
    return trace;
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trace file " + path.string());
    }
    return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
    out << "tick,vehicle_id,x,y,heading_deg\n";
    const auto end = trace.end_tick();
    std::uint64_t start = end;
    for (const auto& t : trace.tracks) {
        start = std::min(start, t.first_tick);
    }
    for (std::uint64_t tick = start; tick < end; ++tick) {
        for (const auto& t : trace.tracks) {
            if (tick < t.first_tick || tick >= t.first_tick + t.poses.size()) {
                continue;
            }
            const auto& p = t.poses[tick - t.first_tick];
            out << tick << ',' << t.vehicle_id << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
                << format_double(p.heading_deg) << '\n';
        }
    }
}

Trace record_trace(MobilitySource& source, std::uint64_t ticks) {
    Trace trace;
    trace.tracks.resize(source.vehicle_count());
    std::vector<bool> started(source.vehicle_count(), false);
    for (std::size_t k = 0; k < source.vehicle_count(); ++k) {
        trace.tracks[k].vehicle_id = source.label(k);
    }
    for (std::uint64_t tick = 0; tick < ticks; ++tick) {
        source.advance(tick);
        const auto& st = source.states();
        for (std::size_t k = 0; k < st.size(); ++k) {
            if (!st[k].present) {
                continue;
            }
            if (!started[k]) {
                trace.tracks[k].first_tick = tick;
                started[k] = true;
            }
            trace.tracks[k].poses.push_back(st[k].pose);
        }
    }
    std::erase_if(trace.tracks, [](const Trace::Track& t) { return t.poses.empty(); });
    return trace;
}

TraceMobility::TraceMobility(Trace trace) : trace_(std::move(trace)), states_(trace_.tracks.size()) {}

void TraceMobility::advance(std::uint64_t tick) {
    for (std::size_t k = 0; k < trace_.tracks.size(); ++k) {
        const auto& t = trace_.tracks[k];
        auto& st = states_[k];
        const bool present = tick >= t.first_tick && tick < t.first_tick + t.poses.size();
        if (!present) {
            st = VehicleState{};
            continue;
        }
        const Pose p = t.poses[tick - t.first_tick];
        st.velocity = tick > t.first_tick ? Vec2{p.x - st.pose.x, p.y - st.pose.y} : Vec2{};
        st.pose = p;
        st.present = true;
    }
}

}  // namespace zkpot::sim
