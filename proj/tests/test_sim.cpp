#include "doctest.h"
#include "scenarios.hpp"
#include "zkpot/sim/metrics.hpp"
#include "zkpot/sim/perception.hpp"
#include "zkpot/sim/rng.hpp"
#include "zkpot/sim/world.hpp"
#include "zkpot/wire/cpm.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace zkpot::sim;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("zkpot_test_sim_" + name);
    std::filesystem::remove_all(p);
    return p;
}

const PerceptionParams kP{};

// Body whose rear plate center sits at `plate`, facing `heading`.
Body body_with_plate_at(Vec2 plate, double heading) {
    return Body{plate + heading_vector(heading) * (kP.vehicle_length_m / 2), heading};
}

// Dense-ray oracle for sight lines: steps along each camera -> plate-sample
// segment and tests every step point against the blocker's rectangle.
// Returns nullopt when shrinking or growing the rectangle by a millimetre
// changes the answer (grazing contact; not a meaningful test case).
std::optional<bool> oracle_seen(const Body& ego, const Body& target, const Body& blocker) {
    const Vec2 cam = ego.center + heading_vector(ego.heading_deg) * 2.0;
    const Vec2 fwd = heading_vector(target.heading_deg);
    const Vec2 plate = target.center - fwd * 2.0;
    const Vec2 to = plate - cam;
    if (std::hypot(to.x, to.y) > 65.0) {
        return false;
    }
    const double ang =
        std::atan2(to.y, to.x) * 180.0 / std::numbers::pi - ego.heading_deg;
    const double wrapped = std::remainder(ang, 360.0);
    if (std::abs(wrapped) > 60.0) {
        return false;
    }
    const Vec2 lateral{-fwd.y, fwd.x};
    auto blocked_at = [&](double margin) {
        const Vec2 ax = heading_vector(blocker.heading_deg);
        int clear = 0;
        for (double off : {-0.175, 0.0, 0.175}) {
            const Vec2 pt = plate + lateral * off;
            bool hit = false;
            const int steps = 20000;
            for (int i = 0; i <= steps && !hit; ++i) {
                const Vec2 q = cam + (pt - cam) * (static_cast<double>(i) / steps);
                const Vec2 d = q - blocker.center;
                const double u = d.x * ax.x + d.y * ax.y;
                const double v = -d.x * ax.y + d.y * ax.x;
                hit = std::abs(u) < 2.0 + margin && std::abs(v) < 0.9 + margin;
            }
            clear += hit ? 0 : 1;
        }
        return clear > 0;
    };
    const bool grown = blocked_at(0.001);
    const bool shrunk = blocked_at(-0.001);
    if (grown != shrunk) {
        return std::nullopt;
    }
    return grown;
}

}  // namespace

// ---- rng ---------------------------------------------------------------------

TEST_CASE("named streams are distinct and reproducible") {
    CHECK(stream_seed(1, "channel") == stream_seed(1, "channel"));
    CHECK(stream_seed(1, "channel") != stream_seed(1, "mobility"));
    CHECK(stream_seed(1, "channel") != stream_seed(2, "channel"));
    CHECK(hash_draw(5, 1, 2, 3) == hash_draw(5, 1, 2, 3));
    CHECK(hash_draw(5, 1, 2, 3) != hash_draw(5, 1, 3, 2));
    auto a = make_engine(9, 0), b = make_engine(9, 0), c = make_engine(9, 1);
    CHECK(a() == b());
    CHECK(make_engine(9, 0)() != c());
}

TEST_CASE("unit draws and bounded integers stay in range and are roughly uniform") {
    auto eng = make_engine(3, 0);
    std::array<int, 7> counts{};
    for (int i = 0; i < 70000; ++i) {
        const double u = uniform(eng, 2.0, 5.0);
        REQUIRE(u >= 2.0);
        REQUIRE(u < 5.0);
        const auto k = uniform_index(eng, 7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (int c : counts) {
        CHECK(std::abs(c - 10000) < 500);
    }
    CHECK(to_unit(0) == 0.0);
    CHECK(to_unit(~std::uint64_t{0}) < 1.0);
}

// ---- geometry ----------------------------------------------------------------

TEST_CASE("segment against oriented rectangle") {
    const Obb box{{0, 0}, {1, 0}, 2.0, 0.9};
    CHECK(segment_hits_obb({-5, 0}, {5, 0}, box));
    CHECK(segment_hits_obb({0, -5}, {0, 5}, box));
    CHECK_FALSE(segment_hits_obb({-5, 1.0}, {5, 1.0}, box));
    // Grazing the long edge is not an intersection.
    CHECK_FALSE(segment_hits_obb({-5, 0.9}, {5, 0.9}, box));
    // Stops short of the box.
    CHECK_FALSE(segment_hits_obb({-5, 0}, {-2.5, 0}, box));
    // Starts inside.
    CHECK(segment_hits_obb({0.5, 0.1}, {10, 10}, box));
    // A rotated box catches a diagonal that misses the axis-aligned one.
    const Obb diag{{0, 0}, heading_vector(45), 2.0, 0.9};
    CHECK(segment_hits_obb({1.2, 1.2}, {1.2, 5.0}, diag));
    CHECK_FALSE(segment_hits_obb({1.2, 1.2}, {1.2, 5.0}, box));
    CHECK(bearing_deg(0, {0, 1}) == doctest::Approx(90));
    CHECK(bearing_deg(90, {1, 0}) == doctest::Approx(-90));
    CHECK(point_in_obb({1.9, 0.8}, box));
    CHECK_FALSE(point_in_obb({2.0, 0.0}, box));
}

// ---- perception --------------------------------------------------------------

TEST_CASE("plate in range ahead is seen, beyond range is not") {
    const Body ego{{0, 0}, 0};
    std::vector<Body> bodies = {ego, body_with_plate_at({12, 0}, 0)};
    const std::vector<std::size_t> all = {0, 1};
    CHECK(is_seen(bodies, 0, 1, kP, all));  // plate 10 m from the camera

    bodies[1] = body_with_plate_at({2 + 66, 0}, 0);
    CHECK_FALSE(is_seen(bodies, 0, 1, kP, all));
    bodies[1] = body_with_plate_at({2 + 65, 0}, 0);
    CHECK(is_seen(bodies, 0, 1, kP, all));
    CHECK_FALSE(is_seen(bodies, 0, 0, kP, all));
}

TEST_CASE("field of view is plus or minus sixty degrees") {
    const Body ego{{0, 0}, 0};
    const Vec2 cam{2, 0};
    for (double deg : {59.0, -59.0}) {
        std::vector<Body> b = {ego, body_with_plate_at(cam + heading_vector(deg) * 30, deg)};
        CHECK(is_seen(b, 0, 1, kP, std::vector<std::size_t>{0, 1}));
    }
    for (double deg : {61.0, -61.0, 180.0}) {
        std::vector<Body> b = {ego, body_with_plate_at(cam + heading_vector(deg) * 30, deg)};
        CHECK_FALSE(is_seen(b, 0, 1, kP, std::vector<std::size_t>{0, 1}));
    }
}

TEST_CASE("a vehicle on the sight line occludes, an offset one does not") {
    const Body ego{{0, 0}, 0};
    const Body target = body_with_plate_at({32, 0}, 0);
    const std::vector<std::size_t> all = {0, 1, 2};
    std::vector<Body> bodies = {ego, target, Body{{15, 0}, 0}};
    CHECK_FALSE(is_seen(bodies, 0, 1, kP, all));
    // Blocker shifted so it covers only part of the plate: one ray gets through.
    bodies[2] = Body{{31, 1.0}, 0};
    CHECK(is_seen(bodies, 0, 1, kP, all));
    bodies[2] = Body{{15, 5}, 0};
    CHECK(is_seen(bodies, 0, 1, kP, all));
    // Blockers outside the occluder list are ignored.
    bodies[2] = Body{{15, 0}, 0};
    CHECK(is_seen(bodies, 0, 1, kP, std::vector<std::size_t>{0, 1}));
}

TEST_CASE("visibility agrees with a dense-ray oracle on random triples") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(-40, 40), head(0, 360);
    int compared = 0, seen = 0, blocked = 0;
    for (int trial = 0; compared < 1000; ++trial) {
        REQUIRE(trial < 5000);
        const Body ego{{0, 0}, head(rng)};
        // Bias targets into the camera cone so most cases exercise occlusion.
        const double bearing = ego.heading_deg + std::uniform_real_distribution<double>(-70, 70)(rng);
        const double dist = std::uniform_real_distribution<double>(5, 70)(rng);
        const Body target{ego.camera(kP) + heading_vector(bearing) * dist, head(rng)};
        const double f = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
        const Vec2 mid = ego.camera(kP) + (target.rear_plate(kP) - ego.camera(kP)) * f;
        const Body blocker{mid + Vec2{pos(rng) / 10, pos(rng) / 10}, head(rng)};
        if (point_in_obb(target.center, blocker.footprint(kP), -2.5) ||
            point_in_obb(ego.center, blocker.footprint(kP), -2.5)) {
            continue;  // overlapping bodies
        }
        const auto expected = oracle_seen(ego, target, blocker);
        if (!expected) {
            continue;
        }
        std::vector<Body> bodies = {ego, target, blocker};
        const bool got = is_seen(bodies, 0, 1, kP, std::vector<std::size_t>{0, 1, 2});
        REQUIRE(got == *expected);
        ++compared;
        seen += got ? 1 : 0;
        blocked += (!got && in_view(ego, target, kP)) ? 1 : 0;
    }
    CHECK(seen > 100);
    CHECK(blocked > 100);
}

TEST_CASE("spatial index returns exactly the bodies within the radius") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(0, 1000);
    std::vector<Body> bodies;
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < 300; ++i) {
        bodies.push_back(Body{{pos(rng), pos(rng)}, 0});
        present.push_back(i);
    }
    SpatialIndex index(75);
    index.build(bodies, present);
    for (int q = 0; q < 50; ++q) {
        const Vec2 at{pos(rng), pos(rng)};
        std::vector<std::size_t> expected;
        for (std::size_t i = 0; i < bodies.size(); ++i) {
            if (distance(bodies[i].center, at) <= 120) expected.push_back(i);
        }
        REQUIRE(index.query(at, 120) == expected);
    }
}

// ---- mobility ------------------------------------------------------------------

TEST_CASE("Manhattan vehicles stay on the lattice and respect their speed") {
    ManhattanParams p;
    ManhattanMobility m(p, 77);
    ManhattanMobility twin(p, 77);
    std::vector<Pose> prev;
    for (std::uint64_t t = 0; t < 600; ++t) {
        m.advance(t);
        twin.advance(t);
        const auto& st = m.states();
        REQUIRE(st.size() == 100);
        for (std::size_t k = 0; k < st.size(); ++k) {
            const auto& s = st[k];
            REQUIRE(s.present);
            REQUIRE(s.pose == twin.states()[k].pose);
            REQUIRE(s.pose.x >= -p.lane_offset_m);
            REQUIRE(s.pose.x <= 1000 + p.lane_offset_m);
            REQUIRE(s.pose.y >= -p.lane_offset_m);
            REQUIRE(s.pose.y <= 1000 + p.lane_offset_m);
            const double h = s.pose.heading_deg;
            REQUIRE((h == 0 || h == 90 || h == 180 || h == 270));
            // Along the travel direction the vehicle sits on a lattice line,
            // shifted sideways into the right-hand lane.
            const double across = (h == 0 || h == 180) ? s.pose.y : s.pose.x;
            const double lane = std::remainder(across, p.block_m);
            REQUIRE(std::abs(std::abs(lane) - p.lane_offset_m) < 1e-9);
            if (t > 0) {
                const double step = std::hypot(s.pose.x - prev[k].x, s.pose.y - prev[k].y);
                // Turning corners shifts lanes by up to 2 * offset.
                REQUIRE(step <= m.speed(k) + 2 * p.lane_offset_m + 1e-9);
                REQUIRE(s.velocity.x == doctest::Approx(s.pose.x - prev[k].x));
            }
            REQUIRE(m.speed(k) >= p.speed_min);
            REQUIRE(m.speed(k) < p.speed_max);
        }
        prev.clear();
        for (const auto& s : st) prev.push_back(s.pose);
    }
    CHECK(m.arrivals() > 0);
    ManhattanMobility first(p, 77), other(p, 78);
    first.advance(0);
    other.advance(0);
    CHECK_FALSE(other.states()[0].pose == first.states()[0].pose);
}

TEST_CASE("invalid Manhattan parameters are rejected") {
    ManhattanParams p;
    p.n_vehicles = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.speed_min = 15;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

// ---- traces ------------------------------------------------------------------

TEST_CASE("handcrafted trace replays poses and velocities") {
    std::ostringstream csv;
    csv << "tick,vehicle_id,x,y,heading_deg\n";
    for (int t = 0; t < 10; ++t) {
        csv << t << ",car-b," << 100 - t << ",50,180\n";
    }
    for (int t = 0; t < 10; ++t) {
        csv << t << ",car-a," << 10 + 2 * t << ",20.5,0\n";
    }
    std::istringstream in(csv.str());
    Trace trace = parse_trace(in);
    REQUIRE(trace.tracks.size() == 2);
    CHECK(trace.tracks[0].vehicle_id == "car-a");
    CHECK(trace.end_tick() == 10);
    TraceMobility m(trace);
    CHECK(m.label(1) == "car-b");
    for (std::uint64_t t = 0; t < 10; ++t) {
        m.advance(t);
        const auto& a = m.states()[0];
        CHECK(a.pose == Pose{10.0 + 2.0 * static_cast<double>(t), 20.5, 0});
        CHECK(a.velocity.x == (t == 0 ? 0.0 : 2.0));
        CHECK(m.states()[1].pose.x == 100.0 - static_cast<double>(t));
    }
    m.advance(10);
    CHECK_FALSE(m.states()[0].present);
}

TEST_CASE("trace errors name the line or the gap") {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_trace(in);
    };
    CHECK_THROWS_AS(parse("tick,vehicle,x,y,heading_deg\n"), ParseError);
    CHECK_THROWS_AS(parse("tick,vehicle_id,x,y,heading_deg\n0,a,1,2\n"), ParseError);
    CHECK_THROWS_AS(parse("tick,vehicle_id,x,y,heading_deg\n0,a,1,two,0\n"), ParseError);
    CHECK_THROWS_AS(parse("tick,vehicle_id,x,y,heading_deg\n0,a,1,2,0\n0,a,1,2,0\n"), ParseError);
    try {
        parse("tick,vehicle_id,x,y,heading_deg\n0,a,1,2,0\n1,a,1,2,0\nx,a,1,2,0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    try {
        parse("tick,vehicle_id,x,y,heading_deg\n0,a,1,2,0\n2,a,1,2,0\n");
        FAIL("expected GapError");
    } catch (const GapError& e) {
        CHECK(e.vehicle() == "a");
        CHECK(e.tick() == 1);
    }
}

TEST_CASE("recorded traces round-trip and reproduce perception exactly") {
    ManhattanParams p;
    p.n_vehicles = 40;
    ManhattanMobility source(p, 3);
    const Trace trace = record_trace(source, 60);
    std::ostringstream out;
    write_trace(out, trace);
    std::istringstream in(out.str());
    const Trace again = parse_trace(in);
    REQUIRE(again.tracks.size() == trace.tracks.size());
    for (std::size_t k = 0; k < trace.tracks.size(); ++k) {
        REQUIRE(again.tracks[k].vehicle_id == trace.tracks[k].vehicle_id);
        REQUIRE(again.tracks[k].poses == trace.tracks[k].poses);
    }
    std::ostringstream out2;
    write_trace(out2, again);
    CHECK(out2.str() == out.str());

    auto spec = scenarios::manhattan_spec("local_only", 60, 3);
    std::get<ManhattanParams>(spec.mobility).n_vehicles = 40;
    World live(spec, std::make_unique<ManhattanMobility>(p, 3));
    World replay(spec, std::make_unique<TraceMobility>(again));
    std::size_t sightings = 0;
    for (std::uint64_t t = 0; t < 60; ++t) {
        live.step(t);
        replay.step(t);
        for (std::size_t i = 0; i < 40; ++i) {
            REQUIRE(live.seen_by(i) == replay.seen_by(i));
            sightings += live.seen_by(i).size();
        }
    }
    CHECK(sightings > 0);
}

// ---- channel and pseudonyms --------------------------------------------------

TEST_CASE("channel delivery respects range and delivery ratio") {
    ChannelParams sure{300, 1.0};
    ChannelParams lossy{300, 0.8};
    int delivered = 0;
    for (std::uint32_t i = 0; i < 10000; ++i) {
        REQUIRE(channel_delivers(42, i, 1, 2, 100, sure));
        REQUIRE_FALSE(channel_delivers(42, i, 1, 2, 301, sure));
        REQUIRE(channel_delivers(42, i, 1, 2, 300, sure));
        delivered += channel_delivers(42, i / 100, i % 100, 7, 120, lossy) ? 1 : 0;
    }
    CHECK(delivered / 10000.0 == doctest::Approx(0.80).epsilon(0.0125));
    CHECK(channel_delivers(42, 5, 1, 2, 10, lossy) == channel_delivers(42, 5, 1, 2, 10, lossy));
}

TEST_CASE("pseudonym changes average one per 43200 ticks") {
    const double p = 1.0 / 43200.0;
    std::uint64_t changes = 0;
    const std::uint32_t vehicles = 400;
    for (std::uint32_t v = 0; v < vehicles; ++v) {
        for (std::uint64_t t = 0; t < 43200; ++t) {
            changes += pseudonym_change_due(stream_seed(1, "pseudonym"), t, v, p) ? 1 : 0;
        }
    }
    // Poisson(400): 4 standard deviations is 80.
    CHECK(changes > 320);
    CHECK(changes < 480);
}

// ---- metric formulas -----------------------------------------------------------

TEST_CASE("verification ratio fixture") {
    IdentitySets s;
    for (std::uint32_t i = 0; i < 10; ++i) s.local.insert(i);
    for (std::uint32_t i = 0; i < 60; ++i) s.received.insert(i);
    for (std::uint32_t i = 0; i < 50; ++i) s.all.insert(i);
    REQUIRE(verification_ratio(s).has_value());
    CHECK(*verification_ratio(s) == doctest::Approx((50.0 - 10.0) / (60.0 - 10.0)));
    CHECK(*verification_ratio(s) == doctest::Approx(0.8));

    IdentitySets none = s;
    none.all = none.local;
    CHECK(*verification_ratio(none) == 0.0);
    IdentitySets every = s;
    every.all = every.received;
    CHECK(*verification_ratio(every) == 1.0);
    IdentitySets empty;
    empty.local = {1, 2};
    empty.received = {1};
    CHECK_FALSE(verification_ratio(empty).has_value());

    IdentitySets run;
    run.received_unseen = {1, 2, 3, 4};
    run.verified_unseen = {1, 2, 3};
    CHECK(*running_verification_ratio(run) == doctest::Approx(0.75));
    CHECK_FALSE(running_verification_ratio(IdentitySets{}).has_value());
}

TEST_CASE("TTV histogram and quantiles") {
    std::vector<TtvSample> samples = {{10, 0}, {11, 2}, {12, 2}, {13, 45}, {3700, 1}};
    const auto hist = ttv_histogram(samples, 1);
    std::map<std::uint64_t, double> percent_by_hour;
    for (const auto& b : hist) percent_by_hour[b.hour] += b.percent;
    CHECK(percent_by_hour[0] == doctest::Approx(100));
    CHECK(percent_by_hour[1] == doctest::Approx(100));
    auto find = [&](std::uint64_t hour, std::uint64_t s) {
        for (const auto& b : hist)
            if (b.hour == hour && b.bucket_start_s == s) return b.count;
        return std::uint64_t{0};
    };
    CHECK(find(0, 0) == 1);
    CHECK(find(0, 2) == 2);
    CHECK(find(0, 30) == 1);  // overflow bucket
    CHECK(find(1, 1) == 1);
    CHECK(*ttv_fraction_within(samples, 1) == doctest::Approx(2.0 / 5));
    CHECK(*ttv_fraction_within(samples, 2, 11) == doctest::Approx(3.0 / 4));
    CHECK_FALSE(ttv_fraction_within(samples, 2, 5000).has_value());
}

TEST_CASE("coverage threshold and steady bandwidth") {
    std::vector<CoverageTick> c = {{0, 0.1, 0}, {1, 0.94, 0}, {2, 0.95, 0}, {3, 0.99, 0}};
    CHECK(*ticks_to_coverage(c, 0.95) == 2);
    CHECK_FALSE(ticks_to_coverage(c, 0.995).has_value());
    BandwidthTick a{0, 2, 2, 0, 0, 30};
    BandwidthTick b{1, 4, 4, 4, 0, 100};
    CHECK(a.mean_bps() == 120);
    CHECK(b.mean_bps() == 200);
    CHECK(steady_bandwidth({a, b}, 0) == 160);
    CHECK(steady_bandwidth({a, b}, 1) == 200);
}

// ---- end-to-end runs -----------------------------------------------------------

TEST_CASE("canonical triangle: both peers verified within the repeat interval at TTV 0") {
    for (const char* mode : {"pot_1s", "pot_3s"}) {
        CAPTURE(mode);
        auto w = scenarios::triangle_world(mode, 8);
        w->step(0);
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(w->seen_by(i).size() == 2);
        }
        const auto repeat = Mode::parse(mode)->repeat_interval;
        for (std::uint64_t t = 1; t < 8; ++t) {
            w->step(t);
        }
        std::map<std::size_t, std::set<std::size_t>> verified;
        for (const auto& e : w->events()) {
            REQUIRE(e.target.has_value());
            CHECK(e.ttv == 0);
            // Proofs start once a peer has been heard (tick 1).
            CHECK(e.tick <= repeat);
            verified[e.verifier].insert(*e.target);
        }
        for (std::size_t i = 0; i < 3; ++i) {
            std::set<std::size_t> peers;
            for (std::size_t j = 0; j < 3; ++j)
                if (j != i) peers.insert(j);
            CHECK(verified[i] == peers);
        }
        const auto r = w->result();
        CHECK(r.summary.verifications == 6);
    }
}

TEST_CASE("conventional triangle: bandwidth is 8 x (15 + 10k) with k = 2") {
    auto w = scenarios::triangle_world("conventional_cps", 5);
    const auto r = w->run();
    REQUIRE(r.bandwidth.size() == 5);
    for (const auto& b : r.bandwidth) {
        CHECK(b.proofs == 0);
        CHECK(b.objects == 6);
        CHECK(b.mean_bps() == 8.0 * (zkpot::wire::kCpmHeaderSize + zkpot::wire::kObjectSize * 2));
        CHECK(b.mean_bps() == 280.0);
    }
}

TEST_CASE("pot triangle: every proof adds exactly 71 x 8 bits") {
    auto w = scenarios::triangle_world("pot_1s", 5);
    const auto r = w->run();
    CHECK(r.summary.bandwidth_arithmetic_exact);
    for (const auto& b : r.bandwidth) {
        CHECK(b.total_bytes == 15 * b.messages + 10 * b.objects + 71 * b.proofs);
        if (b.tick > 0) CHECK(b.proofs == 6);
    }
}

TEST_CASE("a lone vehicle verifies nothing") {
    Trace t;
    t.tracks.push_back({"solo", 0, std::vector<Pose>(20, Pose{10, 10, 0})});
    World w(scenarios::trace_spec("pot_1s", 20), std::make_unique<TraceMobility>(t));
    const auto r = w.run();
    CHECK(r.summary.verifications == 0);
    CHECK(r.diagnostics.proofs_sent == 0);
    CHECK(r.summary.final_coverage == 0.0);
}

TEST_CASE("local-only mode transmits nothing") {
    World w(scenarios::manhattan_spec("local_only", 120));
    const auto r = w.run();
    for (const auto& b : r.bandwidth) {
        REQUIRE(b.messages == 0);
        REQUIRE(b.total_bytes == 0);
        REQUIRE(b.mean_bps() == 0.0);
    }
    for (std::size_t i = 0; i < w.agent_count(); ++i) {
        REQUIRE(w.station(i) == nullptr);
        REQUIRE(w.identities(i).received.empty());
        REQUIRE(w.identities(i).all == w.identities(i).local);
    }
    CHECK(r.summary.final_coverage > 0);
}

TEST_CASE("conventional mode forwards every received object") {
    World w(scenarios::manhattan_spec("conventional_cps", 150));
    const auto r = w.run();
    std::uint64_t objects = 0;
    for (const auto& b : r.bandwidth) {
        REQUIRE(b.proofs == 0);
        objects += b.objects;
    }
    CHECK(objects > 0);
    for (std::size_t i = 0; i < w.agent_count(); ++i) {
        const auto& s = w.identities(i);
        IdentitySet expected = s.local;
        expected.insert(s.received.begin(), s.received.end());
        REQUIRE(s.all == expected);
    }
}

TEST_CASE("pot run keeps N_l within N_a within N_l and N_r") {
    World w(scenarios::manhattan_spec("pot_1s", 200));
    const auto r = w.run();
    CHECK(r.summary.verifications > 0);
    std::size_t with_remote = 0;
    for (std::size_t i = 0; i < w.agent_count(); ++i) {
        const auto& s = w.identities(i);
        for (auto id : s.local) REQUIRE(s.all.contains(id));
        for (auto id : s.all) REQUIRE((s.local.contains(id) || s.received.contains(id)));
        for (auto id : s.verified_unseen) REQUIRE(s.received_unseen.contains(id));
        REQUIRE_FALSE(s.all.contains(static_cast<std::uint32_t>(i)));
        with_remote += s.all.size() > s.local.size() ? 1 : 0;
    }
    CHECK(with_remote > 0);
    // Coverage is the real planner size over the vehicle count.
    double sum = 0;
    for (std::size_t i = 0; i < w.agent_count(); ++i) {
        sum += static_cast<double>(w.identities(i).all.size()) / static_cast<double>(w.agent_count());
    }
    CHECK(r.coverage.back().mean == doctest::Approx(sum / static_cast<double>(w.agent_count())));
}

TEST_CASE("a target's pseudonym change triggers re-verification under the new key") {
    auto w = scenarios::triangle_world("pot_1s", 20);
    for (std::uint64_t t = 0; t < 5; ++t) w->step(t);
    const auto before = w->events().size();
    REQUIRE(before == 6);
    const auto old_pseudonym = w->pseudonym(0);
    w->change_pseudonym(0, 4);
    CHECK(w->pseudonym(0) != old_pseudonym);
    for (std::uint64_t t = 5; t < 10; ++t) w->step(t);
    std::set<std::size_t> reverifiers;
    for (std::size_t k = before; k < w->events().size(); ++k) {
        const auto& e = w->events()[k];
        REQUIRE(e.target.has_value());
        CHECK(*e.target == 0);  // nothing else changed
        reverifiers.insert(e.verifier);
    }
    CHECK(reverifiers == std::set<std::size_t>{1, 2});
    std::uint64_t invalidations = 0;
    for (std::size_t i = 1; i < 3; ++i) invalidations += w->station(i)->diagnostics().invalidations;
    CHECK(invalidations == 2);
    CHECK(w->result().summary.pseudonym_changes == 1);
}

TEST_CASE("attack suite invariants hold on a short Manhattan run") {
    auto spec = scenarios::manhattan_spec("pot_1s", 240, 4);
    spec.attacker_mix.spam = 10;
    spec.attacker_mix.replay = 10;
    World w(spec);
    for (std::uint64_t t = 0; t < spec.duration_ticks; ++t) {
        w.step(t);
        for (std::size_t i = 0; i < w.agent_count(); ++i) {
            const auto k = w.kind(i);
            if (k != AgentKind::PoT) continue;
            for (const auto& [prover, count] : w.station(i)->database().spam_counters) {
                REQUIRE(count <= spec.station.spam_limit);
                REQUIRE(w.station(i)->pending_from(prover) <= spec.station.spam_limit);
            }
        }
    }
    const auto r = w.result();
    CHECK(r.summary.fabricated_in_planner == 0);
    CHECK(r.summary.replay_verifications == 0);
    CHECK(r.summary.max_attacker_pending <= spec.station.spam_limit);
    CHECK(r.summary.max_attacker_pending > 0);
    CHECK(r.diagnostics.spam_rejections + r.diagnostics.recovery_failures > 0);
    for (std::size_t i = 0; i < w.agent_count(); ++i) {
        if (w.kind(i) != AgentKind::PoT) continue;
        for (auto id : w.identities(i).all) REQUIRE(id < kFabricatedBase);
    }
    for (const auto& e : w.events()) {
        CHECK_FALSE(e.replayed);
        CHECK(e.target.has_value());
    }
    std::size_t spam = 0, replay = 0;
    for (std::size_t i = 0; i < w.agent_count(); ++i) {
        spam += w.kind(i) == AgentKind::SpamAttacker ? 1 : 0;
        replay += w.kind(i) == AgentKind::ReplayAttacker ? 1 : 0;
    }
    CHECK(spam == 10);
    CHECK(replay == 10);
}

TEST_CASE("identical runs write identical bytes, serial or threaded") {
    auto spec = scenarios::manhattan_spec("pot_3s", 150, 9);
    spec.attacker_mix.spam = 5;
    spec.attacker_mix.replay = 5;
    spec.pseudonym_change_probability = 1.0 / 200;  // exercise changes in a short run
    auto run_to = [&](const std::string& name, std::uint32_t threads) {
        auto s = spec;
        s.threads = threads;
        World w(s);
        const auto dir = scratch(name);
        write_metrics(w.run(), dir, s.heatmap_cell_m);
        return dir;
    };
    const auto a = run_to("a", 1);
    const auto b = run_to("b", 1);
    const auto c = run_to("c", 4);
    for (const char* f : {"verification_ratio.csv", "ttv_hist.csv", "bandwidth.csv", "coverage.csv", "heatmap.csv"}) {
        CAPTURE(f);
        const auto x = slurp(a / f);
        CHECK_FALSE(x.empty());
        CHECK(x == slurp(b / f));
        CHECK(x == slurp(c / f));
    }
    for (const auto& d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST_CASE("scenario validation and mode names") {
    for (const char* name : {"local_only", "conventional_cps", "pot_1s", "pot_3s", "pot_10s"}) {
        REQUIRE(Mode::parse(name).has_value());
        CHECK(Mode::parse(name)->name() == name);
    }
    for (const char* name : {"pot_0s", "pot_s", "pot_01s", "pot_1", "PoT_1s", ""}) {
        CHECK_FALSE(Mode::parse(name).has_value());
    }
    ScenarioSpec s;
    CHECK_NOTHROW(s.validate());
    s.channel.pdr = 1.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.attacker_mix.spam = 101;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.duration_ticks = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    CHECK(ScenarioSpec{}.steady_start() == 1800);
    auto w = scenarios::triangle_world("pot_1s", 3);
    CHECK_THROWS_AS(w->step(1), std::logic_error);
}
