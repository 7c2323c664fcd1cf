#include "zkpot/sim/world.hpp"

#include "zkpot/sim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

namespace zkpot::sim {

namespace {

template <typename F>
void parallel_for(std::size_t n, std::uint32_t threads, F&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(threads, n);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const auto i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::uint64_t oracle_key(std::uint32_t sender, std::uint16_t object) {
    return (std::uint64_t{sender} << 16) | object;
}

bool is_honest(AgentKind k) {
    return k == AgentKind::Unconnected || k == AgentKind::Connected || k == AgentKind::PoT;
}

bool transmits_honestly(AgentKind k) {
    return k == AgentKind::Connected || k == AgentKind::PoT;
}

struct Outgoing {
    std::vector<std::uint8_t> bytes;
    wire::CpmMessage message;
    std::vector<std::uint32_t> ground_truth;  // per object, same order
};

struct ReplayItem {
    wire::ProofEntry entry;
    wire::PerceivedObject object;
    std::uint32_t ground_truth = 0;
    bool known = false;
};

}  // namespace

struct World::Agent {
    std::uint32_t gt = 0;
    AgentKind kind = AgentKind::PoT;
    std::string plate;
    std::uint32_t pseudonym = 0;
    std::unique_ptr<station::Station> station;
    std::mt19937_64 rng;

    IdentitySets sets;
    std::size_t real_all = 0;
    std::vector<std::size_t> seen;
    std::optional<Outgoing> out;
    std::vector<std::size_t> inbox;
    std::vector<ReplayItem> heard_entries;  // filled in receive, replayed next tick
    std::vector<EventRecord> new_events;
};

bool channel_delivers(std::uint64_t channel_seed, std::uint64_t tick, std::uint32_t sender, std::uint32_t receiver,
                      double distance_m, const ChannelParams& channel) {
    if (distance_m > channel.range_m) {
        return false;
    }
    return to_unit(hash_draw(channel_seed, tick, sender, receiver)) < channel.pdr;
}

bool pseudonym_change_due(std::uint64_t pseudonym_seed, std::uint64_t tick, std::uint32_t vehicle, double p) {
    return to_unit(hash_draw(pseudonym_seed, tick, vehicle, 0)) < p;
}

std::unique_ptr<MobilitySource> make_mobility(const ScenarioSpec& spec) {
    if (const auto* m = std::get_if<ManhattanParams>(&spec.mobility)) {
        return std::make_unique<ManhattanMobility>(*m, stream_seed(spec.seed, "mobility"));
    }
    return std::make_unique<TraceMobility>(load_trace(std::get<TraceSource>(spec.mobility).path));
}

World::World(ScenarioSpec spec) : World(spec, make_mobility(spec)) {}

World::World(ScenarioSpec spec, std::unique_ptr<MobilitySource> mobility)
    : spec_(std::move(spec)),
      mobility_(std::move(mobility)),
      backend_(std::make_shared<station::CachingBackend>()),
      index_(std::max(spec_.perception.range_m, spec_.channel.range_m) / 4),
      channel_seed_(stream_seed(spec_.seed, "channel")),
      pseudonym_seed_(stream_seed(spec_.seed, "pseudonym")) {
    spec_.validate();
    if (spec_.attacker_mix.total() > mobility_->vehicle_count()) {
        throw std::invalid_argument("attackers: counts exceed the number of vehicles");
    }
    init_agents();
}

World::~World() = default;

std::uint32_t World::fresh_pseudonym(std::uint64_t a, std::uint64_t b) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        const auto p = static_cast<std::uint32_t>(hash_draw(pseudonym_seed_, a, b, attempt + 1) >> 32);
        if (p != 0 && used_pseudonyms_.insert(p).second) {
            return p;
        }
    }
}

void World::init_agents() {
    const std::size_t n = mobility_->vehicle_count();
    AgentKind base = AgentKind::PoT;
    if (spec_.mode.kind == ModeKind::LocalOnly) base = AgentKind::Unconnected;
    if (spec_.mode.kind == ModeKind::ConventionalCps) base = AgentKind::Connected;

    std::vector<AgentKind> kinds(n, base);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto eng = make_engine(stream_seed(spec_.seed, "attacker"), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[uniform_index(eng, i)]);
    }
    std::size_t pos = 0;
    auto assign = [&](std::uint32_t count, AgentKind k) {
        for (std::uint32_t c = 0; c < count; ++c) kinds[order[pos++]] = k;
    };
    const auto& mix = spec_.attacker_mix;
    assign(mix.spam, AgentKind::SpamAttacker);
    assign(mix.replay, AgentKind::ReplayAttacker);
    assign(mix.silence, AgentKind::SilenceAttacker);
    assign(mix.unconnected, AgentKind::Unconnected);
    assign(mix.connected, AgentKind::Connected);

    const auto pot_cfg = [&] {
        auto c = spec_.station_config();
        c.mode = station::CpsMode::ProofOfTraffic;
        return c;
    }();
    auto conv_cfg = pot_cfg;
    conv_cfg.mode = station::CpsMode::Conventional;

    const auto attacker_seed = stream_seed(spec_.seed, "attacker");
    agents_.reserve(n);
    bodies_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto a = std::make_unique<Agent>();
        a->gt = static_cast<std::uint32_t>(i);
        a->kind = kinds[i];
        a->plate = mobility_->label(i);
        a->pseudonym = fresh_pseudonym(~std::uint64_t{0}, i);
        a->rng = make_engine(attacker_seed, i + 1);
        if (a->kind == AgentKind::Connected) {
            a->station = std::make_unique<station::Station>(conv_cfg, a->pseudonym, backend_);
        } else if (a->kind != AgentKind::Unconnected) {
            a->station = std::make_unique<station::Station>(pot_cfg, a->pseudonym, backend_);
        }
        if (a->kind == AgentKind::SpamAttacker || a->kind == AgentKind::ReplayAttacker) {
            attacker_pseudonyms_.insert(a->pseudonym);
        }
        if (a->kind == AgentKind::ReplayAttacker) {
            replayer_pseudonyms_.insert(a->pseudonym);
        }
        plate_owner_.emplace(a->plate, i);
        agents_.push_back(std::move(a));
        register_key(i);
    }
}

void World::register_key(std::size_t agent) {
    if (spec_.mode.kind != ModeKind::ProofOfTraffic) {
        return;
    }
    const auto& a = *agents_[agent];
    key_owner_.insert_or_assign(backend_->public_key({a.pseudonym, a.plate}, spec_.station.kdf), agent);
}

std::size_t World::agent_count() const { return agents_.size(); }
AgentKind World::kind(std::size_t agent) const { return agents_[agent]->kind; }
std::uint32_t World::pseudonym(std::size_t agent) const { return agents_[agent]->pseudonym; }
const station::Station* World::station(std::size_t agent) const { return agents_[agent]->station.get(); }
const IdentitySets& World::identities(std::size_t agent) const { return agents_[agent]->sets; }
const std::vector<std::size_t>& World::seen_by(std::size_t agent) const { return agents_[agent]->seen; }

void World::change_pseudonym(std::size_t agent, std::uint64_t tick) {
    auto& a = *agents_[agent];
    a.pseudonym = fresh_pseudonym(tick, a.gt);
    if (a.station) {
        a.station->change_pseudonym(a.pseudonym, tick);
    }
    if (a.kind == AgentKind::SpamAttacker || a.kind == AgentKind::ReplayAttacker) {
        attacker_pseudonyms_.insert(a.pseudonym);
    }
    if (a.kind == AgentKind::ReplayAttacker) {
        replayer_pseudonyms_.insert(a.pseudonym);
    }
    register_key(agent);
    ++audit_.pseudonym_changes;
}

std::optional<std::uint32_t> World::oracle_lookup(std::uint64_t tick, std::uint32_t sender,
                                                  std::uint16_t object) const {
    auto t = oracle_.find(tick);
    if (t == oracle_.end()) {
        return std::nullopt;
    }
    auto it = t->second.find(oracle_key(sender, object));
    if (it == t->second.end()) {
        return std::nullopt;
    }
    return it->second;
}

void World::behave(std::size_t idx, std::uint64_t tick) {
    auto& a = *agents_[idx];
    a.out.reset();
    const auto& states = mobility_->states();
    if (!states[idx].present) {
        return;
    }

    // Local perception feeds N_l directly, for every agent.
    for (std::size_t t : a.seen) {
        const auto gt = agents_[t]->gt;
        a.sets.local.insert(gt);
        if (a.sets.all.insert(gt).second) {
            ++a.real_all;
        }
    }
    if (!a.station) {
        return;
    }

    std::vector<station::LocalObservation> obs;
    obs.reserve(a.seen.size());
    for (std::size_t t : a.seen) {
        const auto& target = *agents_[t];
        station::LocalObservation o;
        if (a.station->has_heard(target.pseudonym, tick)) {
            o.pseudonym = target.pseudonym;
        }
        o.plate = target.plate;
        o.dx_m = bodies_[t].center.x - bodies_[idx].center.x;
        o.dy_m = bodies_[t].center.y - bodies_[idx].center.y;
        o.vx_mps = states[t].velocity.x;
        o.vy_mps = states[t].velocity.y;
        obs.push_back(std::move(o));
    }
    a.station->ingest_local_perception(obs, tick);

    Outgoing out;
    switch (a.kind) {
        case AgentKind::Connected:
        case AgentKind::PoT: {
            out.message = a.station->build_cpm(tick);
            for (const auto& o : out.message.objects) {
                auto plate = a.station->tracked_plate(o.object_id);
                out.ground_truth.push_back(plate ? agents_[plate_owner_.at(*plate)]->gt : kFabricatedBase - 1);
            }
            break;
        }
        case AgentKind::SpamAttacker: {
            out.message = wire::CpmMessage{a.pseudonym, tick, {}, {}};
            const double r = spec_.perception.range_m;
            for (std::uint32_t j = 0; j < spec_.spam_fabrication_count; ++j) {
                const double rho = r * std::sqrt(uniform(a.rng, 0.0, 1.0));
                const double phi = uniform(a.rng, 0.0, 2 * std::numbers::pi);
                const double v = uniform(a.rng, 0.0, 14.0);
                const double psi = uniform(a.rng, 0.0, 2 * std::numbers::pi);
                const auto oid = static_cast<std::uint16_t>(j);
                out.message.objects.push_back(wire::PerceivedObject::from_metric(
                    oid, rho * std::cos(phi), rho * std::sin(phi), v * std::cos(psi), v * std::sin(psi)));
                out.ground_truth.push_back(kFabricatedBase + a.gt * spec_.spam_fabrication_count + j);
                if (j < wire::kMaxProofEntries) {
                    wire::ProofEntry e;
                    e.object_id = oid;
                    e.pid_prefix = a.pseudonym;
                    e.v = (a.rng() & 1) != 0;
                    for (auto& b : e.r) b = static_cast<std::uint8_t>(a.rng());
                    for (auto& b : e.s) b = static_cast<std::uint8_t>(a.rng());
                    out.message.proofs.push_back(e);
                }
            }
            break;
        }
        case AgentKind::ReplayAttacker: {
            out.message = wire::CpmMessage{a.pseudonym, tick, {}, {}};
            for (const auto& item : a.heard_entries) {
                if (out.message.proofs.size() == wire::kMaxProofEntries) break;
                const auto clash = std::any_of(out.message.objects.begin(), out.message.objects.end(),
                                               [&](const auto& o) { return o.object_id == item.object.object_id; });
                if (clash) continue;
                out.message.objects.push_back(item.object);
                out.message.proofs.push_back(item.entry);
                out.ground_truth.push_back(item.known ? item.ground_truth : kFabricatedBase - 1);
            }
            break;
        }
        case AgentKind::SilenceAttacker:
        case AgentKind::Unconnected:
            return;
    }
    out.bytes = wire::encode_cpm(out.message);
    a.out = std::move(out);
}

void World::receive(std::size_t idx, std::uint64_t tick) {
    auto& a = *agents_[idx];
    a.new_events.clear();
    if (!a.station) {
        a.inbox.clear();
        return;
    }
    const bool honest = is_honest(a.kind);
    if (a.kind == AgentKind::ReplayAttacker) {
        a.heard_entries.clear();
    }
    for (std::size_t s : a.inbox) {
        const auto& out = *agents_[s]->out;
        const auto& msg = out.message;
        if (honest) {
            for (std::size_t k = 0; k < msg.objects.size(); ++k) {
                const auto gt = out.ground_truth[k];
                if (gt != a.gt && gt != kFabricatedBase - 1) {
                    a.sets.received.insert(gt);
                    if (!a.sets.local.contains(gt)) {
                        a.sets.received_unseen.insert(gt);
                    }
                }
            }
        }
        if (a.kind == AgentKind::ReplayAttacker) {
            for (const auto& e : msg.proofs) {
                for (std::size_t k = 0; k < msg.objects.size(); ++k) {
                    if (msg.objects[k].object_id == e.object_id) {
                        const auto gt = out.ground_truth[k];
                        a.heard_entries.push_back(ReplayItem{e, msg.objects[k], gt, gt != kFabricatedBase - 1});
                    }
                }
            }
        }
        for (const auto& ev : a.station->handle_cpm(msg, tick)) {
            if (!honest) {
                continue;
            }
            EventRecord r;
            r.tick = tick;
            r.verifier = idx;
            if (auto it = key_owner_.find(ev.key); it != key_owner_.end()) {
                r.target = it->second;
            }
            // Others' proofs about the verifier itself are not received
            // objects; like N_r, the metrics leave the self out.
            if (r.target == idx) {
                continue;
            }
            r.ttv = ev.ttv;
            r.ego_knowledge = ev.ego_knowledge;
            r.provers = ev.provers.size();
            r.replayed = std::any_of(ev.provers.begin(), ev.provers.end(),
                                     [&](std::uint32_t p) { return replayer_pseudonyms_.contains(p); });
            a.new_events.push_back(r);
        }
    }
    a.inbox.clear();
    a.station->expire_state(tick);
}

void World::step(std::uint64_t tick) {
    if (last_tick_ ? tick != *last_tick_ + 1 : tick != 0) {
        throw std::logic_error("world: ticks must be stepped in order from 0");
    }
    last_tick_ = tick;

    // (1) mobility
    mobility_->advance(tick);
    const auto& states = mobility_->states();
    present_.clear();
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (states[i].present) {
            bodies_[i] = Body{{states[i].pose.x, states[i].pose.y}, states[i].pose.heading_deg};
            present_.push_back(i);
        }
    }
    index_.build(bodies_, present_);

    // (2) perception
    for (auto& a : agents_) {
        a->seen.clear();
    }
    parallel_for(present_.size(), spec_.threads, [&](std::size_t k) {
        const auto i = present_[k];
        agents_[i]->seen = visible_targets(bodies_, i, index_, spec_.perception);
    });

    // (3) behaviour
    parallel_for(agents_.size(), spec_.threads, [&](std::size_t i) { behave(i, tick); });
    auto& table = oracle_[tick];
    for (const auto& a : agents_) {
        if (!a->out) continue;
        const auto& msg = a->out->message;
        for (std::size_t k = 0; k < msg.objects.size(); ++k) {
            table.emplace(oracle_key(msg.sender_pseudonym, msg.objects[k].object_id), a->out->ground_truth[k]);
        }
    }

    // (4) delivery: every in-range agent with a station draws independently.
    for (std::size_t s : present_) {
        auto& sender = *agents_[s];
        if (!sender.out) continue;
        // Receivers see the decoded bytes, exactly as they went on air.
        sender.out->message = wire::decode_cpm(sender.out->bytes);
        const auto receivers = index_.query(bodies_[s].center, spec_.channel.range_m);
        for (std::size_t r : receivers) {
            if (r == s || !agents_[r]->station) continue;
            const double d = distance(bodies_[s].center, bodies_[r].center);
            if (channel_delivers(channel_seed_, tick, agents_[s]->gt, agents_[r]->gt, d, spec_.channel)) {
                agents_[r]->inbox.push_back(s);
            }
        }
    }

    // (5) receive
    parallel_for(agents_.size(), spec_.threads, [&](std::size_t i) { receive(i, tick); });

    // (6) pseudonym changes
    if (spec_.pseudonym_change_probability > 0) {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            if (pseudonym_change_due(pseudonym_seed_, tick, agents_[i]->gt, spec_.pseudonym_change_probability)) {
                change_pseudonym(i, tick);
            }
        }
    }

    // (7) metrics
    accrue(tick);

    const std::uint64_t keep = spec_.station.pending_ttl + 2;
    while (!oracle_.empty() && oracle_.begin()->first + keep < tick) {
        oracle_.erase(oracle_.begin());
    }
}

void World::accrue(std::uint64_t tick) {
    const auto& states = mobility_->states();
    const double cell = spec_.heatmap_cell_m;
    auto heat = [&](std::size_t i) -> HeatCell& {
        const auto bx = static_cast<std::int64_t>(std::floor(bodies_[i].center.x / cell));
        const auto by = static_cast<std::int64_t>(std::floor(bodies_[i].center.y / cell));
        auto& h = heat_[{bx, by}];
        h.x_bin = bx;
        h.y_bin = by;
        return h;
    };

    BandwidthTick bw;
    bw.tick = tick;
    double cov_sum = 0;
    double cov_min = 1.0;
    std::size_t tracked = 0;
    const double n = static_cast<double>(agents_.size());

    for (std::size_t i = 0; i < agents_.size(); ++i) {
        auto& a = *agents_[i];
        if (a.station) {
            for (const auto& item : a.station->drain_planner()) {
                if (item.source == station::PlannerSource::Local || !is_honest(a.kind)) {
                    continue;
                }
                auto gt = oracle_lookup(item.received_tick, item.sender, item.object.object_id);
                if (!gt || *gt == a.gt || *gt == kFabricatedBase - 1) {
                    continue;
                }
                if (*gt >= kFabricatedBase) {
                    ++audit_.fabricated_in_planner;
                }
                if (a.sets.all.insert(*gt).second && *gt < kFabricatedBase) {
                    ++a.real_all;
                }
                if (!a.sets.local.contains(*gt)) {
                    a.sets.verified_unseen.insert(*gt);
                }
            }
            for (const auto& [prover, count] : a.station->database().spam_counters) {
                if (is_honest(a.kind) && attacker_pseudonyms_.contains(prover)) {
                    audit_.max_attacker_pending = std::max(audit_.max_attacker_pending, count);
                }
            }
        }
        for (const auto& ev : a.new_events) {
            events_.push_back(ev);
            ttv_.push_back(TtvSample{ev.tick, ev.ttv});
            if (ev.replayed) {
                ++audit_.replay_verifications;
            }
            ++heat(i).verifications;
        }
        a.new_events.clear();

        if (!is_honest(a.kind)) {
            continue;
        }
        if (states[i].present) {
            heat(i).sightings += a.seen.size();
        }
        const double c = static_cast<double>(a.real_all) / n;
        cov_sum += c;
        cov_min = std::min(cov_min, c);
        ++tracked;

        if (transmits_honestly(a.kind) && states[i].present) {
            ++bw.transmitters;
            if (a.out) {
                ++bw.messages;
                bw.objects += a.out->message.objects.size();
                bw.proofs += a.out->message.proofs.size();
                bw.total_bytes += a.out->bytes.size();
            }
        }
    }
    if (bw.total_bytes != wire::cpm_size_bytes(0, 0) * bw.messages + wire::kObjectSize * bw.objects +
                              wire::kProofEntrySize * bw.proofs) {
        audit_.bandwidth_arithmetic_exact = false;
    }
    bandwidth_.push_back(bw);
    coverage_.push_back(CoverageTick{tick, tracked ? cov_sum / static_cast<double>(tracked) : 0.0,
                                     tracked ? cov_min : 0.0});
}

RunResult World::run() {
    const std::uint64_t start = last_tick_ ? *last_tick_ + 1 : 0;
    for (std::uint64_t t = start; t < spec_.duration_ticks; ++t) {
        step(t);
    }
    return result();
}

RunResult World::result() const {
    RunResult r;
    r.summary = audit_;
    auto& s = r.summary;
    s.mode = spec_.mode.name();
    s.seed = spec_.seed;
    s.duration_ticks = spec_.duration_ticks;
    s.steady_start = spec_.steady_start();
    s.vehicles = agents_.size();

    double ratio_sum = 0;
    std::size_t ratio_n = 0;
    double running_sum = 0;
    std::size_t running_n = 0;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const auto& a = *agents_[i];
        if (!is_honest(a.kind)) {
            continue;
        }
        VehicleSummary v;
        v.vehicle = i;
        v.label = a.plate;
        v.kind = to_string(a.kind);
        v.n_local = a.sets.local.size();
        v.n_received = a.sets.received.size();
        v.n_all = a.sets.all.size();
        v.n_received_unseen = a.sets.received_unseen.size();
        v.n_verified_unseen = a.sets.verified_unseen.size();
        v.ratio = verification_ratio(a.sets);
        v.running_ratio = running_verification_ratio(a.sets);
        if (v.ratio) {
            ratio_sum += *v.ratio;
            ++ratio_n;
        }
        if (v.running_ratio) {
            running_sum += *v.running_ratio;
            ++running_n;
        }
        r.vehicles.push_back(std::move(v));
        if (a.station) {
            const auto& d = a.station->diagnostics();
            auto& t = r.diagnostics;
            t.received_objects += d.received_objects;
            t.released_objects += d.released_objects;
            t.expired_objects += d.expired_objects;
            t.rejected_objects += d.rejected_objects;
            t.proofs_received += d.proofs_received;
            t.proofs_sent += d.proofs_sent;
            t.recovery_failures += d.recovery_failures;
            t.spam_rejections += d.spam_rejections;
            t.refreshes += d.refreshes;
            t.expired_proofs += d.expired_proofs;
            t.verifications += d.verifications;
            t.ego_verifications += d.ego_verifications;
            t.invalidations += d.invalidations;
        }
    }
    if (ratio_n > 0) {
        s.mean_verification_ratio = ratio_sum / static_cast<double>(ratio_n);
    }
    if (running_n > 0) {
        s.mean_running_verification_ratio = running_sum / static_cast<double>(running_n);
    }

    r.ttv = ttv_;
    r.bandwidth = bandwidth_;
    r.coverage = coverage_;
    for (const auto& [bin, cell] : heat_) {
        r.heatmap.push_back(cell);
    }
    s.verifications = ttv_.size();
    s.ttv_samples = static_cast<std::uint64_t>(std::count_if(
        ttv_.begin(), ttv_.end(), [&](const TtvSample& t) { return t.tick >= s.steady_start; }));
    s.ttv_within_1s = ttv_fraction_within(ttv_, 1, s.steady_start);
    s.ttv_within_2s = ttv_fraction_within(ttv_, 2, s.steady_start);
    s.ttv_within_5s = ttv_fraction_within(ttv_, 5, s.steady_start);
    s.steady_bandwidth_bps = steady_bandwidth(bandwidth_, s.steady_start);
    s.ticks_to_95 = ticks_to_coverage(coverage_, 0.95);
    s.final_coverage = coverage_.empty() ? 0.0 : coverage_.back().mean;
    return r;
}

void write_metrics(const RunResult& result, const std::filesystem::path& dir, double heatmap_cell_m) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
        return f;
    };
    {
        auto f = open("verification_ratio.csv");
        write_verification_csv(f, result.vehicles);
    }
    {
        auto f = open("ttv_hist.csv");
        write_ttv_csv(f, ttv_histogram(result.ttv, 1));
    }
    {
        auto f = open("bandwidth.csv");
        write_bandwidth_csv(f, result.bandwidth);
    }
    {
        auto f = open("coverage.csv");
        write_coverage_csv(f, result.coverage);
    }
    {
        auto f = open("heatmap.csv");
        write_heatmap_csv(f, heatmap_cell_m, result.heatmap);
    }
}

}  // namespace zkpot::sim
