// Discrete-time world: one tick is one simulated second.
//
// Phase order within a tick: mobility, perception, behaviour (CPM
// construction), delivery, receive, pseudonym changes, metrics.
#pragma once

#include "zkpot/sim/metrics.hpp"
#include "zkpot/sim/mobility.hpp"
#include "zkpot/sim/perception.hpp"
#include "zkpot/sim/scenario.hpp"
#include "zkpot/station/station.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace zkpot::sim {

/// Ground-truth ids at or above this value denote fabricated objects.
inline constexpr std::uint32_t kFabricatedBase = 1u << 30;

struct EventRecord {
    std::uint64_t tick = 0;
    std::size_t verifier = 0;
    std::optional<std::size_t> target;  // vehicle index owning the verified key, if real
    std::uint64_t ttv = 0;
    bool ego_knowledge = false;
    std::size_t provers = 0;
    bool replayed = false;  // a replaying attacker's pseudonym is among the provers
};

struct RunSummary {
    std::string mode;
    std::uint64_t seed = 0;
    std::uint64_t duration_ticks = 0;
    std::uint64_t steady_start = 0;
    std::size_t vehicles = 0;

    std::optional<std::uint64_t> ticks_to_95;
    std::optional<double> mean_verification_ratio;          // final sets
    std::optional<double> mean_running_verification_ratio;  // accumulated differences
    std::uint64_t ttv_samples = 0;
    std::optional<double> ttv_within_1s, ttv_within_2s, ttv_within_5s;  // steady-state window
    double steady_bandwidth_bps = 0;
    double final_coverage = 0;

    std::uint64_t verifications = 0;
    std::uint64_t pseudonym_changes = 0;
    std::uint64_t fabricated_in_planner = 0;
    std::uint64_t replay_verifications = 0;
    std::uint32_t max_attacker_pending = 0;
    bool bandwidth_arithmetic_exact = true;
};

struct RunResult {
    RunSummary summary;
    std::vector<VehicleSummary> vehicles;
    std::vector<TtvSample> ttv;
    std::vector<BandwidthTick> bandwidth;
    std::vector<CoverageTick> coverage;
    std::vector<HeatCell> heatmap;
    station::Diagnostics diagnostics;  // summed over honest stations
};

std::unique_ptr<MobilitySource> make_mobility(const ScenarioSpec& spec);

/// Channel draw for one (sender, receiver) pair at one tick: in range and an
/// independent Bernoulli(pdr) success.
bool channel_delivers(std::uint64_t channel_seed, std::uint64_t tick, std::uint32_t sender, std::uint32_t receiver,
                      double distance_m, const ChannelParams& channel);

/// Per-tick pseudonym change draw for one vehicle.
bool pseudonym_change_due(std::uint64_t pseudonym_seed, std::uint64_t tick, std::uint32_t vehicle, double p);

class World {
public:
    explicit World(ScenarioSpec spec);
    World(ScenarioSpec spec, std::unique_ptr<MobilitySource> mobility);
    ~World();
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    /// Advances one tick; ticks must be visited as 0, 1, 2, ...
    void step(std::uint64_t tick);
    /// Steps through every remaining tick of the scenario.
    RunResult run();
    RunResult result() const;

    const ScenarioSpec& spec() const { return spec_; }
    std::size_t agent_count() const;
    AgentKind kind(std::size_t agent) const;
    std::uint32_t pseudonym(std::size_t agent) const;
    const station::Station* station(std::size_t agent) const;
    const IdentitySets& identities(std::size_t agent) const;
    /// Targets the agent saw in the last tick, ascending.
    const std::vector<std::size_t>& seen_by(std::size_t agent) const;
    const std::vector<EventRecord>& events() const { return events_; }
    const std::vector<Body>& bodies() const { return bodies_; }

    /// Changes an agent's pseudonym outside the random schedule.
    void change_pseudonym(std::size_t agent, std::uint64_t tick);

private:
    struct Agent;

    void init_agents();
    std::uint32_t fresh_pseudonym(std::uint64_t a, std::uint64_t b);
    void register_key(std::size_t agent);
    void behave(std::size_t agent, std::uint64_t tick);
    void receive(std::size_t agent, std::uint64_t tick);
    void accrue(std::uint64_t tick);
    std::optional<std::uint32_t> oracle_lookup(std::uint64_t tick, std::uint32_t sender, std::uint16_t object) const;

    ScenarioSpec spec_;
    std::unique_ptr<MobilitySource> mobility_;
    std::shared_ptr<station::CachingBackend> backend_;
    std::vector<std::unique_ptr<Agent>> agents_;
    std::vector<Body> bodies_;
    std::vector<std::size_t> present_;
    SpatialIndex index_;
    std::uint64_t channel_seed_;
    std::uint64_t pseudonym_seed_;
    std::optional<std::uint64_t> last_tick_;

    std::set<std::uint32_t> used_pseudonyms_;
    std::set<std::uint32_t> attacker_pseudonyms_;
    std::set<std::uint32_t> replayer_pseudonyms_;
    std::map<crypto::PublicPoint, std::size_t> key_owner_;
    std::map<std::string, std::size_t> plate_owner_;
    // (tick) -> (sender pseudonym << 16 | object_id) -> ground truth id
    std::map<std::uint64_t, std::unordered_map<std::uint64_t, std::uint32_t>> oracle_;

    std::vector<EventRecord> events_;
    std::vector<TtvSample> ttv_;
    std::vector<BandwidthTick> bandwidth_;
    std::vector<CoverageTick> coverage_;
    std::map<std::pair<std::int64_t, std::int64_t>, HeatCell> heat_;
    RunSummary audit_;
};

/// Writes verification_ratio.csv, ttv_hist.csv, bandwidth.csv, coverage.csv
/// and heatmap.csv into `dir`, creating it if needed.
void write_metrics(const RunResult& result, const std::filesystem::path& dir, double heatmap_cell_m);

}  // namespace zkpot::sim
