#pragma once

#include "zkpot/sim/mobility.hpp"
#include "zkpot/sim/perception.hpp"
#include "zkpot/station/station.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace zkpot::sim {

struct TraceSource {
    std::filesystem::path path;
};

using MobilitySpec = std::variant<ManhattanParams, TraceSource>;

struct ChannelParams {
    double range_m = 300.0;
    double pdr = 0.80;

    void validate() const;
};

enum class ModeKind { LocalOnly, ConventionalCps, ProofOfTraffic };

struct Mode {
    ModeKind kind = ModeKind::ProofOfTraffic;
    std::uint32_t repeat_interval = 3;  // ProofOfTraffic only

    /// local_only, conventional_cps, pot_<n>s
    std::string name() const;
    /// Inverse of name(); nullopt for anything else.
    static std::optional<Mode> parse(const std::string& name);

    friend bool operator==(const Mode&, const Mode&) = default;
};

enum class AgentKind { Unconnected, Connected, PoT, SpamAttacker, ReplayAttacker, SilenceAttacker };

const char* to_string(AgentKind kind);

/// Vehicles of each special kind; the rest take the mode's default kind.
struct AttackerMix {
    std::uint32_t spam = 0;
    std::uint32_t replay = 0;
    std::uint32_t silence = 0;
    std::uint32_t unconnected = 0;
    std::uint32_t connected = 0;

    std::uint32_t total() const { return spam + replay + silence + unconnected + connected; }
};

struct ScenarioSpec {
    MobilitySpec mobility = ManhattanParams{};
    std::uint64_t duration_ticks = 7200;
    std::uint64_t seed = 1;
    Mode mode;
    ChannelParams channel;
    PerceptionParams perception;
    AttackerMix attacker_mix;
    /// Proof repeat interval comes from `mode`; the rest from here.
    station::StationConfig station;
    std::uint32_t spam_fabrication_count = 8;
    double pseudonym_change_probability = 1.0 / 43200.0;
    /// First tick of the steady-state window; defaults to duration / 4.
    std::optional<std::uint64_t> steady_state_start;
    double heatmap_cell_m = 50.0;
    /// Worker threads for the per-agent phases; results do not depend on it.
    std::uint32_t threads = 1;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    std::uint64_t steady_start() const { return steady_state_start.value_or(duration_ticks / 4); }
    station::StationConfig station_config() const;
};

}  // namespace zkpot::sim
