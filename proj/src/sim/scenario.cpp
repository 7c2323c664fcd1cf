#include "zkpot/sim/scenario.hpp"

#include <charconv>
#include <stdexcept>

namespace zkpot::sim {

void ChannelParams::validate() const {
    if (!(range_m > 0)) throw std::invalid_argument("channel.range_m must be positive");
    if (!(pdr >= 0 && pdr <= 1)) throw std::invalid_argument("channel.pdr must be in [0, 1]");
}

std::string Mode::name() const {
    switch (kind) {
        case ModeKind::LocalOnly:
            return "local_only";
        case ModeKind::ConventionalCps:
            return "conventional_cps";
        case ModeKind::ProofOfTraffic:
            return "pot_" + std::to_string(repeat_interval) + "s";
    }
    return "unknown";
}

std::optional<Mode> Mode::parse(const std::string& name) {
    if (name == "local_only") return Mode{ModeKind::LocalOnly, 3};
    if (name == "conventional_cps") return Mode{ModeKind::ConventionalCps, 3};
    if (name.size() > 5 && name.starts_with("pot_") && name.back() == 's') {
        std::uint32_t r = 0;
        const char* b = name.data() + 4;
        const char* e = name.data() + name.size() - 1;
        auto res = std::from_chars(b, e, r);
        if (res.ec == std::errc{} && res.ptr == e && r > 0 && std::to_string(r) == std::string(b, e)) {
            return Mode{ModeKind::ProofOfTraffic, r};
        }
    }
    return std::nullopt;
}

const char* to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::Unconnected: return "unconnected";
        case AgentKind::Connected: return "connected";
        case AgentKind::PoT: return "pot";
        case AgentKind::SpamAttacker: return "spam_attacker";
        case AgentKind::ReplayAttacker: return "replay_attacker";
        case AgentKind::SilenceAttacker: return "silence_attacker";
    }
    return "unknown";
}

void ScenarioSpec::validate() const {
    if (duration_ticks < 1) throw std::invalid_argument("run.duration_ticks must be at least 1");
    if (const auto* m = std::get_if<ManhattanParams>(&mobility)) {
        m->validate();
        if (attacker_mix.total() > m->n_vehicles) {
            throw std::invalid_argument("attackers: counts exceed mobility.n_vehicles");
        }
    } else if (std::get<TraceSource>(mobility).path.empty()) {
        throw std::invalid_argument("mobility.trace_file must not be empty");
    }
    if (mode.kind == ModeKind::ProofOfTraffic && mode.repeat_interval == 0) {
        throw std::invalid_argument("run.mode repeat interval must be positive");
    }
    channel.validate();
    perception.validate();
    station_config().validate();
    if (!(pseudonym_change_probability >= 0 && pseudonym_change_probability <= 1)) {
        throw std::invalid_argument("pseudonym.change_probability must be in [0, 1]");
    }
    if (spam_fabrication_count > 0xFFFF) {
        throw std::invalid_argument("attackers.spam_fabrication_count too large");
    }
    if (!(heatmap_cell_m > 0)) throw std::invalid_argument("run.heatmap_cell_m must be positive");
    if (threads == 0) throw std::invalid_argument("run.threads must be positive");
}

station::StationConfig ScenarioSpec::station_config() const {
    auto c = station;
    if (mode.kind == ModeKind::ProofOfTraffic) {
        c.proof_repeat_interval = mode.repeat_interval;
    }
    return c;
}

}  // namespace zkpot::sim
