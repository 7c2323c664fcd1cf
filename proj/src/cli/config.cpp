#include "zkpot/cli/config.hpp"

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace zkpot::cli {

namespace {

namespace pt = boost::property_tree;

// Flat view of a RunConfig: the mobility variant is split into a model
// name plus the fields of both alternatives.
struct Draft {
    RunConfig cfg;
    std::string model = "manhattan";
    sim::ManhattanParams manhattan;
    std::filesystem::path trace_file;
    std::set<std::string> manhattan_keys_set;
};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* b = text.data();
    const char* e = text.data() + text.size();
    auto res = std::from_chars(b, e, value);
    if (res.ec != std::errc{} || res.ptr != e || text.empty()) {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    return value;
}

double parse_real(const std::string& key, const std::string& text) {
    // Accepts a plain number or a fraction such as 1/43200.
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        return parse_number<double>(key, text);
    }
    const double num = parse_number<double>(key, boost::algorithm::trim_copy(text.substr(0, slash)));
    const double den = parse_number<double>(key, boost::algorithm::trim_copy(text.substr(slash + 1)));
    if (den == 0) {
        throw ConfigError(key, "zero denominator");
    }
    return num / den;
}

std::uint32_t parse_u32(const std::string& key, const std::string& text) {
    return parse_number<std::uint32_t>(key, text);
}

std::string real_text(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, [](char c) { return c == ','; });
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) {
            out.push_back(p);
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

struct Field {
    const char* key;
    std::function<std::string(const Draft&)> get;
    std::function<void(Draft&, const std::string& key, const std::string& value)> set;
};

#define ZK_U32(path, member)                                                                          \
    Field {                                                                                           \
        path, [](const Draft& d) { return std::to_string(d.member); },                                \
            [](Draft& d, const std::string& k, const std::string& v) { d.member = parse_u32(k, v); } \
    }
#define ZK_REAL(path, member)                                                                          \
    Field {                                                                                            \
        path, [](const Draft& d) { return real_text(d.member); },                                      \
            [](Draft& d, const std::string& k, const std::string& v) { d.member = parse_real(k, v); } \
    }
#define ZK_MANHATTAN(path, member, parse, render)                                 \
    Field {                                                                       \
        path, [](const Draft& d) { return render(d.manhattan.member); },          \
            [](Draft& d, const std::string& k, const std::string& v) {           \
                d.manhattan.member = parse(k, v);                                 \
                d.manhattan_keys_set.insert(k);                                   \
            }                                                                     \
    }

std::string u32_text(std::uint32_t v) { return std::to_string(v); }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"run.duration_ticks", [](const Draft& d) { return std::to_string(d.cfg.scenario.duration_ticks); },
              [](Draft& d, const std::string& k, const std::string& v) {
                  d.cfg.scenario.duration_ticks = parse_number<std::uint64_t>(k, v);
              }},
        Field{"run.seed", [](const Draft& d) { return std::to_string(d.cfg.scenario.seed); },
              [](Draft& d, const std::string& k, const std::string& v) {
                  d.cfg.scenario.seed = parse_number<std::uint64_t>(k, v);
              }},
        Field{"run.modes", [](const Draft& d) { return join(d.cfg.modes); },
              [](Draft& d, const std::string&, const std::string& v) { d.cfg.modes = split_list(v); }},
        ZK_U32("run.repeats", cfg.repeats),
        Field{"run.output_dir", [](const Draft& d) { return d.cfg.output_dir.generic_string(); },
              [](Draft& d, const std::string& k, const std::string& v) {
                  if (v.empty()) throw ConfigError(k, "must not be empty");
                  d.cfg.output_dir = v;
              }},
        Field{"run.steady_state_start",
              [](const Draft& d) { return std::to_string(d.cfg.scenario.steady_start()); },
              [](Draft& d, const std::string& k, const std::string& v) {
                  d.cfg.scenario.steady_state_start = parse_number<std::uint64_t>(k, v);
              }},
        ZK_REAL("run.heatmap_cell_m", cfg.scenario.heatmap_cell_m),
        ZK_U32("run.threads", cfg.scenario.threads),

        Field{"mobility.model", [](const Draft& d) { return d.model; },
              [](Draft& d, const std::string& k, const std::string& v) {
                  if (v != "manhattan" && v != "trace") {
                      throw ConfigError(k, "expected manhattan or trace, got '" + v + "'");
                  }
                  d.model = v;
              }},
        ZK_MANHATTAN("mobility.rows", rows, parse_u32, u32_text),
        ZK_MANHATTAN("mobility.cols", cols, parse_u32, u32_text),
        ZK_MANHATTAN("mobility.block_m", block_m, parse_real, real_text),
        ZK_MANHATTAN("mobility.n_vehicles", n_vehicles, parse_u32, u32_text),
        ZK_MANHATTAN("mobility.speed_min", speed_min, parse_real, real_text),
        ZK_MANHATTAN("mobility.speed_max", speed_max, parse_real, real_text),
        ZK_MANHATTAN("mobility.lane_offset_m", lane_offset_m, parse_real, real_text),
        Field{"mobility.trace_file", [](const Draft& d) { return d.trace_file.generic_string(); },
              [](Draft& d, const std::string&, const std::string& v) { d.trace_file = v; }},

        ZK_REAL("channel.range_m", cfg.scenario.channel.range_m),
        ZK_REAL("channel.pdr", cfg.scenario.channel.pdr),

        ZK_REAL("perception.range_m", cfg.scenario.perception.range_m),
        ZK_REAL("perception.fov_deg", cfg.scenario.perception.fov_deg),
        ZK_REAL("perception.plate_width_m", cfg.scenario.perception.plate_width_m),
        ZK_REAL("perception.vehicle_length_m", cfg.scenario.perception.vehicle_length_m),
        ZK_REAL("perception.vehicle_width_m", cfg.scenario.perception.vehicle_width_m),

        ZK_U32("station.max_proofs_per_cpm", cfg.scenario.station.max_proofs_per_cpm),
        ZK_U32("station.pending_ttl", cfg.scenario.station.pending_ttl),
        ZK_U32("station.spam_limit", cfg.scenario.station.spam_limit),
        Field{"station.kdf",
              [](const Draft& d) {
                  return std::string(d.cfg.scenario.station.kdf.mode == crypto::KdfMode::PlainHash ? "plain"
                                                                                                   : "iterated");
              },
              [](Draft& d, const std::string& k, const std::string& v) {
                  if (v == "plain") {
                      d.cfg.scenario.station.kdf.mode = crypto::KdfMode::PlainHash;
                  } else if (v == "iterated") {
                      d.cfg.scenario.station.kdf.mode = crypto::KdfMode::IteratedHash;
                  } else {
                      throw ConfigError(k, "expected plain or iterated, got '" + v + "'");
                  }
              }},
        ZK_U32("station.kdf_iterations", cfg.scenario.station.kdf.iterations),

        ZK_REAL("pseudonym.change_probability", cfg.scenario.pseudonym_change_probability),

        ZK_U32("attackers.spam", cfg.scenario.attacker_mix.spam),
        ZK_U32("attackers.replay", cfg.scenario.attacker_mix.replay),
        ZK_U32("attackers.silence", cfg.scenario.attacker_mix.silence),
        ZK_U32("attackers.unconnected", cfg.scenario.attacker_mix.unconnected),
        ZK_U32("attackers.connected", cfg.scenario.attacker_mix.connected),
        ZK_U32("attackers.spam_fabrication_count", cfg.scenario.spam_fabrication_count),
    };
    return table;
}

#undef ZK_U32
#undef ZK_REAL
#undef ZK_MANHATTAN

Draft draft_of(const RunConfig& c) {
    Draft d;
    d.cfg = c;
    if (const auto* m = std::get_if<sim::ManhattanParams>(&c.scenario.mobility)) {
        d.model = "manhattan";
        d.manhattan = *m;
    } else {
        d.model = "trace";
        d.trace_file = std::get<sim::TraceSource>(c.scenario.mobility).path;
    }
    return d;
}

// Leading dotted key of a validation message such as "channel.pdr must be ...".
std::string key_of(const std::string& message) {
    const auto end = message.find_first_of(" :/");
    return message.substr(0, end);
}

}  // namespace

void RunConfig::validate() const {
    if (modes.empty()) {
        throw ConfigError("run.modes", "at least one mode is required");
    }
    std::set<std::string> seen;
    for (const auto& m : modes) {
        if (!sim::Mode::parse(m)) {
            throw ConfigError("run.modes", "unknown mode '" + m + "' (local_only, conventional_cps, pot_<n>s)");
        }
        if (!seen.insert(m).second) {
            throw ConfigError("run.modes", "mode '" + m + "' listed twice");
        }
    }
    if (repeats == 0) {
        throw ConfigError("run.repeats", "must be at least 1");
    }
    if (output_dir.empty()) {
        throw ConfigError("run.output_dir", "must not be empty");
    }
    try {
        scenario.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key_of(e.what()), e.what());
    }
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }

    std::map<std::string, const Field*> by_key;
    for (const auto& f : fields()) {
        by_key.emplace(f.key, &f);
    }

    Draft d;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(section, "keys must be inside a [section]");
        }
        for (const auto& [name, node] : body) {
            const std::string key = section + "." + name;
            auto it = by_key.find(key);
            if (it == by_key.end()) {
                throw ConfigError(key, "unknown key");
            }
            it->second->set(d, key, boost::algorithm::trim_copy(node.data()));
        }
    }

    if (d.model == "trace") {
        if (!d.manhattan_keys_set.empty()) {
            throw ConfigError(*d.manhattan_keys_set.begin(), "only valid with mobility.model = manhattan");
        }
        if (d.trace_file.empty()) {
            throw ConfigError("mobility.trace_file", "required with mobility.model = trace");
        }
        auto path = d.trace_file;
        if (path.is_relative() && !base_dir.empty()) {
            path = base_dir / path;
        }
        d.cfg.scenario.mobility = sim::TraceSource{path};
    } else {
        if (!d.trace_file.empty()) {
            throw ConfigError("mobility.trace_file", "only valid with mobility.model = trace");
        }
        d.cfg.scenario.mobility = d.manhattan;
    }
    if (d.cfg.output_dir.is_relative() && !base_dir.empty()) {
        d.cfg.output_dir = base_dir / d.cfg.output_dir;
    }
    d.cfg.validate();
    return d.cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    return parse_config(in, path.parent_path());
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.output_dir) {
        config.output_dir = *o.output_dir;
    }
    if (!o.modes.empty()) {
        config.modes = o.modes;
    }
    if (o.seed) {
        config.scenario.seed = *o.seed;
    }
    try {
        config.validate();
    } catch (const ConfigError& e) {
        if (e.key() == "run.modes" && !o.modes.empty()) {
            throw ConfigError("--mode", e.what());
        }
        throw;
    }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
    const Draft d = draft_of(config);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) {
        const std::string key = f.key;
        const bool manhattan_only = key.starts_with("mobility.") && key != "mobility.model" &&
                                    key != "mobility.trace_file";
        if (d.model == "trace" && manhattan_only) continue;
        if (d.model == "manhattan" && key == "mobility.trace_file") continue;
        out.emplace_back(key, f.get(d));
    }
    return out;
}

std::string render_config(const RunConfig& config) {
    std::ostringstream out;
    std::string current;
    for (const auto& [key, value] : config_entries(config)) {
        const auto dot = key.find('.');
        const auto section = key.substr(0, dot);
        if (section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << section << "]\n";
            current = section;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace zkpot::cli
