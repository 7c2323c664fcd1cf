// Experiment configuration: an INI-style file with [run], [mobility],
// [channel], [perception], [station], [pseudonym] and [attackers] sections.
// Every key is optional; defaults are the ScenarioSpec defaults.
#pragma once

#include "zkpot/sim/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zkpot::cli {

/// Schema violation. `key()` is the dotted path of the offending entry
/// (for example "run.modes"), or the flag name for command-line overrides.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    sim::ScenarioSpec scenario;
    std::filesystem::path output_dir = "results";
    std::vector<std::string> modes = {"conventional_cps", "pot_1s", "pot_3s", "local_only"};
    std::uint32_t repeats = 1;  // repeat i runs with seed + i

    /// Re-checks everything parse_config checks.
    void validate() const;
};

/// Relative paths in the file (trace_file, output_dir) resolve against
/// `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
/// Throws IoError when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

struct Overrides {
    std::optional<std::filesystem::path> output_dir;
    std::vector<std::string> modes;  // replaces the file's list when non-empty
    std::optional<std::uint64_t> seed;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Every setting as (dotted key, value text), in file order. Feeding the
/// rendered form back through parse_config reproduces the configuration.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
std::string render_config(const RunConfig& config);

}  // namespace zkpot::cli
