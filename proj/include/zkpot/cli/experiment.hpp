// Runs every (mode, repeat) pair of a configuration and writes the metric
// files, a manifest per run and the cross-mode summary.
#pragma once

#include "zkpot/cli/config.hpp"
#include "zkpot/sim/world.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zkpot::cli {

/// Build version, `git describe` style when the source tree is a checkout.
const char* version_string();

struct RunRecord {
    std::string mode;
    std::uint32_t repeat = 0;
    sim::RunSummary summary;
    double wall_seconds = 0;
    std::filesystem::path directory;
};

struct ModeSummary {
    std::string mode;
    std::uint32_t runs = 0;
    std::optional<double> verification_ratio;          // mean over runs that define it
    std::optional<double> running_verification_ratio;
    std::optional<double> ttv_within_1s, ttv_within_2s, ttv_within_5s;
    double steady_bandwidth_bps = 0;
    std::optional<double> ticks_to_95;  // mean over runs that reach 95 %
    std::uint32_t runs_reaching_95 = 0;
};

std::vector<ModeSummary> summarize(const std::vector<RunRecord>& runs);

void write_summary_csv(std::ostream& out, const std::vector<ModeSummary>& rows);
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void print_summary_table(std::ostream& out, const std::vector<ModeSummary>& rows);

/// One simulation; writes <output_dir>/<mode>/<repeat>/ with the metric CSVs
/// and manifest.json. Throws IoError on write failures.
RunRecord run_one(const RunConfig& config, const std::string& mode, std::uint32_t repeat);

/// All modes x repeats, then summary.csv and runs.csv in output_dir.
/// Progress lines go to `log`.
std::vector<RunRecord> run_experiments(const RunConfig& config, std::ostream& log);

}  // namespace zkpot::cli
