#include "zkpot/cli/experiment.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#ifndef ZKPOT_VERSION
#define ZKPOT_VERSION "unknown"
#endif

namespace zkpot::cli {

namespace {

using nlohmann::ordered_json;

std::string opt_fixed(const std::optional<double>& v, int digits = 6) {
    return v ? sim::fixed(*v, digits) : std::string();
}

ordered_json opt_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json summary_json(const sim::RunSummary& s) {
    ordered_json j;
    j["mode"] = s.mode;
    j["seed"] = s.seed;
    j["duration_ticks"] = s.duration_ticks;
    j["steady_state_start"] = s.steady_start;
    j["vehicles"] = s.vehicles;
    j["ticks_to_95_coverage"] = s.ticks_to_95 ? ordered_json(*s.ticks_to_95) : ordered_json(nullptr);
    j["final_coverage"] = s.final_coverage;
    j["mean_verification_ratio"] = opt_json(s.mean_verification_ratio);
    j["mean_running_verification_ratio"] = opt_json(s.mean_running_verification_ratio);
    j["ttv_samples_steady"] = s.ttv_samples;
    j["ttv_within_1s"] = opt_json(s.ttv_within_1s);
    j["ttv_within_2s"] = opt_json(s.ttv_within_2s);
    j["ttv_within_5s"] = opt_json(s.ttv_within_5s);
    j["steady_bandwidth_bps"] = s.steady_bandwidth_bps;
    j["verifications"] = s.verifications;
    j["pseudonym_changes"] = s.pseudonym_changes;
    j["fabricated_in_planner"] = s.fabricated_in_planner;
    j["replay_verifications"] = s.replay_verifications;
    j["max_attacker_pending"] = s.max_attacker_pending;
    j["bandwidth_arithmetic_exact"] = s.bandwidth_arithmetic_exact;
    return j;
}

ordered_json diagnostics_json(const station::Diagnostics& d) {
    ordered_json j;
    j["received_objects"] = d.received_objects;
    j["released_objects"] = d.released_objects;
    j["expired_objects"] = d.expired_objects;
    j["rejected_objects"] = d.rejected_objects;
    j["proofs_received"] = d.proofs_received;
    j["proofs_sent"] = d.proofs_sent;
    j["recovery_failures"] = d.recovery_failures;
    j["spam_rejections"] = d.spam_rejections;
    j["refreshes"] = d.refreshes;
    j["expired_proofs"] = d.expired_proofs;
    j["verifications"] = d.verifications;
    j["ego_verifications"] = d.ego_verifications;
    j["invalidations"] = d.invalidations;
    return j;
}

template <typename Get>
std::optional<double> mean_of(const std::vector<const RunRecord*>& runs, Get get) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto* r : runs) {
        if (auto v = get(*r)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text) || !f.flush()) {
        throw IoError("cannot write " + path.string());
    }
}

}  // namespace

const char* version_string() { return ZKPOT_VERSION; }

RunRecord run_one(const RunConfig& config, const std::string& mode, std::uint32_t repeat) {
    RunRecord rec;
    rec.mode = mode;
    rec.repeat = repeat;
    rec.directory = config.output_dir / mode / std::to_string(repeat);

    sim::ScenarioSpec spec = config.scenario;
    spec.mode = *sim::Mode::parse(mode);
    spec.seed = config.scenario.seed + repeat;

    const auto start = std::chrono::steady_clock::now();
    std::unique_ptr<sim::World> world;
    try {
        world = std::make_unique<sim::World>(spec);
    } catch (const std::runtime_error& e) {
        // Unreadable or malformed trace file.
        throw IoError(e.what());
    }
    const sim::RunResult result = world->run();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.summary = result.summary;

    try {
        sim::write_metrics(result, rec.directory, spec.heatmap_cell_m);
    } catch (const std::exception& e) {
        throw IoError(e.what());
    }

    RunConfig effective = config;
    effective.scenario = spec;
    effective.modes = {mode};
    ordered_json config_json = ordered_json::object();
    for (const auto& [key, value] : config_entries(effective)) {
        const auto dot = key.find('.');
        config_json[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
    ordered_json manifest;
    manifest["tool"] = "zkpot";
    manifest["version"] = version_string();
    manifest["mode"] = mode;
    manifest["repeat"] = repeat;
    manifest["seed"] = spec.seed;
    manifest["wall_time_s"] = rec.wall_seconds;
    manifest["config"] = config_json;
    manifest["summary"] = summary_json(result.summary);
    manifest["diagnostics"] = diagnostics_json(result.diagnostics);
    manifest["files"] = {"verification_ratio.csv", "ttv_hist.csv", "bandwidth.csv", "coverage.csv", "heatmap.csv"};
    write_text(rec.directory / "manifest.json", manifest.dump(2) + "\n");
    return rec;
}

std::vector<ModeSummary> summarize(const std::vector<RunRecord>& runs) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunRecord*>> by_mode;
    for (const auto& r : runs) {
        if (by_mode[r.mode].empty()) order.push_back(r.mode);
        by_mode[r.mode].push_back(&r);
    }
    std::vector<ModeSummary> out;
    for (const auto& mode : order) {
        const auto& rs = by_mode[mode];
        ModeSummary m;
        m.mode = mode;
        m.runs = static_cast<std::uint32_t>(rs.size());
        m.verification_ratio = mean_of(rs, [](const RunRecord& r) { return r.summary.mean_verification_ratio; });
        m.running_verification_ratio =
            mean_of(rs, [](const RunRecord& r) { return r.summary.mean_running_verification_ratio; });
        m.ttv_within_1s = mean_of(rs, [](const RunRecord& r) { return r.summary.ttv_within_1s; });
        m.ttv_within_2s = mean_of(rs, [](const RunRecord& r) { return r.summary.ttv_within_2s; });
        m.ttv_within_5s = mean_of(rs, [](const RunRecord& r) { return r.summary.ttv_within_5s; });
        m.steady_bandwidth_bps =
            *mean_of(rs, [](const RunRecord& r) { return std::optional<double>(r.summary.steady_bandwidth_bps); });
        m.ticks_to_95 = mean_of(rs, [](const RunRecord& r) -> std::optional<double> {
            if (!r.summary.ticks_to_95) return std::nullopt;
            return static_cast<double>(*r.summary.ticks_to_95);
        });
        for (const auto* r : rs) m.runs_reaching_95 += r->summary.ticks_to_95 ? 1 : 0;
        out.push_back(std::move(m));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<ModeSummary>& rows) {
    out << "mode,runs,mean_verification_ratio,mean_running_verification_ratio,ttv_within_1s,ttv_within_2s,"
           "ttv_within_5s,steady_bandwidth_bps,ticks_to_95_coverage,runs_reaching_95\n";
    for (const auto& m : rows) {
        out << m.mode << ',' << m.runs << ',' << opt_fixed(m.verification_ratio) << ','
            << opt_fixed(m.running_verification_ratio) << ',' << opt_fixed(m.ttv_within_1s) << ','
            << opt_fixed(m.ttv_within_2s) << ',' << opt_fixed(m.ttv_within_5s) << ','
            << sim::fixed(m.steady_bandwidth_bps, 3) << ',' << opt_fixed(m.ticks_to_95, 1) << ','
            << m.runs_reaching_95 << '\n';
    }
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
    out << "mode,repeat,seed,mean_verification_ratio,mean_running_verification_ratio,ttv_within_1s,ttv_within_2s,"
           "ttv_within_5s,steady_bandwidth_bps,ticks_to_95_coverage,final_coverage,verifications\n";
    for (const auto& r : runs) {
        const auto& s = r.summary;
        out << r.mode << ',' << r.repeat << ',' << s.seed << ',' << opt_fixed(s.mean_verification_ratio) << ','
            << opt_fixed(s.mean_running_verification_ratio) << ',' << opt_fixed(s.ttv_within_1s) << ','
            << opt_fixed(s.ttv_within_2s) << ',' << opt_fixed(s.ttv_within_5s) << ','
            << sim::fixed(s.steady_bandwidth_bps, 3) << ','
            << (s.ticks_to_95 ? std::to_string(*s.ticks_to_95) : std::string()) << ','
            << sim::fixed(s.final_coverage) << ',' << s.verifications << '\n';
    }
}

void print_summary_table(std::ostream& out, const std::vector<ModeSummary>& rows) {
    auto cell = [](const std::optional<double>& v, int digits) { return v ? sim::fixed(*v, digits) : "-"; };
    out << std::left << std::setw(18) << "mode" << std::right << std::setw(6) << "runs" << std::setw(9) << "R_veri"
        << std::setw(9) << "ttv<=1" << std::setw(9) << "ttv<=2" << std::setw(9) << "ttv<=5" << std::setw(12)
        << "bw bps" << std::setw(10) << "t95 s" << '\n';
    for (const auto& m : rows) {
        out << std::left << std::setw(18) << m.mode << std::right << std::setw(6) << m.runs << std::setw(9)
            << cell(m.running_verification_ratio, 3) << std::setw(9) << cell(m.ttv_within_1s, 3) << std::setw(9)
            << cell(m.ttv_within_2s, 3) << std::setw(9) << cell(m.ttv_within_5s, 3) << std::setw(12)
            << sim::fixed(m.steady_bandwidth_bps, 1) << std::setw(10) << cell(m.ticks_to_95, 0) << '\n';
    }
}

std::vector<RunRecord> run_experiments(const RunConfig& config, std::ostream& log) {
    config.validate();
    try {
        std::filesystem::create_directories(config.output_dir);
    } catch (const std::filesystem::filesystem_error& e) {
        throw IoError(e.what());
    }
    std::vector<RunRecord> runs;
    for (const auto& mode : config.modes) {
        for (std::uint32_t i = 0; i < config.repeats; ++i) {
            runs.push_back(run_one(config, mode, i));
            const auto& r = runs.back();
            log << mode << " repeat " << i << " seed " << r.summary.seed << ": " << sim::fixed(r.wall_seconds, 1)
                << " s -> " << r.directory.generic_string() << '\n';
        }
    }
    const auto rows = summarize(runs);
    std::ostringstream summary, per_run;
    write_summary_csv(summary, rows);
    write_runs_csv(per_run, runs);
    write_text(config.output_dir / "summary.csv", summary.str());
    write_text(config.output_dir / "runs.csv", per_run.str());
    print_summary_table(log, rows);
    return runs;
}

}  // namespace zkpot::cli
