// zkpot: experiment runner and conformance-vector utility.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 I/O error.

#include "zkpot/cli/config.hpp"
#include "zkpot/cli/experiment.hpp"
#include "zkpot/cli/vectors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

enum Exit : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kIoError = 3 };

int cmd_run(const std::string& config_path, const zkpot::cli::Overrides& overrides) {
    auto config = zkpot::cli::load_config(config_path);
    zkpot::cli::apply_overrides(config, overrides);
    zkpot::cli::run_experiments(config, std::cout);
    return kOk;
}

int cmd_gen(std::uint32_t count, std::uint64_t seed, const std::string& output) {
    if (output.empty() || output == "-") {
        zkpot::cli::generate_vectors(std::cout, count, seed);
        return std::cout.flush() ? kOk : kIoError;
    }
    std::ofstream f(output, std::ios::binary | std::ios::trunc);
    if (!f) throw zkpot::cli::IoError("cannot open " + output);
    zkpot::cli::generate_vectors(f, count, seed);
    if (!f.flush()) throw zkpot::cli::IoError("cannot write " + output);
    return kOk;
}

int cmd_check(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw zkpot::cli::IoError("cannot open " + path);
    const auto report = zkpot::cli::check_vectors(f);
    if (f.bad()) throw zkpot::cli::IoError("read error on " + path);
    if (report.failure) {
        std::cerr << "record " << report.failure->index << ": " << report.failure->reason << '\n';
        return kVerifyFailed;
    }
    std::cout << report.checked << " records ok\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proof-of-traffic experiment runner"};
    app.set_version_flag("--version", std::string(zkpot::cli::version_string()));
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    zkpot::cli::Overrides overrides;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run every configured mode and repeat");
    run->add_option("config", config_path, "Configuration file")->required();
    auto* output_opt = run->add_option("--output", output_dir, "Output directory (overrides run.output_dir)");
    run->add_option("--mode", overrides.modes, "Mode to run; repeatable (overrides run.modes)")
        ->allow_extra_args(false);
    auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides run.seed)");

    auto* vectors = app.add_subcommand("vectors", "Conformance vectors");
    vectors->require_subcommand(1);
    std::uint32_t count = 0;
    std::uint64_t vec_seed = 0;
    std::string vec_output;
    auto* gen = vectors->add_subcommand("gen", "Write a vector file");
    gen->add_option("--count", count, "Number of records")->required();
    gen->add_option("--seed", vec_seed, "Generator seed")->required();
    gen->add_option("--output,-o", vec_output, "Output file (default stdout)");
    std::string check_path;
    auto* check = vectors->add_subcommand("check", "Verify a vector file");
    check->add_option("file", check_path, "Vector file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) {
            if (*output_opt) overrides.output_dir = output_dir;
            if (*seed_opt) overrides.seed = seed;
            return cmd_run(config_path, overrides);
        }
        if (*gen) return cmd_gen(count, vec_seed, vec_output);
        if (*check) return cmd_check(check_path);
    } catch (const zkpot::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const zkpot::cli::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoError;
    }
    return kOk;
}
