#include "driftbench/commands.hpp"
#include "driftbench/sparse.hpp"

#include <cstdio>
#include <string>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"driftbench: label-efficient detector retraining over temporal streams"};
    app.require_subcommand(1);

    std::string gen_config, gen_out;
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic stream");
    gen->add_option("-c,--config", gen_config, "synth config (.toml or .json)")->required();
    gen->add_option("-o,--out", gen_out, "output directory")->required();

    std::string run_spec, run_out;
    uint64_t run_seed = 0;
    bool run_seed_set = false;
    CLI::App* run = app.add_subcommand("run", "run an experiment grid");
    run->add_option("-s,--spec", run_spec, "run spec (.toml or .json)")->required();
    run->add_option("-o,--out", run_out, "results directory (overrides the spec)");
    run->add_option("--seed", run_seed, "override the global seed")
        ->each([&](const std::string&) { run_seed_set = true; });

    std::string drift_results;
    int drift_resamples = 10000;
    CLI::App* drift = app.add_subcommand("drift", "feature-stability drift diagnostics");
    drift->add_option("-r,--results", drift_results, "results directory from `run`")->required();
    drift->add_option("--resamples", drift_resamples, "permutation resamples")
        ->check(CLI::PositiveNumber);

    std::string report_results;
    CLI::App* report = app.add_subcommand("report", "aggregate tables and plot data");
    report->add_option("-r,--results", report_results, "results directory from `run`")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors
    }

    try {
        if (gen->parsed()) {
            driftbench::commands::cmd_gen(gen_config, gen_out);
        } else if (run->parsed()) {
            std::optional<std::filesystem::path> out;
            if (!run_out.empty()) out = run_out;
            std::optional<uint64_t> seed;
            if (run_seed_set) seed = run_seed;
            auto outcome = driftbench::commands::cmd_run(run_spec, out, seed);
            if (!outcome.failed.empty()) return 1;
        } else if (drift->parsed()) {
            driftbench::commands::cmd_drift(drift_results, drift_resamples);
        } else if (report->parsed()) {
            driftbench::commands::cmd_report(report_results);
        }
    } catch (const driftbench::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
