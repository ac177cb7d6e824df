#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace driftbench::commands {

// `gen`: synthesize a stream from a config file and write it plus its
// manifest; returns the manifest path.
std::filesystem::path cmd_gen(const std::filesystem::path& config_path,
                              const std::filesystem::path& out_dir);

struct RunOutcome {
    std::filesystem::path results_dir;
    std::vector<std::string> failed; // labels of configs that errored
};

// `run`: execute the experiment grid. A failing config is recorded and the
// rest of the grid continues. Completed config directories are reused.
RunOutcome cmd_run(const std::filesystem::path& run_spec_path,
                   const std::optional<std::filesystem::path>& out_override = std::nullopt,
                   std::optional<uint64_t> seed_override = std::nullopt);

// `drift`: recompute feature-stability diagnostics from the logs and
// checkpointed runs; emits beta/association CSVs and correlation.json.
void cmd_drift(const std::filesystem::path& results_dir, int resamples = 10000);

// `report`: aggregate StepLog fields into the strategy x budget table and
// plot-ready curves. Purely an aggregation; nothing is recomputed.
void cmd_report(const std::filesystem::path& results_dir);

} // namespace driftbench::commands
