#pragma once

#include "driftbench/pipeline.hpp"
#include "driftbench/synth.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace driftbench::config {

synth::SynthConfig synth_config_from_json(const nlohmann::json& j);
synth::SynthConfig load_synth_config(const std::filesystem::path& path);

struct NamedConfig {
    std::string label;
    pipeline::ExperimentConfig config;
};

// Stream source plus the experiment grid; NR and FL reference configs are
// always appended.
struct RunSpec {
    std::filesystem::path manifest;     // one of manifest / synth_config set
    std::filesystem::path synth_config;
    std::filesystem::path out_dir;
    uint64_t seed = 0;
    std::vector<NamedConfig> configs;
};

RunSpec load_run_spec(const std::filesystem::path& path);

// Normalized form used for hashing and run.json.
nlohmann::json experiment_config_to_json(const pipeline::ExperimentConfig& cfg);

} // namespace driftbench::config
