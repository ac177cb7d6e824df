#pragma once

#include "driftbench/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace driftbench::runio {

uint64_t fnv1a64(std::string_view s);
std::string hex16(uint64_t v);

// shortest round-trip representation; stable across runs
std::string format_double(double v);

// temp-and-rename so readers never observe partial files
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

nlohmann::json eval_record_to_json(const metrics::EvalRecord& rec);
metrics::EvalRecord eval_record_from_json(const nlohmann::json& j);

nlohmann::json steplog_to_json(const pipeline::StepLog& log);
pipeline::StepLog steplog_from_json(const nlohmann::json& j);

void write_steplogs(const std::filesystem::path& path,
                    const std::vector<pipeline::StepLog>& steps);
std::vector<pipeline::StepLog> read_steplogs(const std::filesystem::path& path);

// one row of the merged experiment summary
struct SummaryRow {
    std::string config;
    std::string policy;
    std::string strategy; // "" when none
    double al_budget = 0.0;
    double ssl_budget = 0.0;
    int t = 0;
    double budget = 0.0; // headline label cost share for the row's policy
    std::optional<double> recall, f1, beta;
    size_t train_size = 0;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);

// results-directory manifest written by `run`
struct RunConfigInfo {
    std::string label;
    std::string dir;
    std::string hash;
    pipeline::ExperimentConfig config;
    bool failed = false;
    std::string error;
};

struct RunManifest {
    std::string stream_manifest; // path to the data manifest used
    std::string synth_config;    // set when the stream was generated
    uint64_t seed = 0;
    std::vector<RunConfigInfo> configs;
};

void write_run_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_run_manifest(const std::filesystem::path& path);

} // namespace driftbench::runio
