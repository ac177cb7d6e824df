#pragma once

#include "driftbench/active.hpp"
#include "driftbench/detector.hpp"
#include "driftbench/driftstat.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/semisup.hpp"
#include "driftbench/sparse.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace driftbench::pipeline {

enum class Policy { NR, FL, AL_ONLY, SSL_ONLY, AL_SSL };

struct HistoryPolicy {
    enum class Kind { Full, Window };
    Kind kind = Kind::Full;
    int window = 0; // batches kept when kind == Window
};

struct ExperimentConfig {
    Policy policy = Policy::NR;
    std::optional<active::ALConfig> al;   // present iff the policy queries
    std::optional<semisup::SSLConfig> ssl; // present iff the policy pseudo-labels
    detector::TrainConfig train;
    double fpr_target = 0.01;
    HistoryPolicy history;
    uint64_t seed = 0;

    void validate() const;
};

enum class Provenance { Initial, Oracle, Pseudo };

struct LabeledEntry {
    const Sample* sample; // borrowed from the stream
    int label;            // the label the detector trains on
    Provenance provenance;
    int acquired_at; // period
};

// Ordered record of label-visibility events; the prequential audit checks
// that each batch is evaluated before any of its labels are acquired.
struct EventLog {
    enum class Kind { Eval, OracleLabel, PseudoLabel };
    struct Event {
        uint64_t seq;
        int t;
        Kind kind;
        size_t count;
    };
    std::vector<Event> events;

    uint64_t record(int t, Kind kind, size_t count) {
        uint64_t seq = static_cast<uint64_t>(events.size());
        events.push_back({seq, t, kind, count});
        return seq;
    }
};

// Gatekeeper for the withheld labels of incoming batches. AL and SSL see
// label-stripped views only; every read goes through here and is logged.
class Oracle {
public:
    Oracle(const TemporalStream& stream, EventLog& log) : stream_(&stream), log_(&log) {}

    // ground truth of batch t for evaluation
    std::vector<int> evaluation_labels(int t);
    // analyst labels for AL-selected pool indices
    std::vector<int> acquire(int t, std::span<const size_t> pool_indices);

private:
    const TemporalStream* stream_;
    EventLog* log_;
};

struct AddedEntry {
    std::string id;
    int label;
    Provenance provenance;
};

struct StepLog {
    int t = 0;
    metrics::EvalRecord eval;
    size_t n_al = 0, n_ssl = 0;
    double al_seconds = 0.0, train_seconds = 0.0;
    std::optional<double> beta;
    std::optional<driftstat::StabilityCounts> stability;
    std::string checkpoint; // relative path within the run directory
    uint64_t eval_seq = 0;
    std::optional<uint64_t> first_label_seq;
    size_t train_size = 0;          // |D| after the update
    std::vector<AddedEntry> added;  // entries appended this step
};

struct StepOutcome {
    std::vector<LabeledEntry> next_labeled;
    detector::DetectorModel next_model;
    StepLog log;
};

// One evaluate -> query -> retrain -> pseudo-label -> retrain cycle for
// batch t. Evaluation always happens first, on the incoming model.
StepOutcome update_step(const detector::DetectorModel& model,
                        const std::vector<LabeledEntry>& labeled, const TemporalStream& stream,
                        int t, const ExperimentConfig& cfg, Oracle& oracle, EventLog& log);

// window(w) keeps entries acquired in periods {t-w+1, .., t}; full keeps all.
std::vector<LabeledEntry> apply_history(std::vector<LabeledEntry> labeled,
                                        const HistoryPolicy& policy, int t);

struct RunResult {
    std::vector<StepLog> steps;
    EventLog events;
};

// Full prequential pass over the stream. Per-step randomness derives from
// (cfg.seed, t) so later steps never perturb earlier ones. When run_dir is
// given, each step's evaluated model is checkpointed beneath it.
RunResult run_experiment(const TemporalStream& stream, const ExperimentConfig& cfg,
                         const std::filesystem::path* run_dir = nullptr);

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

inline constexpr double kStabilityAlpha = 0.05;

} // namespace driftbench::pipeline
