#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace driftbench::metrics {

struct Confusion {
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Per-batch evaluation summary. recall/f1/ap are missing when the batch
// contains no malware.
struct EvalRecord {
    int period = 0;
    int64_t n = 0, n_mal = 0, n_good = 0;
    double tau = 0.0;
    Confusion counts;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> ap;
};

// Strict decision rule: predicted malware iff score > tau.
Confusion confusion(std::span<const double> scores, std::span<const int> labels, double tau);

struct FixedFprResult {
    std::optional<double> recall;
    std::optional<double> f1;
    double tau = 0.0;
    Confusion counts;
};

// Thresholds on the batch's own goodware scores, then scores the batch.
FixedFprResult f1_recall_at_fpr(std::span<const double> scores, std::span<const int> labels,
                                double fpr_target);

// Step-interpolated average precision over the descending-score ranking,
// ties broken by ascending sample index.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Base-2 entropy of a Bernoulli(p), with 0*log(0) = 0; peaks at 1.
double binary_entropy(double p);

EvalRecord evaluate_batch(int period, std::span<const double> scores,
                          std::span<const int> labels, double fpr_target);

} // namespace driftbench::metrics
