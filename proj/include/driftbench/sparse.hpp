#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace driftbench {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (CLI maps this to exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

struct SparseEntry {
    int32_t index;
    double value;
    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted sparse feature vector of fixed dimension. Indices strictly
// increasing, no stored zeros, all values finite.
struct SparseVector {
    int32_t dim = 0;
    std::vector<SparseEntry> entries;

    double dot_dense(const std::vector<double>& w) const {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * w[static_cast<size_t>(e.index)];
        return s;
    }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * e.value;
        return s;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

// Squared Euclidean distance between two sparse vectors (merge walk).
double sparse_sq_dist(const SparseVector& a, const SparseVector& b);

// Dot product of two sparse vectors.
double sparse_dot(const SparseVector& a, const SparseVector& b);

struct Sample {
    std::string id;
    SparseVector x;
    int64_t timestamp = 0;
    std::optional<int> true_label; // 0 = goodware, 1 = malware

    friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Granularity { Monthly, Quarterly, SyntheticStep };

std::string to_string(Granularity g);
Granularity granularity_from_string(const std::string& s);

struct Batch {
    int period = 0;
    int64_t start_ts = 0;
    int64_t end_ts = 0;
    std::vector<Sample> samples;
};

// Initial labeled batch (t = 0) plus ordered unlabeled batches t = 1..T.
// Incoming batches carry their ground-truth labels, but those are withheld:
// only the oracle and evaluation code paths may read them.
struct TemporalStream {
    int32_t d = 0;
    Granularity granularity = Granularity::SyntheticStep;
    Batch initial;
    std::vector<Batch> incoming;

    int horizon() const { return static_cast<int>(incoming.size()); }
    const Batch& batch_at(int t) const {
        if (t == 0) return initial;
        return incoming.at(static_cast<size_t>(t - 1));
    }
};

} // namespace driftbench
