#pragma once

#include "driftbench/sparse.hpp"

#include <cstdint>
#include <vector>

namespace driftbench::synth {

struct FeatureRates {
    double p_mal = 0.0;  // activation rate in class 1
    double p_good = 0.0; // activation rate in class 0
};

// From `period` onward the feature's p_mal and p_good swap; two events on
// the same feature cancel.
struct DriftEvent {
    int period = 0;
    int32_t feature = 0;
};

struct SynthConfig {
    int32_t d = 0;
    int periods = 1; // T + 1 batches total
    int samples_per_batch = 0;
    std::vector<double> malware_prior; // one per period, in (0,1)
    std::vector<FeatureRates> feature_spec; // one per feature
    std::vector<DriftEvent> drift_events;
    uint64_t seed = 0;

    void validate() const;
};

// Deterministic for a fixed config: all randomness is counter-derived from
// (seed, period, sample, feature), so generation order does not matter.
TemporalStream generate_stream(const SynthConfig& cfg);

// Rates for feature j at period t with drift swaps applied.
FeatureRates effective_rates(const SynthConfig& cfg, int t, int32_t j);

struct Association {
    double auc = 0.5;
    int direction = 0; // sign(2*auc - 1), 0 when rates coincide
};

// Closed-form AUC of a Bernoulli feature:
//   p_mal*(1-p_good) + 0.5*(p_mal*p_good + (1-p_mal)*(1-p_good))
Association expected_association(const SynthConfig& cfg, int t, int32_t j);

} // namespace driftbench::synth
