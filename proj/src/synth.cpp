#include "driftbench/synth.hpp"

#include "driftbench/rng.hpp"
#include "driftbench/threads.hpp"

#include <cstdio>

namespace driftbench::synth {

namespace {
constexpr int64_t kPeriodSeconds = 86400;
constexpr uint64_t kLabelTag = ~uint64_t{0}; // feature slot reserved for the label draw
} // namespace

void SynthConfig::validate() const {
    if (d <= 0) throw ConfigError("synth: d must be positive");
    if (periods < 1) throw ConfigError("synth: periods must be >= 1");
    if (samples_per_batch < 1) throw ConfigError("synth: samples_per_batch must be >= 1");
    if (malware_prior.size() != static_cast<size_t>(periods))
        throw ConfigError("synth: malware_prior must list one value per period");
    for (double p : malware_prior)
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("synth: priors must lie in (0,1)");
    if (feature_spec.size() != static_cast<size_t>(d))
        throw ConfigError("synth: feature_spec must list one entry per feature");
    for (const auto& f : feature_spec) {
        if (!(f.p_mal >= 0.0 && f.p_mal <= 1.0 && f.p_good >= 0.0 && f.p_good <= 1.0))
            throw ConfigError("synth: feature rates must lie in [0,1]");
    }
    for (const auto& e : drift_events) {
        if (e.period < 1 || e.period > periods - 1)
            throw ConfigError("synth: drift period must lie in [1, T]");
        if (e.feature < 0 || e.feature >= d)
            throw ConfigError("synth: drift feature index out of range");
    }
}

FeatureRates effective_rates(const SynthConfig& cfg, int t, int32_t j) {
    FeatureRates r = cfg.feature_spec[static_cast<size_t>(j)];
    int swaps = 0;
    for (const auto& e : cfg.drift_events)
        if (e.feature == j && e.period <= t) ++swaps;
    if (swaps % 2 == 1) std::swap(r.p_mal, r.p_good);
    return r;
}

Association expected_association(const SynthConfig& cfg, int t, int32_t j) {
    FeatureRates r = effective_rates(cfg, t, j);
    Association a;
    if (r.p_mal == r.p_good) return a; // auc 0.5, direction 0
    a.auc = r.p_mal * (1.0 - r.p_good) +
            0.5 * (r.p_mal * r.p_good + (1.0 - r.p_mal) * (1.0 - r.p_good));
    double s = 2.0 * a.auc - 1.0;
    a.direction = s > 0.0 ? 1 : (s < 0.0 ? -1 : 0);
    return a;
}

TemporalStream generate_stream(const SynthConfig& cfg) {
    cfg.validate();

    TemporalStream stream;
    stream.d = cfg.d;
    stream.granularity = Granularity::SyntheticStep;

    const int nthreads = max_threads();
    for (int t = 0; t < cfg.periods; ++t) {
        Batch b;
        b.period = t;
        b.start_ts = static_cast<int64_t>(t) * kPeriodSeconds;
        b.end_ts = b.start_ts + kPeriodSeconds - 1;
        b.samples.resize(static_cast<size_t>(cfg.samples_per_batch));

        std::vector<FeatureRates> rates(static_cast<size_t>(cfg.d));
        for (int32_t j = 0; j < cfg.d; ++j) rates[static_cast<size_t>(j)] = effective_rates(cfg, t, j);
        const double prior = cfg.malware_prior[static_cast<size_t>(t)];

#pragma omp parallel for schedule(static) num_threads(nthreads)
        for (int i = 0; i < cfg.samples_per_batch; ++i) {
            Sample& s = b.samples[static_cast<size_t>(i)];
            char id[32];
            std::snprintf(id, sizeof(id), "p%03d_s%06d", t, i);
            s.id = id;
            s.timestamp = b.start_ts + (i % kPeriodSeconds);
            const uint64_t ut = static_cast<uint64_t>(t);
            const uint64_t ui = static_cast<uint64_t>(i);
            int label = counter_uniform(cfg.seed, ut, ui, kLabelTag) < prior ? 1 : 0;
            s.true_label = label;
            s.x.dim = cfg.d;
            for (int32_t j = 0; j < cfg.d; ++j) {
                const FeatureRates& r = rates[static_cast<size_t>(j)];
                double p = label == 1 ? r.p_mal : r.p_good;
                if (p > 0.0 && counter_uniform(cfg.seed, ut, ui, static_cast<uint64_t>(j)) < p)
                    s.x.entries.push_back({j, 1.0});
            }
        }

        if (t == 0)
            stream.initial = std::move(b);
        else
            stream.incoming.push_back(std::move(b));
    }
    return stream;
}

} // namespace driftbench::synth
