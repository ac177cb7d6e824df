#pragma once

#include "driftbench/sparse.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace driftbench::driftstat {

struct AucResult {
    double auc = 0.5;
    double u = 0.0; // midrank Mann-Whitney U for class 1 vs class 0
};

// Midrank-based normalized U statistic; ties count one half.
AucResult feature_auc(std::span<const double> values_class0,
                      std::span<const double> values_class1);

// Two-sided p-value for the WMW U statistic. Exact permutation distribution
// (dynamic program over the tied value multiset) when n0 + n1 <= 20,
// otherwise normal approximation with tie-corrected variance and continuity
// correction. tie_profile lists tied-group sizes in ascending value order.
double wmw_pvalue(double u, int64_t n0, int64_t n1, std::span<const int64_t> tie_profile);

inline constexpr int kExactLimit = 20;

struct FeatureAssociation {
    double auc = 0.5;
    double p = 1.0;
    int a = 0; // sgn(2*auc - 1) when p < alpha, else 0
};

// Direction of a feature's class association when significant at alpha.
FeatureAssociation class_association(std::span<const double> values,
                                     std::span<const int> labels, double alpha);

struct AssociationVector {
    std::vector<FeatureAssociation> features;
    double alpha = 0.05;
    int64_t n0 = 0, n1 = 0;
};

// Per-feature association over a sample set; features are independent and
// computed in parallel. With `bh` the p-values get a Benjamini-Hochberg
// adjustment before the alpha gate (off everywhere by default).
AssociationVector association_vector(std::span<const SparseVector* const> xs,
                                     std::span<const int> labels, int32_t d, double alpha,
                                     bool bh = false);

std::vector<double> benjamini_hochberg(std::span<const double> pvalues);

// beta = (1/d) sum_j (a_tr[j]*a_ts[j] - I[|a_tr[j]| + |a_ts[j]| = 1])
double stability_score(std::span<const int> a_train, std::span<const int> a_test);

struct StabilityCounts {
    int64_t preserved = 0;        // both significant, same direction
    int64_t flipped = 0;          // both significant, opposite direction
    int64_t half_significant = 0; // significant on exactly one side
    int64_t both_null = 0;
    double beta = 0.0;
};

StabilityCounts stability_counts(std::span<const int> a_train, std::span<const int> a_test);

struct LabeledSet {
    std::vector<const SparseVector*> xs;
    std::vector<int> labels;
};

struct StepStability {
    int t = 0;
    std::optional<double> beta; // missing when either side is single-class
    StabilityCounts counts;
    std::vector<int> a_train, a_test;
    std::vector<FeatureAssociation> train_features, test_features;
};

struct StabilityReport {
    std::vector<StepStability> steps;
};

// beta per step, comparing associations on the step's training set against
// the incoming batch (withheld ground truth).
StabilityReport beta_series(const TemporalStream& stream,
                            std::span<const LabeledSet> training_sets_per_step, double alpha);

struct CorrelationReport {
    double pearson_r = 0.0;
    double kendall_tau = 0.0;
    double p_r = 1.0;
    double p_tau = 1.0;
    int resamples = 10000;
    uint64_t seed = 0;
};

double pearson(std::span<const double> x, std::span<const double> y);
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Two-sided permutation test: p = (1 + #{|stat_perm| >= |stat_obs|}) / (R+1),
// permuting y against x with counter-seeded resamples.
CorrelationReport correlate(std::span<const double> x, std::span<const double> y, int resamples,
                            uint64_t seed);

} // namespace driftbench::driftstat
