#pragma once

#include "driftbench/detector.hpp"
#include "driftbench/sparse.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace driftbench::active {

enum class Strategy { RS, MS, LCS, ES, EAP, CLUE, CoreSet, BADGE };

enum class CoresetInit { Labeled, Empty };

struct ALConfig {
    Strategy strategy = Strategy::RS;
    double budget_fraction = 0.0; // share of the unlabeled batch to query
    uint64_t seed = 0;
    CoresetInit coreset_init = CoresetInit::Labeled;
    int clue_max_iter = 100;
    double clue_tol = 1e-4;
    int eap_candidate_cap = 200;
    // L2-normalize feature vectors before geometric distances
    bool normalize_features = false;

    void validate() const;
};

// Ties everywhere resolve by ascending pool index, so every strategy is
// deterministic for fixed inputs and seed.
struct SelectionResult {
    std::vector<size_t> selected; // ascending pool indices
    std::vector<size_t> order;    // selection sequence (greedy / sampled strategies)
    std::vector<double> utilities; // per-sample where the strategy defines one
    size_t k = 0;
};

// round(fraction * pool_size), half up, clamped to [0, pool_size].
size_t budget_k(size_t pool_size, double fraction);

SelectionResult select_random(size_t pool_size, size_t k, uint64_t seed);

enum class UncertaintyVariant { MS, LCS, ES };

// MS: -|2f-1|; LCS: -max(f, 1-f); ES: binary entropy of f. All three rank
// binary scores identically.
std::vector<double> uncertainty_utilities(std::span<const double> scores, UncertaintyVariant v);
SelectionResult rank_uncertainty(std::span<const double> scores, UncertaintyVariant v, size_t k);

// Farthest-first traversal in feature space. With an empty init the first
// pick falls to index 0 by the tie rule.
SelectionResult select_coreset(std::span<const SparseVector* const> pool,
                               std::span<const SparseVector* const> labeled, size_t k,
                               CoresetInit init);

// Entropy-weighted k-means (k-means++ init, Lloyd to convergence), then the
// nearest not-yet-chosen sample per centroid. A zero-weight pool falls back
// to uniform weights.
SelectionResult select_clue(std::span<const SparseVector* const> pool,
                            std::span<const double> scores, size_t k, uint64_t seed,
                            int max_iter, double tol);

// Gradient embeddings psi_i(x) = (f_i(x) - I[yhat = i]) x for i in {0,1},
// selected by k-means++ seeding (first pick uniform, then D^2 sampling).
SelectionResult select_badge(std::span<const SparseVector* const> pool,
                             std::span<const double> scores, size_t k, uint64_t seed);

// Expected average precision: retrains per candidate and label hypothesis,
// weighting each hypothesis by the current model's class probability.
// AP is evaluated on `eval` when given, else on the labeled set itself.
SelectionResult select_eap(std::span<const SparseVector* const> pool,
                           std::span<const double> scores,
                           std::span<const detector::TrainExample> labeled,
                           size_t k, const detector::TrainConfig& train_cfg, int candidate_cap,
                           uint64_t seed,
                           std::span<const detector::TrainExample> eval = {});

SelectionResult select(const ALConfig& cfg, std::span<const SparseVector* const> pool,
                       std::span<const double> scores,
                       std::span<const SparseVector* const> labeled_features,
                       std::span<const detector::TrainExample> labeled,
                       const detector::TrainConfig& train_cfg);

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

} // namespace driftbench::active
