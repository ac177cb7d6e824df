#include "driftbench/active.hpp"

#include "driftbench/kernels.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/threads.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace driftbench::active {

void ALConfig::validate() const {
    if (!(budget_fraction >= 0.0 && budget_fraction <= 1.0))
        throw ConfigError("al: budget_fraction must lie in [0,1]");
    if (clue_max_iter < 1) throw ConfigError("al: clue_max_iter must be positive");
    if (!(clue_tol > 0.0)) throw ConfigError("al: clue_tol must be positive");
    if (eap_candidate_cap < 1) throw ConfigError("al: eap_candidate_cap must be positive");
}

size_t budget_k(size_t pool_size, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw Error("budget_k: fraction must lie in [0,1]");
    double k = std::floor(fraction * static_cast<double>(pool_size) + 0.5);
    if (k < 0.0) k = 0.0;
    if (k > static_cast<double>(pool_size)) k = static_cast<double>(pool_size);
    return static_cast<size_t>(k);
}

namespace {

// top-k by utility, ties by ascending index; returns ascending indices
std::vector<size_t> top_k(std::span<const double> utilities, size_t k) {
    std::vector<size_t> order(utilities.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return utilities[a] > utilities[b]; });
    order.resize(std::min(k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

void check_budget(size_t k, size_t n, const char* who) {
    if (k > n) throw Error(std::string(who) + ": budget exceeds pool size");
}

} // namespace

SelectionResult select_random(size_t pool_size, size_t k, uint64_t seed) {
    check_budget(k, pool_size, "select_random");
    Rng rng(seed);
    SelectionResult r;
    r.k = k;
    r.selected = rng.sample_without_replacement(pool_size, k);
    r.order = r.selected;
    return r;
}

std::vector<double> uncertainty_utilities(std::span<const double> scores, UncertaintyVariant v) {
    std::vector<double> u(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        double f = scores[i];
        if (!(f >= 0.0 && f <= 1.0)) throw Error("uncertainty: score outside [0,1]");
        switch (v) {
        case UncertaintyVariant::MS: u[i] = -std::fabs(2.0 * f - 1.0); break;
        case UncertaintyVariant::LCS: u[i] = -std::max(f, 1.0 - f); break;
        case UncertaintyVariant::ES: u[i] = metrics::binary_entropy(f); break;
        }
    }
    return u;
}

SelectionResult rank_uncertainty(std::span<const double> scores, UncertaintyVariant v, size_t k) {
    check_budget(k, scores.size(), "rank_uncertainty");
    SelectionResult r;
    r.k = k;
    r.utilities = uncertainty_utilities(scores, v);
    r.selected = top_k(r.utilities, k);
    r.order = r.selected;
    return r;
}

SelectionResult select_coreset(std::span<const SparseVector* const> pool,
                               std::span<const SparseVector* const> labeled, size_t k,
                               CoresetInit init) {
    check_budget(k, pool.size(), "select_coreset");
    SelectionResult r;
    r.k = k;
    if (k == 0) return r;

    std::vector<double> min_sq(pool.size(), std::numeric_limits<double>::infinity());
    if (init == CoresetInit::Labeled)
        for (const SparseVector* z : labeled) kernels::min_sq_dist_update(pool, *z, min_sq);

    std::vector<char> chosen(pool.size(), 0);
    for (size_t step = 0; step < k; ++step) {
        size_t best = pool.size();
        double best_d = -1.0;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (chosen[i]) continue;
            if (best == pool.size() || min_sq[i] > best_d) {
                best = i;
                best_d = min_sq[i];
            }
        }
        chosen[best] = 1;
        r.order.push_back(best);
        kernels::min_sq_dist_update(pool, *pool[best], min_sq);
    }
    r.selected = r.order;
    std::sort(r.selected.begin(), r.selected.end());
    return r;
}

namespace {

// prefix-sum draw over per-index weights; indices with zero weight or in
// `skip` can never be returned
size_t weighted_pick(const std::vector<double>& weight, const std::vector<char>& skip, double u01) {
    double total = 0.0;
    for (size_t i = 0; i < weight.size(); ++i)
        if (!skip[i]) total += weight[i];
    if (total <= 0.0) {
        for (size_t i = 0; i < weight.size(); ++i)
            if (!skip[i]) return i; // uniform fallback handled by the caller
        throw Error("weighted_pick: nothing left to pick");
    }
    double target = u01 * total;
    double acc = 0.0;
    size_t last_positive = weight.size();
    for (size_t i = 0; i < weight.size(); ++i) {
        if (skip[i] || weight[i] <= 0.0) continue;
        acc += weight[i];
        last_positive = i;
        if (acc > target) return i;
    }
    return last_positive; // rounding pushed the target to the very end
}

size_t uniform_unchosen(const std::vector<char>& chosen, Rng& rng) {
    size_t remaining = 0;
    for (char c : chosen) remaining += !c;
    size_t pick = static_cast<size_t>(rng.next_below(remaining));
    for (size_t i = 0; i < chosen.size(); ++i) {
        if (chosen[i]) continue;
        if (pick-- == 0) return i;
    }
    throw Error("uniform_unchosen: pool exhausted");
}

} // namespace

SelectionResult select_clue(std::span<const SparseVector* const> pool,
                            std::span<const double> scores, size_t k, uint64_t seed,
                            int max_iter, double tol) {
    check_budget(k, pool.size(), "select_clue");
    if (scores.size() != pool.size()) throw Error("select_clue: scores/pool length mismatch");
    SelectionResult r;
    r.k = k;
    if (k == 0) return r;

    const size_t n = pool.size();
    const int32_t dim = pool[0]->dim;

    std::vector<double> weight(n);
    double weight_total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        weight[i] = metrics::binary_entropy(scores[i]);
        weight_total += weight[i];
    }
    if (weight_total <= 0.0) weight.assign(n, 1.0);

    // k-means++ seeding: first center by weight, then weight * D^2
    Rng rng(seed);
    std::vector<char> is_center(n, 0);
    std::vector<size_t> center_idx;
    {
        size_t first = weighted_pick(weight, is_center, rng.next_double());
        is_center[first] = 1;
        center_idx.push_back(first);
        std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
        kernels::min_sq_dist_update(pool, *pool[first], min_sq);
        std::vector<double> draw(n);
        while (center_idx.size() < k) {
            double total = 0.0;
            for (size_t i = 0; i < n; ++i) {
                draw[i] = is_center[i] ? 0.0 : weight[i] * min_sq[i];
                total += draw[i];
            }
            size_t next = total > 0.0 ? weighted_pick(draw, is_center, rng.next_double())
                                      : uniform_unchosen(is_center, rng);
            is_center[next] = 1;
            center_idx.push_back(next);
            kernels::min_sq_dist_update(pool, *pool[next], min_sq);
        }
    }

    std::vector<std::vector<double>> centroids(k, std::vector<double>(static_cast<size_t>(dim), 0.0));
    for (size_t c = 0; c < k; ++c)
        for (const auto& e : pool[center_idx[c]]->entries)
            centroids[c][static_cast<size_t>(e.index)] = e.value;

    std::vector<double> centroid_sq(k);
    std::vector<int32_t> assign;
    std::vector<double> dist_sq;
    std::vector<double> cluster_weight(k);
    std::vector<std::vector<double>> sums(k, std::vector<double>(static_cast<size_t>(dim), 0.0));

    for (int iter = 0; iter < max_iter; ++iter) {
        for (size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (double v : centroids[c]) s += v * v;
            centroid_sq[c] = s;
        }
        kernels::assign_to_centroids(pool, centroids, centroid_sq, assign, dist_sq);

        for (size_t c = 0; c < k; ++c) {
            cluster_weight[c] = 0.0;
            std::fill(sums[c].begin(), sums[c].end(), 0.0);
        }
        for (size_t i = 0; i < n; ++i) {
            size_t c = static_cast<size_t>(assign[i]);
            cluster_weight[c] += weight[i];
            for (const auto& e : pool[i]->entries)
                sums[c][static_cast<size_t>(e.index)] += weight[i] * e.value;
        }

        double shift = 0.0;
        for (size_t c = 0; c < k; ++c) {
            if (cluster_weight[c] <= 0.0) continue; // keep the stale centroid
            double delta = 0.0;
            for (size_t j = 0; j < static_cast<size_t>(dim); ++j) {
                double v = sums[c][j] / cluster_weight[c];
                double d = v - centroids[c][j];
                delta += d * d;
                centroids[c][j] = v;
            }
            shift = std::max(shift, std::sqrt(delta));
        }
        if (shift < tol) break;
    }

    // nearest unchosen sample per centroid, in centroid order
    std::vector<char> taken(n, 0);
    std::vector<double> to_centroid(n);
    for (size_t c = 0; c < k; ++c) {
        double c_sq = 0.0;
        for (double v : centroids[c]) c_sq += v * v;
        const int nthreads = max_threads();
        const int64_t sn = static_cast<int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(nthreads)
        for (int64_t i = 0; i < sn; ++i) {
            const SparseVector& x = *pool[static_cast<size_t>(i)];
            double d = x.squared_norm() - 2.0 * x.dot_dense(centroids[c]) + c_sq;
            to_centroid[static_cast<size_t>(i)] = d < 0.0 ? 0.0 : d;
        }
        size_t best = n;
        for (size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (best == n || to_centroid[i] < to_centroid[best]) best = i;
        }
        taken[best] = 1;
        r.order.push_back(best);
    }
    r.selected = r.order;
    std::sort(r.selected.begin(), r.selected.end());
    return r;
}

SelectionResult select_badge(std::span<const SparseVector* const> pool,
                             std::span<const double> scores, size_t k, uint64_t seed) {
    check_budget(k, pool.size(), "select_badge");
    if (scores.size() != pool.size()) throw Error("select_badge: scores/pool length mismatch");
    SelectionResult r;
    r.k = k;
    if (k == 0) return r;

    const size_t n = pool.size();
    std::vector<double> c0(n), c1(n), sq_norms(n);
    for (size_t i = 0; i < n; ++i) {
        double f1 = scores[i];
        double f0 = 1.0 - f1;
        int yhat = f1 > 0.5 ? 1 : 0;
        c0[i] = f0 - (yhat == 0 ? 1.0 : 0.0);
        c1[i] = f1 - (yhat == 1 ? 1.0 : 0.0);
        sq_norms[i] = pool[i]->squared_norm();
    }

    Rng rng(seed);
    std::vector<char> chosen(n, 0);
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());

    size_t first = static_cast<size_t>(rng.next_below(n));
    chosen[first] = 1;
    r.order.push_back(first);
    kernels::badge_min_sq_dist_update(pool, c0, c1, sq_norms, first, min_sq);
    min_sq[first] = 0.0;

    while (r.order.size() < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (!chosen[i]) total += min_sq[i];
        size_t next;
        if (total > 0.0) {
            next = weighted_pick(min_sq, chosen, rng.next_double());
        } else {
            next = uniform_unchosen(chosen, rng); // all embeddings coincide
        }
        chosen[next] = 1;
        r.order.push_back(next);
        kernels::badge_min_sq_dist_update(pool, c0, c1, sq_norms, next, min_sq);
        min_sq[next] = 0.0;
    }
    r.selected = r.order;
    std::sort(r.selected.begin(), r.selected.end());
    return r;
}

SelectionResult select_eap(std::span<const SparseVector* const> pool,
                           std::span<const double> scores,
                           std::span<const detector::TrainExample> labeled, size_t k,
                           const detector::TrainConfig& train_cfg, int candidate_cap,
                           uint64_t seed, std::span<const detector::TrainExample> eval) {
    check_budget(k, pool.size(), "select_eap");
    if (scores.size() != pool.size()) throw Error("select_eap: scores/pool length mismatch");
    {
        bool has_pos = false, has_neg = false;
        for (const auto& ex : labeled) (ex.label != 0 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) throw Error("select_eap: labeled set needs both classes");
    }
    SelectionResult r;
    r.k = k;
    if (k == 0) return r;

    const size_t n = pool.size();
    std::vector<size_t> candidates;
    if (n <= static_cast<size_t>(candidate_cap)) {
        candidates.resize(n);
        std::iota(candidates.begin(), candidates.end(), size_t{0});
    } else {
        Rng rng(mix_seed(seed, 0));
        candidates = rng.sample_without_replacement(n, static_cast<size_t>(candidate_cap));
    }

    if (eval.empty()) eval = labeled; // resubstitution default

    const int32_t dim = labeled.front().x->dim;
    std::vector<const SparseVector*> eval_rows(eval.size());
    std::vector<int> eval_labels(eval.size());
    for (size_t i = 0; i < eval.size(); ++i) {
        eval_rows[i] = eval[i].x;
        eval_labels[i] = eval[i].label;
    }

    std::vector<double> utilities(n, std::numeric_limits<double>::quiet_NaN());
    const int64_t n_cand = static_cast<int64_t>(candidates.size());
    const int nthreads = max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (int64_t ci = 0; ci < n_cand; ++ci) {
        size_t i = candidates[static_cast<size_t>(ci)];
        std::vector<detector::TrainExample> augmented(labeled.begin(), labeled.end());
        augmented.push_back({pool[i], 0});
        double ap_by_label[2];
        for (int y = 0; y < 2; ++y) {
            augmented.back().label = y;
            detector::DetectorModel m = detector::train(augmented, dim, train_cfg);
            std::vector<double> s = detector::score_batch(m, eval_rows);
            ap_by_label[y] = metrics::average_precision(s, eval_labels);
        }
        double f1 = scores[i];
        utilities[i] = (1.0 - f1) * ap_by_label[0] + f1 * ap_by_label[1];
    }

    // rank candidates only; missing budget beyond the cap is drawn at random
    std::vector<size_t> by_utility = candidates;
    std::stable_sort(by_utility.begin(), by_utility.end(),
                     [&](size_t a, size_t b) { return utilities[a] > utilities[b]; });
    size_t from_candidates = std::min(k, by_utility.size());
    r.selected.assign(by_utility.begin(),
                      by_utility.begin() + static_cast<ptrdiff_t>(from_candidates));
    if (from_candidates < k) {
        std::vector<char> used(n, 0);
        for (size_t i : r.selected) used[i] = 1;
        std::vector<size_t> rest;
        for (size_t i = 0; i < n; ++i)
            if (!used[i]) rest.push_back(i);
        Rng rng(mix_seed(seed, 1));
        rng.shuffle(rest);
        rest.resize(k - from_candidates);
        r.selected.insert(r.selected.end(), rest.begin(), rest.end());
    }
    r.order = r.selected;
    std::sort(r.selected.begin(), r.selected.end());
    r.utilities = std::move(utilities);
    return r;
}

std::vector<SparseVector> l2_normalized(std::span<const SparseVector* const> xs) {
    std::vector<SparseVector> out;
    out.reserve(xs.size());
    for (const SparseVector* x : xs) {
        SparseVector v = *x;
        double norm = std::sqrt(v.squared_norm());
        if (norm > 0.0)
            for (auto& e : v.entries) e.value /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

SelectionResult select(const ALConfig& cfg, std::span<const SparseVector* const> pool,
                       std::span<const double> scores,
                       std::span<const SparseVector* const> labeled_features,
                       std::span<const detector::TrainExample> labeled,
                       const detector::TrainConfig& train_cfg) {
    cfg.validate();
    size_t k = budget_k(pool.size(), cfg.budget_fraction);

    // geometric strategies may run on unit-norm copies of the vectors
    std::vector<SparseVector> pool_normed, labeled_normed;
    std::vector<const SparseVector*> pool_view, labeled_view;
    auto geometry_pool = [&]() -> std::span<const SparseVector* const> {
        if (!cfg.normalize_features) return pool;
        pool_normed = l2_normalized(pool);
        for (const auto& v : pool_normed) pool_view.push_back(&v);
        return pool_view;
    };

    switch (cfg.strategy) {
    case Strategy::RS: return select_random(pool.size(), k, cfg.seed);
    case Strategy::MS: return rank_uncertainty(scores, UncertaintyVariant::MS, k);
    case Strategy::LCS: return rank_uncertainty(scores, UncertaintyVariant::LCS, k);
    case Strategy::ES: return rank_uncertainty(scores, UncertaintyVariant::ES, k);
    case Strategy::CoreSet: {
        std::span<const SparseVector* const> lab = labeled_features;
        if (cfg.normalize_features) {
            labeled_normed = l2_normalized(labeled_features);
            for (const auto& v : labeled_normed) labeled_view.push_back(&v);
            lab = labeled_view;
        }
        return select_coreset(geometry_pool(), lab, k, cfg.coreset_init);
    }
    case Strategy::CLUE:
        return select_clue(geometry_pool(), scores, k, cfg.seed, cfg.clue_max_iter, cfg.clue_tol);
    case Strategy::BADGE: return select_badge(geometry_pool(), scores, k, cfg.seed);
    case Strategy::EAP:
        return select_eap(pool, scores, labeled, k, train_cfg, cfg.eap_candidate_cap, cfg.seed);
    }
    throw Error("select: unknown strategy");
}

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::RS: return "RS";
    case Strategy::MS: return "MS";
    case Strategy::LCS: return "LCS";
    case Strategy::ES: return "ES";
    case Strategy::EAP: return "EAP";
    case Strategy::CLUE: return "CLUE";
    case Strategy::CoreSet: return "CoreSet";
    case Strategy::BADGE: return "BADGE";
    }
    return "RS";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "RS") return Strategy::RS;
    if (s == "MS") return Strategy::MS;
    if (s == "LCS") return Strategy::LCS;
    if (s == "ES") return Strategy::ES;
    if (s == "EAP") return Strategy::EAP;
    if (s == "CLUE") return Strategy::CLUE;
    if (s == "CoreSet") return Strategy::CoreSet;
    if (s == "BADGE") return Strategy::BADGE;
    throw ConfigError("unknown AL strategy: " + s);
}

} // namespace driftbench::active
