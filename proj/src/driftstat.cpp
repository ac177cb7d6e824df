#include "driftbench/driftstat.hpp"

#include "driftbench/rng.hpp"
#include "driftbench/threads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftbench::driftstat {

namespace {

struct RankedPool {
    std::vector<double> midranks;   // per pooled observation, sorted by value
    std::vector<int64_t> group_sizes; // tied groups in ascending value order
};

RankedPool midrank_pool(std::vector<double>& pooled) {
    std::sort(pooled.begin(), pooled.end());
    RankedPool out;
    out.midranks.resize(pooled.size());
    size_t i = 0;
    while (i < pooled.size()) {
        size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        double mid = 0.5 * static_cast<double>(i + 1 + j); // (first + last)/2 ranks
        for (size_t t = i; t < j; ++t) out.midranks[t] = mid;
        out.group_sizes.push_back(static_cast<int64_t>(j - i));
        i = j;
    }
    return out;
}

} // namespace

AucResult feature_auc(std::span<const double> values_class0,
                      std::span<const double> values_class1) {
    if (values_class0.empty() || values_class1.empty())
        throw Error("feature_auc: both classes must be non-empty");
    const size_t n0 = values_class0.size(), n1 = values_class1.size();

    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n0 + n1);
    for (double v : values_class0) pooled.emplace_back(v, 0);
    for (double v : values_class1) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double rank_sum1 = 0.0;
    size_t i = 0;
    while (i < pooled.size()) {
        size_t j = i;
        int64_t c1 = 0;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) {
            c1 += pooled[j].second;
            ++j;
        }
        double mid = 0.5 * static_cast<double>(i + 1 + j);
        rank_sum1 += mid * static_cast<double>(c1);
        i = j;
    }

    AucResult r;
    r.u = rank_sum1 - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    r.auc = r.u / (static_cast<double>(n0) * static_cast<double>(n1));
    return r;
}

double wmw_pvalue(double u, int64_t n0, int64_t n1, std::span<const int64_t> tie_profile) {
    if (n0 < 1 || n1 < 1) throw Error("wmw_pvalue: both classes must be non-empty");
    const int64_t n = n0 + n1;
    const double nn = static_cast<double>(n0) * static_cast<double>(n1);
    if (!(u >= -1e-9 && u <= nn + 1e-9)) throw Error("wmw_pvalue: U out of range");

    int64_t profile_total = 0;
    for (int64_t s : tie_profile) profile_total += s;
    if (profile_total != n) throw Error("wmw_pvalue: tie profile does not cover the pool");

    if (n <= kExactLimit) {
        // doubled midranks are integers; DP over (#picked, doubled rank sum)
        std::vector<int64_t> doubled;
        doubled.reserve(static_cast<size_t>(n));
        int64_t cum = 0;
        for (int64_t s : tie_profile) {
            int64_t mid2 = 2 * cum + s + 1;
            for (int64_t t = 0; t < s; ++t) doubled.push_back(mid2);
            cum += s;
        }
        const int64_t max_sum = n * (n + 1);
        std::vector<std::vector<double>> ways(
            static_cast<size_t>(n1) + 1, std::vector<double>(static_cast<size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (int64_t m : doubled) {
            for (int64_t c = std::min<int64_t>(n1, n); c >= 1; --c) {
                auto& dst = ways[static_cast<size_t>(c)];
                const auto& src = ways[static_cast<size_t>(c - 1)];
                for (int64_t s = max_sum; s >= m; --s) dst[static_cast<size_t>(s)] += src[static_cast<size_t>(s - m)];
            }
        }
        const int64_t u2_obs = std::llround(2.0 * u);
        const int64_t center2 = n0 * n1; // doubled mean of U
        const int64_t shift = n1 * (n1 + 1);
        double total = 0.0, extreme = 0.0;
        const auto& dist = ways[static_cast<size_t>(n1)];
        for (int64_t s = 0; s <= max_sum; ++s) {
            double w = dist[static_cast<size_t>(s)];
            if (w == 0.0) continue;
            total += w;
            int64_t u2 = s - shift;
            if (std::llabs(u2 - center2) >= std::llabs(u2_obs - center2)) extreme += w;
        }
        return extreme / total;
    }

    // tie-corrected normal approximation with continuity correction
    double tie_term = 0.0;
    for (int64_t s : tie_profile)
        tie_term += static_cast<double>(s) * static_cast<double>(s) * static_cast<double>(s) -
                    static_cast<double>(s);
    double var = nn / 12.0 *
                 (static_cast<double>(n + 1) -
                  tie_term / (static_cast<double>(n) * static_cast<double>(n - 1)));
    if (var <= 0.0) return 1.0;
    double dev = std::fabs(u - nn / 2.0) - 0.5;
    if (dev < 0.0) dev = 0.0;
    double z = dev / std::sqrt(var);
    double p = std::erfc(z / std::sqrt(2.0));
    return p > 1.0 ? 1.0 : p;
}

FeatureAssociation class_association(std::span<const double> values,
                                     std::span<const int> labels, double alpha) {
    if (values.size() != labels.size()) throw Error("class_association: length mismatch");
    std::vector<double> v0, v1;
    for (size_t i = 0; i < values.size(); ++i)
        (labels[i] != 0 ? v1 : v0).push_back(values[i]);
    if (v0.empty() || v1.empty()) throw Error("class_association: single class");

    AucResult r = feature_auc(v0, v1);
    std::vector<double> pooled(values.begin(), values.end());
    RankedPool pool = midrank_pool(pooled);
    FeatureAssociation a;
    a.auc = r.auc;
    a.p = wmw_pvalue(r.u, static_cast<int64_t>(v0.size()), static_cast<int64_t>(v1.size()),
                     pool.group_sizes);
    if (a.p < alpha && a.auc != 0.5) a.a = a.auc > 0.5 ? 1 : -1;
    return a;
}

std::vector<double> benjamini_hochberg(std::span<const double> pvalues) {
    const size_t m = pvalues.size();
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<double> adjusted(m, 1.0);
    double running = 1.0;
    for (size_t r = m; r >= 1; --r) {
        size_t i = order[r - 1];
        double v = pvalues[i] * static_cast<double>(m) / static_cast<double>(r);
        running = std::min(running, v);
        adjusted[i] = running;
    }
    return adjusted;
}

AssociationVector association_vector(std::span<const SparseVector* const> xs,
                                     std::span<const int> labels, int32_t d, double alpha,
                                     bool bh) {
    if (xs.size() != labels.size()) throw Error("association_vector: length mismatch");
    AssociationVector out;
    out.alpha = alpha;
    for (int y : labels) (y != 0 ? out.n1 : out.n0)++;
    if (out.n0 == 0 || out.n1 == 0) throw Error("association_vector: single class");
    out.features.resize(static_cast<size_t>(d));

    // column-major copy so each feature test walks only its non-zeros
    std::vector<std::vector<std::pair<int, double>>> columns(static_cast<size_t>(d));
    for (size_t i = 0; i < xs.size(); ++i)
        for (const auto& e : xs[i]->entries)
            columns[static_cast<size_t>(e.index)].emplace_back(labels[i], e.value);

    const int nthreads = max_threads();
    const int64_t nd = d;
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
    for (int64_t j = 0; j < nd; ++j) {
        std::vector<double> v0, v1;
        v0.reserve(static_cast<size_t>(out.n0));
        v1.reserve(static_cast<size_t>(out.n1));
        for (const auto& [label, value] : columns[static_cast<size_t>(j)])
            (label != 0 ? v1 : v0).push_back(value);
        v0.resize(static_cast<size_t>(out.n0), 0.0); // implicit zeros
        v1.resize(static_cast<size_t>(out.n1), 0.0);

        AucResult r = feature_auc(v0, v1);
        std::vector<double> pooled;
        pooled.reserve(v0.size() + v1.size());
        pooled.insert(pooled.end(), v0.begin(), v0.end());
        pooled.insert(pooled.end(), v1.begin(), v1.end());
        RankedPool pool = midrank_pool(pooled);
        FeatureAssociation& a = out.features[static_cast<size_t>(j)];
        a.auc = r.auc;
        a.p = wmw_pvalue(r.u, out.n0, out.n1, pool.group_sizes);
        if (!bh && a.p < alpha && a.auc != 0.5) a.a = a.auc > 0.5 ? 1 : -1;
    }

    if (bh) {
        std::vector<double> ps(out.features.size());
        for (size_t j = 0; j < out.features.size(); ++j) ps[j] = out.features[j].p;
        std::vector<double> adj = benjamini_hochberg(ps);
        for (size_t j = 0; j < out.features.size(); ++j) {
            FeatureAssociation& a = out.features[j];
            a.p = adj[j];
            if (a.p < alpha && a.auc != 0.5) a.a = a.auc > 0.5 ? 1 : -1;
        }
    }
    return out;
}

double stability_score(std::span<const int> a_train, std::span<const int> a_test) {
    return stability_counts(a_train, a_test).beta;
}

StabilityCounts stability_counts(std::span<const int> a_train, std::span<const int> a_test) {
    if (a_train.size() != a_test.size() || a_train.empty())
        throw Error("stability_score: vectors must have equal non-zero length");
    StabilityCounts c;
    int64_t sum = 0;
    for (size_t j = 0; j < a_train.size(); ++j) {
        int tr = a_train[j], ts = a_test[j];
        int prod = tr * ts;
        int half = (std::abs(tr) + std::abs(ts) == 1) ? 1 : 0;
        sum += prod - half;
        if (prod > 0)
            ++c.preserved;
        else if (prod < 0)
            ++c.flipped;
        else if (half)
            ++c.half_significant;
        else
            ++c.both_null;
    }
    c.beta = static_cast<double>(sum) / static_cast<double>(a_train.size());
    return c;
}

StabilityReport beta_series(const TemporalStream& stream,
                            std::span<const LabeledSet> training_sets_per_step, double alpha) {
    if (training_sets_per_step.size() != static_cast<size_t>(stream.horizon()))
        throw Error("beta_series: one training set per incoming batch required");
    StabilityReport report;
    for (int t = 1; t <= stream.horizon(); ++t) {
        const LabeledSet& train = training_sets_per_step[static_cast<size_t>(t - 1)];
        const Batch& batch = stream.batch_at(t);
        StepStability step;
        step.t = t;

        std::vector<const SparseVector*> test_xs;
        std::vector<int> test_labels;
        test_xs.reserve(batch.samples.size());
        for (const Sample& s : batch.samples) {
            if (!s.true_label) throw Error("beta_series: batch sample without ground truth");
            test_xs.push_back(&s.x);
            test_labels.push_back(*s.true_label);
        }

        auto single_class = [](std::span<const int> ys) {
            bool pos = false, neg = false;
            for (int y : ys) (y != 0 ? pos : neg) = true;
            return !(pos && neg);
        };
        if (single_class(train.labels) || single_class(test_labels)) {
            report.steps.push_back(std::move(step)); // beta stays missing
            continue;
        }

        AssociationVector tr = association_vector(train.xs, train.labels, stream.d, alpha);
        AssociationVector ts = association_vector(test_xs, test_labels, stream.d, alpha);
        step.a_train.resize(tr.features.size());
        step.a_test.resize(ts.features.size());
        for (size_t j = 0; j < tr.features.size(); ++j) step.a_train[j] = tr.features[j].a;
        for (size_t j = 0; j < ts.features.size(); ++j) step.a_test[j] = ts.features[j].a;
        step.counts = stability_counts(step.a_train, step.a_test);
        step.beta = step.counts.beta;
        step.train_features = std::move(tr.features);
        step.test_features = std::move(ts.features);
        report.steps.push_back(std::move(step));
    }
    return report;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw Error("pearson: need >= 3 paired values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("correlate: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw Error("kendall: need >= 3 paired values");
    int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0, ties_both = 0;
    const size_t n = x.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0)
                ++ties_both;
            else if (dx == 0.0)
                ++ties_x;
            else if (dy == 0.0)
                ++ties_y;
            else if (dx * dy > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    }
    double n_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    double denom_x = n_pairs - static_cast<double>(ties_x + ties_both);
    double denom_y = n_pairs - static_cast<double>(ties_y + ties_both);
    if (denom_x <= 0.0 || denom_y <= 0.0) throw Error("correlate: zero variance");
    return static_cast<double>(concordant - discordant) / std::sqrt(denom_x * denom_y);
}

CorrelationReport correlate(std::span<const double> x, std::span<const double> y, int resamples,
                            uint64_t seed) {
    if (x.size() != y.size() || x.size() < 3) throw Error("correlate: need >= 3 paired values");
    if (resamples < 1) throw Error("correlate: need at least one resample");

    CorrelationReport rep;
    rep.resamples = resamples;
    rep.seed = seed;
    rep.pearson_r = pearson(x, y);
    rep.kendall_tau = kendall_tau_b(x, y);

    const double obs_r = std::fabs(rep.pearson_r);
    const double obs_tau = std::fabs(rep.kendall_tau);
    int64_t hits_r = 0, hits_tau = 0;
    const int nthreads = max_threads();
#pragma omp parallel num_threads(nthreads)
    {
        std::vector<double> perm(y.begin(), y.end());
#pragma omp for schedule(static) reduction(+ : hits_r, hits_tau)
        for (int rsm = 0; rsm < resamples; ++rsm) {
            std::copy(y.begin(), y.end(), perm.begin());
            Rng rng(mix_seed(seed, static_cast<uint64_t>(rsm)));
            rng.shuffle(perm);
            if (std::fabs(pearson(x, perm)) >= obs_r) ++hits_r;
            if (std::fabs(kendall_tau_b(x, perm)) >= obs_tau) ++hits_tau;
        }
    }
    rep.p_r = (1.0 + static_cast<double>(hits_r)) / (static_cast<double>(resamples) + 1.0);
    rep.p_tau = (1.0 + static_cast<double>(hits_tau)) / (static_cast<double>(resamples) + 1.0);
    return rep;
}

} // namespace driftbench::driftstat
