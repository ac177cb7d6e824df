#include "driftbench/metrics.hpp"

#include "driftbench/detector.hpp"
#include "driftbench/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace driftbench::metrics {

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double tau) {
    if (scores.size() != labels.size() || scores.empty())
        throw Error("confusion: scores and labels must have equal non-zero length");
    Confusion c;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw Error("confusion: non-finite score");
        bool predicted_malware = scores[i] > tau;
        if (labels[i] != 0)
            predicted_malware ? ++c.tp : ++c.fn;
        else
            predicted_malware ? ++c.fp : ++c.tn;
    }
    return c;
}

FixedFprResult f1_recall_at_fpr(std::span<const double> scores, std::span<const int> labels,
                                double fpr_target) {
    if (scores.size() != labels.size()) throw Error("f1_recall_at_fpr: length mismatch");
    std::vector<double> goodware;
    for (size_t i = 0; i < scores.size(); ++i)
        if (labels[i] == 0) goodware.push_back(scores[i]);
    if (goodware.empty()) throw Error("f1_recall_at_fpr: no goodware in batch");

    FixedFprResult r;
    r.tau = detector::threshold_at_fpr(goodware, fpr_target);
    r.counts = confusion(scores, labels, r.tau);
    const int64_t n_mal = r.counts.tp + r.counts.fn;
    if (n_mal > 0) {
        r.recall = static_cast<double>(r.counts.tp) / static_cast<double>(n_mal);
        if (r.counts.tp == 0) {
            r.f1 = 0.0;
        } else {
            double precision =
                static_cast<double>(r.counts.tp) / static_cast<double>(r.counts.tp + r.counts.fp);
            r.f1 = 2.0 * precision * *r.recall / (precision + *r.recall);
        }
    }
    return r;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error("average_precision: length mismatch");
    int64_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0);
    if (n_pos == 0) throw Error("average_precision: no positives");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    int64_t seen_pos = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] != 0) {
            ++seen_pos;
            ap += static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(n_pos);
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("binary_entropy: p must lie in [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

EvalRecord evaluate_batch(int period, std::span<const double> scores,
                          std::span<const int> labels, double fpr_target) {
    EvalRecord rec;
    rec.period = period;
    rec.n = static_cast<int64_t>(scores.size());
    for (int y : labels) (y != 0 ? rec.n_mal : rec.n_good)++;
    FixedFprResult r = f1_recall_at_fpr(scores, labels, fpr_target);
    rec.tau = r.tau;
    rec.counts = r.counts;
    rec.recall = r.recall;
    rec.f1 = r.f1;
    if (rec.n_mal > 0) rec.ap = average_precision(scores, labels);
    return rec;
}

} // namespace driftbench::metrics
