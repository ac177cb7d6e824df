#include "driftbench/semisup.hpp"

#include "driftbench/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftbench::semisup {

void SSLConfig::validate() const {
    if (!(budget_fraction >= 0.0 && budget_fraction <= 1.0))
        throw ConfigError("ssl: budget_fraction must lie in [0,1]");
    if (!(at_malware_share >= 0.0 && at_malware_share <= 1.0))
        throw ConfigError("ssl: at_malware_share must lie in [0,1]");
}

namespace {

void check_pool(std::span<const double> scores, size_t k, const char* who) {
    if (k > scores.size()) throw Error(std::string(who) + ": budget exceeds pool size");
    for (double f : scores)
        if (!(f >= 0.0 && f <= 1.0)) throw Error(std::string(who) + ": score outside [0,1]");
}

void finish(PseudoLabelResult& r) {
    std::sort(r.assignments.begin(), r.assignments.end(),
              [](const Assignment& a, const Assignment& b) { return a.index < b.index; });
    r.achieved_k = r.assignments.size();
}

} // namespace

PseudoLabelResult pseudo_label_st(std::span<const double> scores, size_t k) {
    check_pool(scores, k, "pseudo_label_st");
    PseudoLabelResult r;
    r.requested_k = k;
    if (k == 0) {
        r.achieved_k = 0;
        return r;
    }

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    auto confidence = [&](size_t i) { return std::max(scores[i], 1.0 - scores[i]); };
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return confidence(a) > confidence(b); });

    for (size_t t = 0; t < k; ++t) {
        size_t i = order[t];
        r.assignments.push_back({i, scores[i] >= 0.5 ? 1 : 0});
    }
    r.gamma = confidence(order[k - 1]);
    finish(r);
    return r;
}

PseudoLabelResult pseudo_label_at(std::span<const double> scores, size_t k, double malware_share) {
    check_pool(scores, k, "pseudo_label_at");
    if (!(malware_share >= 0.0 && malware_share <= 1.0))
        throw Error("pseudo_label_at: malware_share must lie in [0,1]");
    PseudoLabelResult r;
    r.requested_k = k;
    if (k == 0) {
        r.achieved_k = 0;
        return r;
    }

    const size_t n = scores.size();
    size_t k_mal = static_cast<size_t>(std::floor(malware_share * static_cast<double>(k)));
    if (k_mal > k) k_mal = k;

    std::vector<size_t> by_desc(n);
    std::iota(by_desc.begin(), by_desc.end(), size_t{0});
    std::stable_sort(by_desc.begin(), by_desc.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    std::vector<char> taken(n, 0);
    for (size_t t = 0; t < k_mal && t < n; ++t) {
        size_t i = by_desc[t];
        taken[i] = 1;
        r.assignments.push_back({i, 1});
        r.gamma_plus = scores[i];
    }

    std::vector<size_t> by_asc(n);
    std::iota(by_asc.begin(), by_asc.end(), size_t{0});
    std::stable_sort(by_asc.begin(), by_asc.end(),
                     [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    size_t k_good = k - std::min(k_mal, k);
    for (size_t t = 0; t < by_asc.size() && k_good > 0; ++t) {
        size_t i = by_asc[t];
        if (taken[i]) continue; // malware-first overlap resolution
        taken[i] = 1;
        r.assignments.push_back({i, 0});
        r.gamma_minus = scores[i];
        --k_good;
    }
    finish(r);
    return r;
}

PseudoLabelResult pseudo_label(const SSLConfig& cfg, std::span<const double> scores, size_t k) {
    cfg.validate();
    if (cfg.strategy == SslStrategy::ST) return pseudo_label_st(scores, k);
    return pseudo_label_at(scores, k, cfg.at_malware_share);
}

std::string to_string(SslStrategy s) { return s == SslStrategy::ST ? "ST" : "AT"; }

SslStrategy ssl_strategy_from_string(const std::string& s) {
    if (s == "ST") return SslStrategy::ST;
    if (s == "AT") return SslStrategy::AT;
    throw ConfigError("unknown SSL strategy: " + s);
}

} // namespace driftbench::semisup
