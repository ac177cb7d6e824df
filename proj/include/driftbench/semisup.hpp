#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftbench::semisup {

enum class SslStrategy { ST, AT };

struct SSLConfig {
    SslStrategy strategy = SslStrategy::ST;
    double budget_fraction = 0.0;
    double at_malware_share = 0.8;

    void validate() const;
};

struct Assignment {
    size_t index;
    int pseudo_label; // 0 or 1
};

struct PseudoLabelResult {
    std::vector<Assignment> assignments; // ascending pool index
    std::optional<double> gamma;         // ST confidence cut
    std::optional<double> gamma_plus;    // AT malware cut (lowest f labeled 1)
    std::optional<double> gamma_minus;   // AT goodware cut (highest f labeled 0)
    size_t requested_k = 0;
    size_t achieved_k = 0;
};

// Top-k by confidence max(f, 1-f), ties by index; f >= 0.5 labels malware.
PseudoLabelResult pseudo_label_st(std::span<const double> scores, size_t k);

// floor(share*k) highest scores labeled malware, the rest filled with the
// lowest scores as goodware; malware picks win any overlap.
PseudoLabelResult pseudo_label_at(std::span<const double> scores, size_t k, double malware_share);

PseudoLabelResult pseudo_label(const SSLConfig& cfg, std::span<const double> scores, size_t k);

std::string to_string(SslStrategy s);
SslStrategy ssl_strategy_from_string(const std::string& s);

} // namespace driftbench::semisup
