#include "driftbench/rng.hpp"

#include <algorithm>
#include <numeric>

namespace driftbench {

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
    if (k > n) k = n;
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    // partial Fisher-Yates: first k slots hold the sample
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace driftbench
