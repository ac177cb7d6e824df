#pragma once

#include <cstdint>
#include <vector>

namespace driftbench {

// splitmix64 step; also used as a mixing function for seed derivation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a7b4f1c3d649ULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x632be59bd9b4e019ULL * (stream + 1));
    return splitmix64(s);
}

// Small deterministic generator. Platform-independent by construction:
// no standard-library distributions are used on top of it.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n > 0; unbiased via rejection
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // k distinct indices from [0, n), in ascending order
    std::vector<size_t> sample_without_replacement(size_t n, size_t k);

    // in-place Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// Counter-based uniform draw: independent of evaluation order, so parallel
// generation over (period, sample, feature) grids is schedule-invariant.
inline double counter_uniform(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t s = seed;
    s ^= 0x9e3779b97f4a7c15ULL * (a + 0x55ULL);
    s = splitmix64(s);
    s ^= 0xc2b2ae3d27d4eb4fULL * (b + 0x29ULL);
    s = splitmix64(s);
    s ^= 0x165667b19e3779f9ULL * (c + 0x11ULL);
    uint64_t z = splitmix64(s);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

} // namespace driftbench
