#include "driftbench/kernels.hpp"

#include "driftbench/threads.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace driftbench::kernels {

Csr build_csr(std::span<const SparseVector* const> rows, int32_t dim) {
    Csr m;
    m.dim = dim;
    m.offsets.reserve(rows.size() + 1);
    m.offsets.push_back(0);
    size_t nnz = 0;
    for (const SparseVector* r : rows) nnz += r->entries.size();
    m.indices.reserve(nnz);
    m.values.reserve(nnz);
    for (const SparseVector* r : rows) {
        for (const auto& e : r->entries) {
            m.indices.push_back(e.index);
            m.values.push_back(e.value);
        }
        m.offsets.push_back(static_cast<int64_t>(m.indices.size()));
    }
    return m;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double logistic_loss(double z, int y) {
    // log(1+exp(z)) - y*z
    if (z > 0.0) return (1 - y) * z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z)) - y * z;
}

namespace {

double row_margin(const Csr& X, size_t i, const std::vector<double>& w, double b) {
    double z = b;
    for (int64_t p = X.offsets[i]; p < X.offsets[i + 1]; ++p)
        z += X.values[static_cast<size_t>(p)] * w[static_cast<size_t>(X.indices[static_cast<size_t>(p)])];
    return z;
}

struct BlockRange {
    size_t begin, end;
};

BlockRange block_range(size_t n, int block) {
    size_t chunk = (n + kGradBlocks - 1) / kGradBlocks;
    size_t b = static_cast<size_t>(block) * chunk;
    size_t e = std::min(n, b + chunk);
    if (b > n) b = n;
    return {b, e};
}

// Accumulates one block's gradient and loss contribution into scratch.
void accumulate_block(const Csr& X, const std::vector<int8_t>& y,
                      const std::vector<double>& sample_weight, const std::vector<double>& w,
                      double b, int block, EpochScratch& scratch) {
    const size_t stride = static_cast<size_t>(X.dim) + 1;
    double* g = scratch.grad_blocks.data() + static_cast<size_t>(block) * stride;
    std::memset(g, 0, stride * sizeof(double));
    double loss = 0.0;
    auto [lo, hi] = block_range(X.rows(), block);
    for (size_t i = lo; i < hi; ++i) {
        double z = row_margin(X, i, w, b);
        double c = sample_weight[i];
        double a = c * (sigmoid(z) - y[i]);
        for (int64_t p = X.offsets[i]; p < X.offsets[i + 1]; ++p)
            g[static_cast<size_t>(X.indices[static_cast<size_t>(p)])] += a * X.values[static_cast<size_t>(p)];
        g[stride - 1] += a;
        loss += c * logistic_loss(z, y[i]);
    }
    scratch.loss_blocks[static_cast<size_t>(block)] = loss;
}

// Combines block partials in block order and takes the step.
double apply_step(const Csr& X, double lr, double l2, std::vector<double>& w, double& b,
                  EpochScratch& scratch) {
    const size_t n = X.rows();
    const size_t d = static_cast<size_t>(X.dim);
    const size_t stride = d + 1;
    double loss = 0.0;
    for (int s = 0; s < kGradBlocks; ++s) loss += scratch.loss_blocks[static_cast<size_t>(s)];
    loss /= static_cast<double>(n);
    double w_sq = 0.0;
    for (size_t j = 0; j < d; ++j) w_sq += w[j] * w[j];
    loss += 0.5 * l2 * w_sq;

    for (size_t j = 0; j < d; ++j) {
        double g = 0.0;
        for (int s = 0; s < kGradBlocks; ++s)
            g += scratch.grad_blocks[static_cast<size_t>(s) * stride + j];
        w[j] -= lr * (g / static_cast<double>(n) + l2 * w[j]);
    }
    double gb = 0.0;
    for (int s = 0; s < kGradBlocks; ++s)
        gb += scratch.grad_blocks[static_cast<size_t>(s) * stride + d];
    b -= lr * (gb / static_cast<double>(n));
    return loss;
}

} // namespace

void EpochScratch::resize(int32_t dim) {
    grad_blocks.assign(static_cast<size_t>(kGradBlocks) * (static_cast<size_t>(dim) + 1), 0.0);
    loss_blocks.assign(kGradBlocks, 0.0);
}

double logistic_epoch(const Csr& X, const std::vector<int8_t>& y,
                      const std::vector<double>& sample_weight, double lr, double l2,
                      std::vector<double>& w, double& b, EpochScratch& scratch) {
    const int nthreads = max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int s = 0; s < kGradBlocks; ++s)
        accumulate_block(X, y, sample_weight, w, b, s, scratch);
    return apply_step(X, lr, l2, w, b, scratch);
}

double logistic_epoch_serial(const Csr& X, const std::vector<int8_t>& y,
                             const std::vector<double>& sample_weight, double lr, double l2,
                             std::vector<double>& w, double& b, EpochScratch& scratch) {
    for (int s = 0; s < kGradBlocks; ++s)
        accumulate_block(X, y, sample_weight, w, b, s, scratch);
    return apply_step(X, lr, l2, w, b, scratch);
}

void score_margins(const Csr& X, const std::vector<double>& w, double b,
                   std::vector<double>& out) {
    const int64_t n = static_cast<int64_t>(X.rows());
    out.resize(static_cast<size_t>(n));
    const int nthreads = max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = row_margin(X, static_cast<size_t>(i), w, b);
}

void score_margins_serial(const Csr& X, const std::vector<double>& w, double b,
                          std::vector<double>& out) {
    const size_t n = X.rows();
    out.resize(n);
    for (size_t i = 0; i < n; ++i) out[i] = row_margin(X, i, w, b);
}

void min_sq_dist_update(std::span<const SparseVector* const> pool, const SparseVector& point,
                        std::vector<double>& min_sq) {
    const int64_t n = static_cast<int64_t>(pool.size());
    const int nthreads = max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int64_t i = 0; i < n; ++i) {
        double d = sparse_sq_dist(*pool[static_cast<size_t>(i)], point);
        if (d < min_sq[static_cast<size_t>(i)]) min_sq[static_cast<size_t>(i)] = d;
    }
}

void min_sq_dist_update_serial(std::span<const SparseVector* const> pool,
                               const SparseVector& point, std::vector<double>& min_sq) {
    for (size_t i = 0; i < pool.size(); ++i) {
        double d = sparse_sq_dist(*pool[i], point);
        if (d < min_sq[i]) min_sq[i] = d;
    }
}

namespace {

void assign_one(const SparseVector& x, const std::vector<std::vector<double>>& centroids,
                const std::vector<double>& centroid_sq_norms, int32_t& assign, double& dist_sq) {
    double x_sq = x.squared_norm();
    int32_t best = 0;
    double best_d = 0.0;
    for (size_t c = 0; c < centroids.size(); ++c) {
        double d = x_sq - 2.0 * x.dot_dense(centroids[c]) + centroid_sq_norms[c];
        if (d < 0.0) d = 0.0;
        if (c == 0 || d < best_d) {
            best = static_cast<int32_t>(c);
            best_d = d;
        }
    }
    assign = best;
    dist_sq = best_d;
}

} // namespace

void assign_to_centroids(std::span<const SparseVector* const> pool,
                         const std::vector<std::vector<double>>& centroids,
                         const std::vector<double>& centroid_sq_norms,
                         std::vector<int32_t>& assign, std::vector<double>& dist_sq) {
    const int64_t n = static_cast<int64_t>(pool.size());
    assign.resize(static_cast<size_t>(n));
    dist_sq.resize(static_cast<size_t>(n));
    const int nthreads = max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int64_t i = 0; i < n; ++i)
        assign_one(*pool[static_cast<size_t>(i)], centroids, centroid_sq_norms,
                   assign[static_cast<size_t>(i)], dist_sq[static_cast<size_t>(i)]);
}

void assign_to_centroids_serial(std::span<const SparseVector* const> pool,
                                const std::vector<std::vector<double>>& centroids,
                                const std::vector<double>& centroid_sq_norms,
                                std::vector<int32_t>& assign, std::vector<double>& dist_sq) {
    assign.resize(pool.size());
    dist_sq.resize(pool.size());
    for (size_t i = 0; i < pool.size(); ++i)
        assign_one(*pool[i], centroids, centroid_sq_norms, assign[i], dist_sq[i]);
}

double embedding_sq_dist(const SparseVector& a, double a0, double a1, double a_sq,
                         const SparseVector& b, double b0, double b1, double b_sq) {
    double ab = sparse_dot(a, b);
    double d = a0 * a0 * a_sq - 2.0 * a0 * b0 * ab + b0 * b0 * b_sq;
    d += a1 * a1 * a_sq - 2.0 * a1 * b1 * ab + b1 * b1 * b_sq;
    return d < 0.0 ? 0.0 : d;
}

void badge_min_sq_dist_update(std::span<const SparseVector* const> pool,
                              const std::vector<double>& c0, const std::vector<double>& c1,
                              const std::vector<double>& sq_norms, size_t chosen,
                              std::vector<double>& min_sq) {
    const int64_t n = static_cast<int64_t>(pool.size());
    const int nthreads = max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int64_t si = 0; si < n; ++si) {
        size_t i = static_cast<size_t>(si);
        double d = embedding_sq_dist(*pool[i], c0[i], c1[i], sq_norms[i], *pool[chosen],
                                     c0[chosen], c1[chosen], sq_norms[chosen]);
        if (d < min_sq[i]) min_sq[i] = d;
    }
}

void badge_min_sq_dist_update_serial(std::span<const SparseVector* const> pool,
                                     const std::vector<double>& c0, const std::vector<double>& c1,
                                     const std::vector<double>& sq_norms, size_t chosen,
                                     std::vector<double>& min_sq) {
    for (size_t i = 0; i < pool.size(); ++i) {
        double d = embedding_sq_dist(*pool[i], c0[i], c1[i], sq_norms[i], *pool[chosen],
                                     c0[chosen], c1[chosen], sq_norms[chosen]);
        if (d < min_sq[i]) min_sq[i] = d;
    }
}

} // namespace driftbench::kernels
