#pragma once

#include "driftbench/sparse.hpp"

#include <cstdint>
#include <span>
#include <vector>

// Hot numeric loops, each with an OpenMP version and a serial reference.
// Both share the same arithmetic and the same fixed reduction order, so
// their outputs are bit-identical for any thread count; tests assert this
// and tools/bench compares their throughput.
namespace driftbench::kernels {

// Row-compressed copy of a sample set, built once per training call.
struct Csr {
    int32_t dim = 0;
    std::vector<int64_t> offsets; // rows + 1
    std::vector<int32_t> indices;
    std::vector<double> values;

    size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

Csr build_csr(std::span<const SparseVector* const> rows, int32_t dim);

double sigmoid(double z);
// log(1 + exp(z)) - y*z, evaluated without overflow
double logistic_loss(double z, int y);

// w·x + b per row.
void score_margins(const Csr& X, const std::vector<double>& w, double b,
                   std::vector<double>& out);
void score_margins_serial(const Csr& X, const std::vector<double>& w, double b,
                          std::vector<double>& out);

// Gradient accumulation is blocked into a fixed number of row chunks that
// are combined in chunk order, independent of the thread count.
inline constexpr int kGradBlocks = 64;

struct EpochScratch {
    std::vector<double> grad_blocks; // kGradBlocks x (dim + 1)
    std::vector<double> loss_blocks; // kGradBlocks

    void resize(int32_t dim);
};

// One full-batch gradient-descent step on the L2-regularized logistic
// objective. Returns the objective measured at the incoming parameters.
double logistic_epoch(const Csr& X, const std::vector<int8_t>& y,
                      const std::vector<double>& sample_weight, double lr, double l2,
                      std::vector<double>& w, double& b, EpochScratch& scratch);
double logistic_epoch_serial(const Csr& X, const std::vector<int8_t>& y,
                             const std::vector<double>& sample_weight, double lr, double l2,
                             std::vector<double>& w, double& b, EpochScratch& scratch);

// min_sq[i] = min(min_sq[i], ||pool[i] - point||^2); farthest-first and
// k-means++ seeding inner loop.
void min_sq_dist_update(std::span<const SparseVector* const> pool, const SparseVector& point,
                        std::vector<double>& min_sq);
void min_sq_dist_update_serial(std::span<const SparseVector* const> pool,
                               const SparseVector& point, std::vector<double>& min_sq);

// Nearest dense centroid per pool point (ties to the lower centroid index).
void assign_to_centroids(std::span<const SparseVector* const> pool,
                         const std::vector<std::vector<double>>& centroids,
                         const std::vector<double>& centroid_sq_norms,
                         std::vector<int32_t>& assign, std::vector<double>& dist_sq);
void assign_to_centroids_serial(std::span<const SparseVector* const> pool,
                                const std::vector<std::vector<double>>& centroids,
                                const std::vector<double>& centroid_sq_norms,
                                std::vector<int32_t>& assign, std::vector<double>& dist_sq);

// Squared distance between two-block gradient embeddings
// psi(x) = (c0(x)·x, c1(x)·x), expanded through cached norms and a sparse dot.
double embedding_sq_dist(const SparseVector& a, double a0, double a1, double a_sq,
                         const SparseVector& b, double b0, double b1, double b_sq);

void badge_min_sq_dist_update(std::span<const SparseVector* const> pool,
                              const std::vector<double>& c0, const std::vector<double>& c1,
                              const std::vector<double>& sq_norms, size_t chosen,
                              std::vector<double>& min_sq);
void badge_min_sq_dist_update_serial(std::span<const SparseVector* const> pool,
                                     const std::vector<double>& c0, const std::vector<double>& c1,
                                     const std::vector<double>& sq_norms, size_t chosen,
                                     std::vector<double>& min_sq);

} // namespace driftbench::kernels
