#pragma once

#include "driftbench/sparse.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace driftbench::detector {

enum class ClassWeighting { None, Balanced };

struct TrainConfig {
    double l2_lambda = 1e-4;
    double learning_rate = 0.5;
    int epochs = 200;
    ClassWeighting class_weighting = ClassWeighting::Balanced;
    uint64_t seed = 0;

    void validate() const;
};

// Sigmoid recalibration of the raw margin; monotone increasing iff a < 0.
struct PlattCalibration {
    double a = -1.0;
    double b = 0.0;
};

// Linear scorer f(x) in [0,1]. Raw margin w·x + b is squashed by the default
// sigmoid, or by the fitted Platt map when calibration is present.
struct DetectorModel {
    std::vector<double> w;
    double b = 0.0;
    std::optional<PlattCalibration> calibration;
    TrainConfig train_config;
    std::optional<double> tau;

    int32_t dim() const { return static_cast<int32_t>(w.size()); }
};

struct TrainExample {
    const SparseVector* x;
    int label; // 0 or 1
};

struct TrainDiagnostics {
    std::vector<double> epoch_loss; // objective at the start of each epoch
};

// Full-batch gradient descent from zero initialization, fixed epoch count.
// Deterministic for fixed (examples, cfg) regardless of thread count.
DetectorModel train(std::span<const TrainExample> examples, int32_t dim, const TrainConfig& cfg,
                    TrainDiagnostics* diagnostics = nullptr);

double raw_margin(const DetectorModel& m, const SparseVector& x);
double score(const DetectorModel& m, const SparseVector& x);
double squash(const DetectorModel& m, double margin);

// Margins then scores for a whole pool (parallel map).
std::vector<double> score_batch(const DetectorModel& m,
                                std::span<const SparseVector* const> pool);

// Platt scaling: fits (a, b) minimizing the cross-entropy of
// 1/(1+exp(a*s+b)) against smoothed targets, by Newton iterations to
// gradient norm <= 1e-8 or 100 iterations.
PlattCalibration fit_platt(std::span<const double> raw_scores, std::span<const int> labels);

// Smallest candidate threshold (observed scores plus 0) whose empirical FPR
// under the strict `>` rule stays within the target.
double threshold_at_fpr(std::span<const double> goodware_scores, double fpr_target);

void save_checkpoint(const DetectorModel& m, const std::filesystem::path& path);
DetectorModel load_checkpoint(const std::filesystem::path& path);

// External-scorer mode: `<sample id> <raw score>` per line; raw scores are
// margins and take the place of the built-in linear scorer.
std::unordered_map<std::string, double> load_score_file(const std::filesystem::path& path);

// Looks up one score per batch sample (error on a missing id) and squashes
// the raw margins, so every strategy can run on externally produced scores.
std::vector<double> scores_for_batch(const std::unordered_map<std::string, double>& table,
                                     const Batch& batch);

std::string to_string(ClassWeighting w);
ClassWeighting class_weighting_from_string(const std::string& s);

} // namespace driftbench::detector
