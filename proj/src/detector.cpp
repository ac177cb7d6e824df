#include "driftbench/detector.hpp"

#include "driftbench/kernels.hpp"
#include "driftbench/threads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace driftbench::detector {

void TrainConfig::validate() const {
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda))
        throw ConfigError("train: l2_lambda must be a finite non-negative real");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("train: learning_rate must be positive");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
}

DetectorModel train(std::span<const TrainExample> examples, int32_t dim, const TrainConfig& cfg,
                    TrainDiagnostics* diagnostics) {
    cfg.validate();
    if (examples.empty()) throw Error("train: empty training set");

    const size_t n = examples.size();
    std::vector<const SparseVector*> rows(n);
    std::vector<int8_t> y(n);
    size_t n_pos = 0;
    for (size_t i = 0; i < n; ++i) {
        rows[i] = examples[i].x;
        if (rows[i]->dim != dim) throw Error("train: sample dimension mismatch");
        y[i] = static_cast<int8_t>(examples[i].label != 0);
        n_pos += y[i];
    }
    const size_t n_neg = n - n_pos;

    std::vector<double> weight(n, 1.0);
    if (cfg.class_weighting == ClassWeighting::Balanced) {
        if (n_pos == 0 || n_neg == 0) throw Error("train: degenerate class distribution");
        double w_pos = static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
        double w_neg = static_cast<double>(n) / (2.0 * static_cast<double>(n_neg));
        for (size_t i = 0; i < n; ++i) weight[i] = y[i] ? w_pos : w_neg;
    }

    kernels::Csr X = kernels::build_csr(rows, dim);
    DetectorModel m;
    m.train_config = cfg;
    m.w.assign(static_cast<size_t>(dim), 0.0);
    m.b = 0.0;

    kernels::EpochScratch scratch;
    scratch.resize(dim);
    if (diagnostics) diagnostics->epoch_loss.clear();
    for (int e = 0; e < cfg.epochs; ++e) {
        double loss = kernels::logistic_epoch(X, y, weight, cfg.learning_rate, cfg.l2_lambda,
                                              m.w, m.b, scratch);
        if (diagnostics) diagnostics->epoch_loss.push_back(loss);
    }
    return m;
}

double raw_margin(const DetectorModel& m, const SparseVector& x) {
    if (x.dim != m.dim()) throw Error("score: dimension mismatch");
    return x.dot_dense(m.w) + m.b;
}

double squash(const DetectorModel& m, double margin) {
    if (m.calibration) return kernels::sigmoid(-(m.calibration->a * margin + m.calibration->b));
    return kernels::sigmoid(margin);
}

double score(const DetectorModel& m, const SparseVector& x) {
    return squash(m, raw_margin(m, x));
}

std::vector<double> score_batch(const DetectorModel& m,
                                std::span<const SparseVector* const> pool) {
    for (const SparseVector* x : pool)
        if (x->dim != m.dim()) throw Error("score: dimension mismatch");
    kernels::Csr X = kernels::build_csr(pool, m.dim());
    std::vector<double> out;
    kernels::score_margins(X, m.w, m.b, out);
    const int64_t n = static_cast<int64_t>(out.size());
    const int nthreads = max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int64_t i = 0; i < n; ++i) out[static_cast<size_t>(i)] = squash(m, out[static_cast<size_t>(i)]);
    return out;
}

PlattCalibration fit_platt(std::span<const double> raw_scores, std::span<const int> labels) {
    if (raw_scores.size() != labels.size()) throw Error("fit_platt: length mismatch");
    const size_t n = raw_scores.size();
    if (n < 4) throw Error("fit_platt: need at least 4 scores");
    size_t n_pos = 0;
    for (double s : raw_scores)
        if (!std::isfinite(s)) throw Error("fit_platt: non-finite score");
    for (int y : labels) n_pos += (y != 0);
    const size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw Error("fit_platt: single-class input");

    // Newton with backtracking on the smoothed cross-entropy (Platt 1999,
    // with the numerically robust formulation of Lin, Weng & Keerthi).
    const double hi_target = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double lo_target = 1.0 / (static_cast<double>(n_neg) + 2.0);
    std::vector<double> target(n);
    for (size_t i = 0; i < n; ++i) target[i] = labels[i] != 0 ? hi_target : lo_target;

    constexpr double kSigma = 1e-12;
    constexpr double kGradTol = 1e-8;
    constexpr int kMaxIter = 100;

    // identical scores leave the slope unidentifiable; the minimum-norm
    // solution is flat at the smoothed target mean
    const auto [min_s, max_s] = std::minmax_element(raw_scores.begin(), raw_scores.end());
    if (*min_s == *max_s) {
        double mean_target = 0.0;
        for (double t : target) mean_target += t;
        mean_target /= static_cast<double>(n);
        return {0.0, std::log((1.0 - mean_target) / mean_target)};
    }

    double a = 0.0;
    double b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));

    auto objective = [&](double aa, double bb) {
        double f = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double z = aa * raw_scores[i] + bb;
            if (z >= 0.0)
                f += target[i] * z + std::log1p(std::exp(-z));
            else
                f += (target[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    double fval = objective(a, b);
    for (int iter = 0; iter < kMaxIter; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double z = a * raw_scores[i] + b;
            double p, q;
            if (z >= 0.0) {
                double e = std::exp(-z);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                double e = std::exp(z);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            double d2 = p * q;
            h11 += raw_scores[i] * raw_scores[i] * d2;
            h22 += d2;
            h21 += raw_scores[i] * d2;
            double d1 = target[i] - p;
            g1 += raw_scores[i] * d1;
            g2 += d1;
        }
        if (std::sqrt(g1 * g1 + g2 * g2) <= kGradTol) break;

        double det = h11 * h22 - h21 * h21;
        double da = -(h22 * g1 - h21 * g2) / det;
        double db = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= 1e-10) {
            double na = a + step * da, nb = b + step * db;
            double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < 1e-10) break; // line search failed, keep current point
    }
    return {a, b};
}

double threshold_at_fpr(std::span<const double> goodware_scores, double fpr_target) {
    if (goodware_scores.empty()) throw Error("threshold_at_fpr: no goodware scores");
    if (!(fpr_target > 0.0 && fpr_target <= 1.0))
        throw Error("threshold_at_fpr: target must lie in (0,1]");
    std::vector<double> cand(goodware_scores.begin(), goodware_scores.end());
    for (double s : cand)
        if (!std::isfinite(s)) throw Error("threshold_at_fpr: non-finite score");
    cand.push_back(0.0);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    const double n = static_cast<double>(goodware_scores.size());
    for (double tau : cand) {
        size_t above = 0;
        for (double s : goodware_scores) above += (s > tau);
        if (static_cast<double>(above) / n <= fpr_target) return tau;
    }
    return cand.back(); // unreachable: the maximum always satisfies the bound
}

namespace {

nlohmann::json train_config_json(const TrainConfig& cfg) {
    return {{"l2_lambda", cfg.l2_lambda},
            {"learning_rate", cfg.learning_rate},
            {"epochs", cfg.epochs},
            {"class_weighting", to_string(cfg.class_weighting)},
            {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.l2_lambda = j.at("l2_lambda").get<double>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.class_weighting = class_weighting_from_string(j.at("class_weighting").get<std::string>());
    cfg.seed = j.at("seed").get<uint64_t>();
    return cfg;
}

} // namespace

void save_checkpoint(const DetectorModel& m, const std::filesystem::path& path) {
    nlohmann::json j = {{"w", m.w},
                        {"b", m.b},
                        {"train_config", train_config_json(m.train_config)}};
    j["calibration"] =
        m.calibration ? nlohmann::json{{"a", m.calibration->a}, {"b", m.calibration->b}}
                      : nlohmann::json(nullptr);
    j["tau"] = m.tau ? nlohmann::json(*m.tau) : nlohmann::json(nullptr);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << j.dump() << '\n';
}

DetectorModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing checkpoint " + path.string());
    nlohmann::json j;
    in >> j;
    DetectorModel m;
    m.w = j.at("w").get<std::vector<double>>();
    m.b = j.at("b").get<double>();
    m.train_config = train_config_from_json(j.at("train_config"));
    if (!j.at("calibration").is_null())
        m.calibration = PlattCalibration{j["calibration"].at("a").get<double>(),
                                         j["calibration"].at("b").get<double>()};
    if (!j.at("tau").is_null()) m.tau = j["tau"].get<double>();
    return m;
}

std::unordered_map<std::string, double> load_score_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing score file: " + path.string());
    std::unordered_map<std::string, double> out;
    std::string id;
    double s;
    int line = 0;
    while (in >> id >> s) {
        ++line;
        if (!std::isfinite(s))
            throw Error("score file " + path.string() + ": non-finite score at entry " +
                        std::to_string(line));
        if (!out.emplace(id, s).second)
            throw Error("score file " + path.string() + ": duplicate id " + id);
    }
    return out;
}

std::vector<double> scores_for_batch(const std::unordered_map<std::string, double>& table,
                                     const Batch& batch) {
    std::vector<double> out;
    out.reserve(batch.samples.size());
    for (const Sample& s : batch.samples) {
        auto it = table.find(s.id);
        if (it == table.end())
            throw Error("external scores: no entry for sample " + s.id + " in period " +
                        std::to_string(batch.period));
        out.push_back(kernels::sigmoid(it->second));
    }
    return out;
}

std::string to_string(ClassWeighting w) {
    return w == ClassWeighting::Balanced ? "balanced" : "none";
}

ClassWeighting class_weighting_from_string(const std::string& s) {
    if (s == "balanced") return ClassWeighting::Balanced;
    if (s == "none") return ClassWeighting::None;
    throw ConfigError("unknown class_weighting: " + s);
}

} // namespace driftbench::detector
