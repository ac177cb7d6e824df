// Compares the OpenMP kernels against their serial references: wall time,
// speedup, and the maximum absolute deviation (expected to be exactly zero,
// since both paths share one reduction order).

#include "driftbench/kernels.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/synth.hpp"
#include "driftbench/threads.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace {

using namespace driftbench;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct BenchResult {
    double serial_s, parallel_s, max_dev;
};

void report(const char* name, const BenchResult& r) {
    std::printf("%-24s serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   max|dev| %g\n", name,
                r.serial_s * 1e3, r.parallel_s * 1e3, r.serial_s / r.parallel_s, r.max_dev);
}

double timed(const std::function<void()>& fn, int repeat) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < repeat; ++i) {
        double t0 = now_seconds();
        fn();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

double max_abs_dev(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

} // namespace

int main(int argc, char** argv) {
    int n = 20000, d = 512, repeat = 5;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "-n") && i + 1 < argc) n = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "-d") && i + 1 < argc) d = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "-r") && i + 1 < argc) repeat = std::atoi(argv[++i]);
    }
    std::printf("pool n=%d, d=%d, threads=%d\n", n, d, max_threads());

    synth::SynthConfig cfg;
    cfg.d = d;
    cfg.periods = 1;
    cfg.samples_per_batch = n;
    cfg.malware_prior = {0.4};
    cfg.feature_spec.assign(static_cast<size_t>(d), {0.08, 0.03});
    cfg.seed = 7;
    TemporalStream stream = synth::generate_stream(cfg);

    std::vector<const SparseVector*> pool;
    std::vector<int8_t> labels;
    for (const Sample& s : stream.initial.samples) {
        pool.push_back(&s.x);
        labels.push_back(static_cast<int8_t>(*s.true_label));
    }
    kernels::Csr X = kernels::build_csr(pool, d);

    Rng rng(11);
    std::vector<double> w(static_cast<size_t>(d));
    for (double& v : w) v = rng.next_double() - 0.5;

    {
        std::vector<double> out_s, out_p;
        BenchResult r;
        r.serial_s = timed([&] { kernels::score_margins_serial(X, w, 0.1, out_s); }, repeat);
        r.parallel_s = timed([&] { kernels::score_margins(X, w, 0.1, out_p); }, repeat);
        r.max_dev = max_abs_dev(out_s, out_p);
        report("score_margins", r);
    }

    {
        std::vector<double> weight(pool.size(), 1.0);
        kernels::EpochScratch scratch;
        scratch.resize(d);
        auto run = [&](bool parallel) {
            std::vector<double> wt(static_cast<size_t>(d), 0.0);
            double b = 0.0;
            for (int e = 0; e < 5; ++e)
                parallel ? kernels::logistic_epoch(X, labels, weight, 0.5, 1e-4, wt, b, scratch)
                         : kernels::logistic_epoch_serial(X, labels, weight, 0.5, 1e-4, wt, b,
                                                          scratch);
            wt.push_back(b);
            return wt;
        };
        std::vector<double> out_s, out_p;
        BenchResult r;
        r.serial_s = timed([&] { out_s = run(false); }, repeat);
        r.parallel_s = timed([&] { out_p = run(true); }, repeat);
        r.max_dev = max_abs_dev(out_s, out_p);
        report("logistic_epoch x5", r);
    }

    {
        std::vector<double> min_s(pool.size(), std::numeric_limits<double>::infinity());
        std::vector<double> min_p = min_s;
        auto run = [&](std::vector<double>& acc, bool parallel) {
            for (size_t c = 0; c < 16; ++c)
                parallel ? kernels::min_sq_dist_update(pool, *pool[c * 7], acc)
                         : kernels::min_sq_dist_update_serial(pool, *pool[c * 7], acc);
        };
        BenchResult r;
        r.serial_s = timed([&] { run(min_s, false); }, 1);
        r.parallel_s = timed([&] { run(min_p, true); }, 1);
        r.max_dev = max_abs_dev(min_s, min_p);
        report("min_sq_dist x16", r);
    }

    {
        const size_t kc = 8;
        std::vector<std::vector<double>> centroids(kc, std::vector<double>(static_cast<size_t>(d)));
        std::vector<double> centroid_sq(kc, 0.0);
        for (size_t c = 0; c < kc; ++c) {
            for (double& v : centroids[c]) v = rng.next_double() * 0.1;
            for (double v : centroids[c]) centroid_sq[c] += v * v;
        }
        std::vector<int32_t> a_s, a_p;
        std::vector<double> d_s, d_p;
        BenchResult r;
        r.serial_s = timed(
            [&] { kernels::assign_to_centroids_serial(pool, centroids, centroid_sq, a_s, d_s); },
            repeat);
        r.parallel_s = timed(
            [&] { kernels::assign_to_centroids(pool, centroids, centroid_sq, a_p, d_p); }, repeat);
        r.max_dev = max_abs_dev(d_s, d_p);
        for (size_t i = 0; i < a_s.size(); ++i)
            if (a_s[i] != a_p[i]) r.max_dev = std::numeric_limits<double>::infinity();
        report("assign_to_centroids", r);
    }

    {
        std::vector<double> c0(pool.size()), c1(pool.size()), sq(pool.size());
        for (size_t i = 0; i < pool.size(); ++i) {
            double f = rng.next_double();
            int yhat = f > 0.5 ? 1 : 0;
            c0[i] = (1.0 - f) - (yhat == 0 ? 1.0 : 0.0);
            c1[i] = f - (yhat == 1 ? 1.0 : 0.0);
            sq[i] = pool[i]->squared_norm();
        }
        std::vector<double> min_s(pool.size(), std::numeric_limits<double>::infinity());
        std::vector<double> min_p = min_s;
        auto run = [&](std::vector<double>& acc, bool parallel) {
            for (size_t c = 0; c < 16; ++c)
                parallel ? kernels::badge_min_sq_dist_update(pool, c0, c1, sq, c * 5, acc)
                         : kernels::badge_min_sq_dist_update_serial(pool, c0, c1, sq, c * 5, acc);
        };
        BenchResult r;
        r.serial_s = timed([&] { run(min_s, false); }, 1);
        r.parallel_s = timed([&] { run(min_p, true); }, 1);
        r.max_dev = max_abs_dev(min_s, min_p);
        report("badge_min_sq_dist x16", r);
    }

    return 0;
}
