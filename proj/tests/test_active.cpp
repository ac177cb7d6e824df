#include "driftbench/active.hpp"

#include "driftbench/kernels.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

using namespace driftbench;
using active::SelectionResult;

namespace {

SparseVector make_vec(std::vector<double> dense) {
    SparseVector v;
    v.dim = static_cast<int32_t>(dense.size());
    for (size_t j = 0; j < dense.size(); ++j)
        if (dense[j] != 0.0) v.entries.push_back({static_cast<int32_t>(j), dense[j]});
    return v;
}

std::vector<const SparseVector*> ptrs(const std::vector<SparseVector>& v) {
    std::vector<const SparseVector*> out;
    for (const auto& x : v) out.push_back(&x);
    return out;
}

} // namespace

TEST_CASE("budget_k rounds half up within bounds") {
    CHECK(active::budget_k(1000, 0.01) == 10);
    CHECK(active::budget_k(3, 0.5) == 2);
    CHECK(active::budget_k(57, 0.0) == 0);
    CHECK(active::budget_k(57, 1.0) == 57);
    CHECK(active::budget_k(0, 0.37) == 0);
    CHECK_THROWS_AS(active::budget_k(10, 1.5), Error);
}

TEST_CASE("random selection is a seeded sample without replacement") {
    SelectionResult all = active::select_random(5, 5, 7);
    CHECK(all.selected == std::vector<size_t>{0, 1, 2, 3, 4});
    CHECK(active::select_random(5, 0, 7).selected.empty());

    SelectionResult a = active::select_random(100, 13, 21);
    SelectionResult b = active::select_random(100, 13, 21);
    CHECK(a.selected == b.selected);
    CHECK(a.selected.size() == 13);
    CHECK(std::is_sorted(a.selected.begin(), a.selected.end()));
    CHECK(std::adjacent_find(a.selected.begin(), a.selected.end()) == a.selected.end());

    SelectionResult c = active::select_random(100, 13, 22);
    CHECK(a.selected != c.selected);
}

TEST_CASE("uncertainty utilities match their formulas") {
    std::vector<double> scores = {0.9};
    CHECK(active::uncertainty_utilities(scores, active::UncertaintyVariant::MS)[0] ==
          doctest::Approx(-0.8));
    CHECK(active::uncertainty_utilities(scores, active::UncertaintyVariant::LCS)[0] ==
          doctest::Approx(-0.9));
    CHECK(active::uncertainty_utilities(scores, active::UncertaintyVariant::ES)[0] ==
          doctest::Approx(0.4690).epsilon(1e-4));

    std::vector<double> pool = {0.1, 0.45, 0.95};
    for (auto v : {active::UncertaintyVariant::MS, active::UncertaintyVariant::LCS,
                   active::UncertaintyVariant::ES}) {
        SelectionResult r = active::rank_uncertainty(pool, v, 1);
        CHECK(r.selected == std::vector<size_t>{1}); // nearest to 0.5
        std::vector<double> u = active::uncertainty_utilities(std::vector<double>{0.5, 0.3}, v);
        CHECK(u[0] > u[1]); // boundary sample maximal
    }
}

TEST_CASE("MS, LCS and ES induce identical selections") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 5 + rng.next_below(200);
        std::vector<double> scores;
        // every other trial draws from a coarse grid so ties (including the
        // mirrored f vs 1-f kind) hit the shared index tie rule
        bool gridded = trial % 2 == 1;
        for (size_t i = 0; i < n; ++i)
            scores.push_back(gridded ? static_cast<double>(rng.next_below(17)) / 16.0
                                     : rng.next_double());
        size_t k = rng.next_below(n + 1);
        SelectionResult ms = active::rank_uncertainty(scores, active::UncertaintyVariant::MS, k);
        SelectionResult lcs = active::rank_uncertainty(scores, active::UncertaintyVariant::LCS, k);
        SelectionResult es = active::rank_uncertainty(scores, active::UncertaintyVariant::ES, k);
        CHECK(ms.selected == lcs.selected);
        CHECK(ms.selected == es.selected);
    }
}

TEST_CASE("coreset runs farthest-first") {
    std::vector<SparseVector> line = {make_vec({0}), make_vec({1}), make_vec({10})};
    std::vector<SparseVector> labeled = {make_vec({0})};
    SelectionResult r =
        active::select_coreset(ptrs(line), ptrs(labeled), 1, active::CoresetInit::Labeled);
    CHECK(r.selected == std::vector<size_t>{2});

    SUBCASE("k = |U| returns everything in greedy order") {
        SelectionResult all =
            active::select_coreset(ptrs(line), ptrs(labeled), 3, active::CoresetInit::Labeled);
        CHECK(all.selected == std::vector<size_t>{0, 1, 2});
        CHECK(all.order == std::vector<size_t>{2, 1, 0}); // hand-checked distances
    }

    SUBCASE("unit square corners break the tie by index") {
        std::vector<SparseVector> corners = {make_vec({0, 0}), make_vec({0, 1}),
                                             make_vec({1, 0}), make_vec({1, 1})};
        std::vector<SparseVector> seed = {make_vec({0, 0})};
        SelectionResult two =
            active::select_coreset(ptrs(corners), ptrs(seed), 2, active::CoresetInit::Labeled);
        CHECK(two.order == std::vector<size_t>{3, 1});
    }

    SUBCASE("empty init starts from index 0") {
        SelectionResult e =
            active::select_coreset(ptrs(line), {}, 1, active::CoresetInit::Empty);
        CHECK(e.selected == std::vector<size_t>{0});
    }
}

TEST_CASE("coreset greedy certificate") {
    Rng rng(5);
    std::vector<SparseVector> pool, labeled;
    for (int i = 0; i < 60; ++i) {
        SparseVector v;
        v.dim = 8;
        for (int32_t j = 0; j < 8; ++j)
            if (rng.next_bernoulli(0.5)) v.entries.push_back({j, rng.next_double() * 4.0});
        (i < 50 ? pool : labeled).push_back(std::move(v));
    }
    auto pool_ptrs = ptrs(pool);
    SelectionResult r =
        active::select_coreset(pool_ptrs, ptrs(labeled), 12, active::CoresetInit::Labeled);

    // replay: every chosen point dominated the remaining pool at its step
    std::vector<double> min_sq(pool.size(), std::numeric_limits<double>::infinity());
    for (const auto& z : labeled) kernels::min_sq_dist_update_serial(pool_ptrs, z, min_sq);
    std::vector<char> chosen(pool.size(), 0);
    for (size_t pick : r.order) {
        for (size_t i = 0; i < pool.size(); ++i)
            if (!chosen[i]) CHECK(min_sq[pick] >= min_sq[i]);
        chosen[pick] = 1;
        kernels::min_sq_dist_update_serial(pool_ptrs, pool[pick], min_sq);
    }
}

TEST_CASE("clue clusters with entropy weights") {
    SUBCASE("two separated clouds get one pick each") {
        std::vector<SparseVector> pts = {make_vec({0.0, 0.0}),  make_vec({0.1, 0.0}),
                                         make_vec({0.0, 0.1}),  make_vec({5.0, 5.0}),
                                         make_vec({5.1, 5.0}),  make_vec({5.0, 5.1})};
        std::vector<double> scores(6, 0.5); // uniform entropy
        for (uint64_t seed : {1ull, 2ull, 3ull, 40ull}) {
            SelectionResult r = active::select_clue(ptrs(pts), scores, 2, seed, 100, 1e-4);
            REQUIRE(r.selected.size() == 2);
            bool low = r.selected[0] <= 2, high = r.selected[1] >= 3;
            CHECK(low);
            CHECK(high);
        }
    }

    SUBCASE("k = 1 returns the sample nearest the weighted mean") {
        std::vector<SparseVector> pts = {make_vec({0.0}), make_vec({1.0}), make_vec({4.0})};
        std::vector<double> scores = {0.5, 0.9, 0.6};
        SelectionResult r = active::select_clue(ptrs(pts), scores, 1, 9, 100, 1e-9);

        double wsum = 0.0, mean = 0.0;
        std::vector<double> xs = {0.0, 1.0, 4.0};
        for (size_t i = 0; i < 3; ++i) {
            double w = metrics::binary_entropy(scores[i]);
            wsum += w;
            mean += w * xs[i];
        }
        mean /= wsum;
        size_t expected = 0;
        for (size_t i = 1; i < 3; ++i)
            if (std::fabs(xs[i] - mean) < std::fabs(xs[expected] - mean)) expected = i;
        CHECK(r.selected == std::vector<size_t>{expected});
    }

    SUBCASE("degenerate geometry falls back to index order") {
        std::vector<SparseVector> pts(4, make_vec({2.0, 2.0}));
        std::vector<double> scores(4, 0.5);
        SelectionResult r = active::select_clue(ptrs(pts), scores, 1, 3, 100, 1e-4);
        CHECK(r.selected == std::vector<size_t>{0});
    }

    SUBCASE("zero-entropy pools use uniform weights") {
        std::vector<SparseVector> pts = {make_vec({0.0, 0.0}), make_vec({9.0, 0.0}),
                                         make_vec({0.0, 9.0})};
        std::vector<double> scores = {0.0, 1.0, 0.0}; // all entropies vanish
        SelectionResult r = active::select_clue(ptrs(pts), scores, 2, 4, 100, 1e-4);
        CHECK(r.selected.size() == 2);
    }
}

TEST_CASE("badge gradient embeddings and seeding") {
    SUBCASE("embedding scalars follow the gradient formula") {
        // x = [1,0,2], f = 0.3 -> yhat = 0, psi_0 = -0.3x, psi_1 = 0.3x
        SparseVector x = make_vec({1, 0, 2});
        SparseVector origin;
        origin.dim = 3;
        double d = kernels::embedding_sq_dist(x, -0.3, 0.3, x.squared_norm(), origin, 0.0, 0.0, 0.0);
        CHECK(d == doctest::Approx(0.9).epsilon(1e-12)); // ||psi_0||^2 + ||psi_1||^2 = 0.45 + 0.45
    }

    SUBCASE("selection matches an independent dense reimplementation") {
        std::vector<SparseVector> pts = {make_vec({1, 0, 0}), make_vec({0, 2, 0}),
                                         make_vec({0, 0, 3}), make_vec({1, 1, 1}),
                                         make_vec({4, 4, 0})};
        std::vector<double> scores = {0.1, 0.6, 0.8, 0.45, 0.95};
        const size_t n = pts.size();

        for (uint64_t seed = 0; seed < 50; ++seed) {
            SelectionResult got = active::select_badge(ptrs(pts), scores, 3, seed);

            // dense oracle
            std::vector<std::vector<double>> emb(n, std::vector<double>(6, 0.0));
            for (size_t i = 0; i < n; ++i) {
                double f = scores[i];
                int yhat = f > 0.5 ? 1 : 0;
                double c0 = (1.0 - f) - (yhat == 0 ? 1.0 : 0.0);
                double c1 = f - (yhat == 1 ? 1.0 : 0.0);
                for (const auto& e : pts[i].entries) {
                    emb[i][static_cast<size_t>(e.index)] = c0 * e.value;
                    emb[i][static_cast<size_t>(e.index) + 3] = c1 * e.value;
                }
            }
            auto dist2 = [&](size_t a, size_t b) {
                double s = 0.0;
                for (size_t j = 0; j < 6; ++j) {
                    double d = emb[a][j] - emb[b][j];
                    s += d * d;
                }
                return s;
            };
            Rng rng(seed);
            std::vector<size_t> expect;
            std::vector<char> chosen(n, 0);
            std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
            size_t first = static_cast<size_t>(rng.next_below(n));
            expect.push_back(first);
            chosen[first] = 1;
            for (size_t i = 0; i < n; ++i) min_sq[i] = std::min(min_sq[i], dist2(i, first));
            min_sq[first] = 0.0;
            while (expect.size() < 3) {
                double total = 0.0;
                for (size_t i = 0; i < n; ++i)
                    if (!chosen[i]) total += min_sq[i];
                double target = rng.next_double() * total;
                double acc = 0.0;
                size_t pick = n;
                for (size_t i = 0; i < n; ++i) {
                    if (chosen[i] || min_sq[i] <= 0.0) continue;
                    acc += min_sq[i];
                    pick = i;
                    if (acc > target) break;
                }
                expect.push_back(pick);
                chosen[pick] = 1;
                for (size_t i = 0; i < n; ++i) min_sq[i] = std::min(min_sq[i], dist2(i, pick));
                min_sq[pick] = 0.0;
            }
            std::sort(expect.begin(), expect.end());
            CHECK(got.selected == expect);
        }
    }

    SUBCASE("a far outlier dominates the D^2 draw") {
        std::vector<SparseVector> pts = {make_vec({0.0}), make_vec({0.01}), make_vec({0.02}),
                                         make_vec({0.03}), make_vec({1000.0})};
        std::vector<double> scores = {0.9, 0.9, 0.9, 0.9, 0.9};
        int outlier_second = 0, applicable = 0;
        for (uint64_t seed = 0; seed < 50; ++seed) {
            SelectionResult r = active::select_badge(ptrs(pts), scores, 2, seed);
            if (r.order[0] == 4) continue; // outlier grabbed first by the uniform pick
            ++applicable;
            outlier_second += r.order[1] == 4;
        }
        CHECK(applicable > 0);
        CHECK(outlier_second == applicable);
    }

    SUBCASE("identical embeddings reduce to uniform sampling") {
        std::vector<SparseVector> pts(6, make_vec({1.0, 1.0}));
        std::vector<double> scores(6, 0.7);
        SelectionResult r = active::select_badge(ptrs(pts), scores, 4, 12);
        CHECK(r.selected.size() == 4);
        CHECK(std::adjacent_find(r.selected.begin(), r.selected.end()) == r.selected.end());
    }
}

TEST_CASE("eap scores candidates by expected average precision") {
    // 1-D toy set: 8 labeled, 4 unlabeled
    std::vector<SparseVector> labeled_x = {make_vec({-2.0}), make_vec({-1.5}), make_vec({-1.0}),
                                           make_vec({-0.5}), make_vec({0.5}),  make_vec({1.0}),
                                           make_vec({1.5}),  make_vec({2.0})};
    std::vector<detector::TrainExample> labeled;
    for (size_t i = 0; i < labeled_x.size(); ++i)
        labeled.push_back({&labeled_x[i], i < 4 ? 0 : 1});

    std::vector<SparseVector> pool_x = {make_vec({-0.8}), make_vec({0.1}), make_vec({0.7}),
                                        make_vec({3.0})};
    auto pool = ptrs(pool_x);

    detector::TrainConfig tc;
    tc.epochs = 40;
    tc.learning_rate = 0.5;
    tc.l2_lambda = 1e-4;
    tc.class_weighting = detector::ClassWeighting::None;

    detector::DetectorModel current = detector::train(labeled, 1, tc);
    std::vector<double> scores = detector::score_batch(current, pool);

    SelectionResult r = active::select_eap(pool, scores, labeled, 1, tc, 200, 3);

    // independent brute-force loop over candidates and label hypotheses
    std::vector<const SparseVector*> eval_x;
    std::vector<int> eval_y;
    for (const auto& ex : labeled) {
        eval_x.push_back(ex.x);
        eval_y.push_back(ex.label);
    }
    std::vector<double> expected;
    for (size_t i = 0; i < pool.size(); ++i) {
        double util = 0.0;
        for (int y = 0; y < 2; ++y) {
            std::vector<detector::TrainExample> aug = labeled;
            aug.push_back({pool[i], y});
            detector::DetectorModel m = detector::train(aug, 1, tc);
            std::vector<double> s = detector::score_batch(m, eval_x);
            double ap = metrics::average_precision(s, eval_y);
            util += (y == 1 ? scores[i] : 1.0 - scores[i]) * ap;
        }
        expected.push_back(util);
    }
    REQUIRE(r.utilities.size() == pool.size());
    for (size_t i = 0; i < pool.size(); ++i) CHECK(r.utilities[i] == expected[i]);

    size_t best = 0;
    for (size_t i = 1; i < expected.size(); ++i)
        if (expected[i] > expected[best]) best = i;
    CHECK(r.selected == std::vector<size_t>{best});

    SUBCASE("k = 0 selects nothing") {
        CHECK(active::select_eap(pool, scores, labeled, 0, tc, 200, 3).selected.empty());
    }

    SUBCASE("constant utilities fall back to the lowest candidate indices") {
        std::vector<SparseVector> same(5, make_vec({0.3}));
        auto same_ptrs = ptrs(same);
        std::vector<double> s(5, 0.5);
        SelectionResult c = active::select_eap(same_ptrs, s, labeled, 2, tc, 200, 3);
        CHECK(c.selected == std::vector<size_t>{0, 1});
    }

    SUBCASE("budget past the candidate cap fills randomly") {
        std::vector<SparseVector> many;
        for (int i = 0; i < 10; ++i) many.push_back(make_vec({i * 0.1}));
        auto many_ptrs = ptrs(many);
        std::vector<double> s(10, 0.4);
        SelectionResult c = active::select_eap(many_ptrs, s, labeled, 5, tc, 3, 3);
        CHECK(c.selected.size() == 5);
        CHECK(std::adjacent_find(c.selected.begin(), c.selected.end()) == c.selected.end());
    }

    SUBCASE("single-class labeled set is rejected") {
        std::vector<detector::TrainExample> mono;
        for (size_t i = 0; i < 4; ++i) mono.push_back({&labeled_x[i], 1});
        CHECK_THROWS_AS(active::select_eap(pool, scores, mono, 1, tc, 200, 3), Error);
    }
}

TEST_CASE("every strategy meets its budget and is thread-invariant") {
    Rng rng(77);
    std::vector<SparseVector> pool_x, labeled_x;
    std::vector<double> scores;
    std::vector<detector::TrainExample> labeled;
    for (int i = 0; i < 40; ++i) {
        SparseVector v;
        v.dim = 6;
        for (int32_t j = 0; j < 6; ++j)
            if (rng.next_bernoulli(0.5)) v.entries.push_back({j, rng.next_double()});
        pool_x.push_back(std::move(v));
        scores.push_back(rng.next_double());
    }
    for (int i = 0; i < 12; ++i) {
        SparseVector v;
        v.dim = 6;
        v.entries.push_back({static_cast<int32_t>(i % 6), 1.0});
        labeled_x.push_back(std::move(v));
    }
    for (size_t i = 0; i < labeled_x.size(); ++i)
        labeled.push_back({&labeled_x[i], static_cast<int>(i % 2)});
    auto pool = ptrs(pool_x);
    auto labeled_ptrs = ptrs(labeled_x);

    detector::TrainConfig tc;
    tc.epochs = 10;
    tc.class_weighting = detector::ClassWeighting::None;

    for (auto strategy : {active::Strategy::RS, active::Strategy::MS, active::Strategy::LCS,
                          active::Strategy::ES, active::Strategy::EAP, active::Strategy::CLUE,
                          active::Strategy::CoreSet, active::Strategy::BADGE}) {
        active::ALConfig cfg;
        cfg.strategy = strategy;
        cfg.budget_fraction = 0.2;
        cfg.seed = 99;
        cfg.eap_candidate_cap = 10;

        SelectionResult base = active::select(cfg, pool, scores, labeled_ptrs, labeled, tc);
        CHECK(base.selected.size() == active::budget_k(pool.size(), 0.2));
        CHECK(base.k == base.selected.size());

        for (const char* threads : {"1", "3"}) {
            setenv("DRIFTBENCH_THREADS", threads, 1);
            SelectionResult again = active::select(cfg, pool, scores, labeled_ptrs, labeled, tc);
            CHECK(again.selected == base.selected);
            CHECK(again.order == base.order);
        }
        unsetenv("DRIFTBENCH_THREADS");
    }
}

TEST_CASE("feature normalization makes geometric selection scale-invariant") {
    Rng rng(55);
    std::vector<SparseVector> pool_x, scaled_x;
    std::vector<double> scores;
    for (int i = 0; i < 30; ++i) {
        SparseVector v;
        v.dim = 5;
        for (int32_t j = 0; j < 5; ++j)
            if (rng.next_bernoulli(0.6)) v.entries.push_back({j, 0.2 + rng.next_double()});
        if (v.entries.empty()) v.entries.push_back({0, 1.0});
        pool_x.push_back(v);
        double c = 0.5 + 3.0 * rng.next_double(); // per-sample positive rescaling
        for (auto& e : v.entries) e.value *= c;
        scaled_x.push_back(std::move(v));
        scores.push_back(rng.next_double());
    }
    auto pool = ptrs(pool_x);
    auto scaled = ptrs(scaled_x);

    active::ALConfig cfg;
    cfg.strategy = active::Strategy::CoreSet;
    cfg.budget_fraction = 0.2;
    cfg.coreset_init = active::CoresetInit::Empty;
    cfg.seed = 1;
    cfg.normalize_features = true;
    detector::TrainConfig tc;

    SelectionResult a = active::select(cfg, pool, scores, {}, {}, tc);
    SelectionResult b = active::select(cfg, scaled, scores, {}, {}, tc);
    CHECK(a.order == b.order); // directions are all that matter once normalized

    cfg.normalize_features = false;
    SelectionResult raw = active::select(cfg, scaled, scores, {}, {}, tc);
    CHECK(raw.selected.size() == a.selected.size());
}

TEST_CASE("platt calibration leaves uncertainty top-k unchanged") {
    // symmetric raw margins fit a near-odd calibration map
    std::vector<double> fit_scores;
    std::vector<int> fit_labels;
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        double m = 0.2 + rng.next_double() * 2.0;
        fit_scores.push_back(m);
        fit_labels.push_back(1);
        fit_scores.push_back(-m);
        fit_labels.push_back(0);
    }
    detector::PlattCalibration cal = detector::fit_platt(fit_scores, fit_labels);
    REQUIRE(cal.a < 0.0);

    std::vector<double> margins;
    for (int i = 0; i < 30; ++i) margins.push_back(rng.next_double() * 6.0 - 3.0);
    std::vector<double> plain, calibrated;
    for (double m : margins) {
        plain.push_back(kernels::sigmoid(m));
        calibrated.push_back(1.0 / (1.0 + std::exp(cal.a * m + cal.b)));
    }
    for (size_t k : {1u, 5u, 12u}) {
        SelectionResult a = active::rank_uncertainty(plain, active::UncertaintyVariant::MS, k);
        SelectionResult b = active::rank_uncertainty(calibrated, active::UncertaintyVariant::MS, k);
        CHECK(a.selected == b.selected);
    }
}
