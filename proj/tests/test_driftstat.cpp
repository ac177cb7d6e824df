#include "driftbench/driftstat.hpp"

#include "driftbench/rng.hpp"
#include "driftbench/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace driftbench;

namespace {

// pair-enumeration oracle for the normalized U statistic
driftstat::AucResult brute_auc(std::span<const double> v0, std::span<const double> v1) {
    double u2 = 0.0; // doubled win count stays exact
    for (double b : v1)
        for (double a : v0) {
            if (b > a)
                u2 += 2.0;
            else if (b == a)
                u2 += 1.0;
        }
    driftstat::AucResult r;
    r.u = u2 / 2.0;
    r.auc = r.u / (static_cast<double>(v0.size()) * static_cast<double>(v1.size()));
    return r;
}

std::vector<int64_t> tie_profile_of(std::vector<double> pooled) {
    std::sort(pooled.begin(), pooled.end());
    std::vector<int64_t> profile;
    size_t i = 0;
    while (i < pooled.size()) {
        size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        profile.push_back(static_cast<int64_t>(j - i));
        i = j;
    }
    return profile;
}

} // namespace

TEST_CASE("feature_auc matches midrank arithmetic") {
    driftstat::AucResult perfect = driftstat::feature_auc(std::vector<double>{1, 2},
                                                          std::vector<double>{3, 4});
    CHECK(perfect.auc == 1.0);

    driftstat::AucResult mixed = driftstat::feature_auc(std::vector<double>{1, 3},
                                                        std::vector<double>{2, 4});
    CHECK(mixed.u == 3.0);
    CHECK(mixed.auc == 0.75);

    driftstat::AucResult ties = driftstat::feature_auc(std::vector<double>{2, 2, 2},
                                                       std::vector<double>{2, 2});
    CHECK(ties.auc == 0.5);

    CHECK_THROWS_AS(driftstat::feature_auc({}, std::vector<double>{1.0}), Error);
}

TEST_CASE("feature_auc equals pair enumeration exactly") {
    Rng rng(6);
    for (int trial = 0; trial < 300; ++trial) {
        size_t n0 = 1 + rng.next_below(20), n1 = 1 + rng.next_below(20);
        std::vector<double> v0, v1;
        for (size_t i = 0; i < n0; ++i)
            v0.push_back(static_cast<double>(rng.next_below(8)) / 2.0); // plenty of ties
        for (size_t i = 0; i < n1; ++i) v1.push_back(static_cast<double>(rng.next_below(8)) / 2.0);
        driftstat::AucResult fast = driftstat::feature_auc(v0, v1);
        driftstat::AucResult slow = brute_auc(v0, v1);
        CHECK(fast.u == slow.u);
        CHECK(fast.auc == slow.auc);
    }
}

TEST_CASE("wmw p-values: exact enumeration and normal tail") {
    // perfect separation of 2 vs 2: the classic 2/6 two-sided case
    std::vector<int64_t> no_ties(4, 1);
    CHECK(driftstat::wmw_pvalue(4.0, 2, 2, no_ties) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // dead-center statistic has p = 1
    CHECK(driftstat::wmw_pvalue(2.0, 2, 2, no_ties) == 1.0);

    // large-sample normal branch near the center stays insignificant
    std::vector<int64_t> profile100(100, 1);
    double center = 50.0 * 50.0 / 2.0;
    CHECK(driftstat::wmw_pvalue(center + 1.0, 50, 50, profile100) > 0.9);
    CHECK(driftstat::wmw_pvalue(center, 50, 50, profile100) == 1.0);

    // all observations tied: variance collapses, p = 1 on both branches
    CHECK(driftstat::wmw_pvalue(12.5, 5, 5, std::vector<int64_t>{10}) == 1.0);
    CHECK(driftstat::wmw_pvalue(312.5, 25, 25, std::vector<int64_t>{50}) == 1.0);

    CHECK_THROWS_AS(driftstat::wmw_pvalue(1.0, 2, 2, std::vector<int64_t>{3}), Error);
}

TEST_CASE("exact enumeration handles ties") {
    // pooled values {0,0,0,1,1}, class1 = {1,1}. Over the C(5,2)=10
    // assignments U takes 6 (x1), 3.5 (x6), 1 (x3); only U = 6 deviates
    // from the center by >= 3.
    std::vector<double> v0 = {0, 0, 0}, v1 = {1, 1};
    driftstat::AucResult r = driftstat::feature_auc(v0, v1);
    CHECK(r.u == 6.0);
    double p = driftstat::wmw_pvalue(r.u, 3, 2, tie_profile_of({0, 0, 0, 1, 1}));
    CHECK(p == doctest::Approx(1.0 / 10.0).epsilon(1e-12));
}

TEST_CASE("exact and normal p-values agree for moderate sizes") {
    Rng rng(9);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int64_t n0 = 3 + static_cast<int64_t>(rng.next_below(11));
        int64_t n1 = 3 + static_cast<int64_t>(rng.next_below(11));
        if (n0 + n1 > 16) continue;
        std::vector<double> v0, v1, pooled;
        for (int64_t i = 0; i < n0; ++i) v0.push_back(rng.next_double());
        for (int64_t i = 0; i < n1; ++i) v1.push_back(rng.next_double());
        pooled = v0;
        pooled.insert(pooled.end(), v1.begin(), v1.end());
        driftstat::AucResult r = driftstat::feature_auc(v0, v1);
        double exact = driftstat::wmw_pvalue(r.u, n0, n1, tie_profile_of(pooled));
        // same statistic pushed through the large-sample branch
        double nn = static_cast<double>(n0 + n1);
        double tie_sum = nn; // tie-free: every group has size 1
        double var = static_cast<double>(n0) * static_cast<double>(n1) / 12.0 *
                     ((nn + 1.0) - (tie_sum - tie_sum) / (nn * (nn - 1.0)));
        double dev = std::fabs(r.u - static_cast<double>(n0 * n1) / 2.0) - 0.5;
        if (dev < 0.0) dev = 0.0;
        double normal = std::erfc(dev / std::sqrt(var) / std::sqrt(2.0));
        CHECK(std::fabs(exact - std::min(normal, 1.0)) <= 0.05);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("class association encodes significant directions") {
    synth::SynthConfig cfg;
    cfg.d = 1;
    cfg.periods = 1;
    cfg.samples_per_batch = 200;
    cfg.malware_prior = {0.5};
    cfg.feature_spec = {{0.9, 0.1}};
    cfg.seed = 13;
    TemporalStream stream = synth::generate_stream(cfg);
    std::vector<double> values;
    std::vector<int> labels;
    for (const Sample& s : stream.initial.samples) {
        values.push_back(s.x.entries.empty() ? 0.0 : 1.0);
        labels.push_back(*s.true_label);
    }
    driftstat::FeatureAssociation a = driftstat::class_association(values, labels, 0.05);
    CHECK(a.a == 1);

    SUBCASE("label inversion negates the direction") {
        std::vector<int> inverted;
        for (int y : labels) inverted.push_back(1 - y);
        driftstat::FeatureAssociation b = driftstat::class_association(values, inverted, 0.05);
        CHECK(b.a == -a.a);
        CHECK(b.auc == doctest::Approx(1.0 - a.auc).epsilon(1e-12));
    }

    SUBCASE("tiny samples never clear the significance gate") {
        std::vector<double> v = {1, 2, 3, 4};
        std::vector<int> y = {0, 0, 1, 1};
        driftstat::FeatureAssociation t = driftstat::class_association(v, y, 0.05);
        CHECK(t.p == doctest::Approx(1.0 / 3.0));
        CHECK(t.a == 0);
    }

    SUBCASE("constant features carry no association") {
        std::vector<double> v(40, 1.0);
        std::vector<int> y;
        for (int i = 0; i < 40; ++i) y.push_back(i % 2);
        driftstat::FeatureAssociation c = driftstat::class_association(v, y, 0.05);
        CHECK(c.auc == 0.5);
        CHECK(c.p == 1.0);
        CHECK(c.a == 0);
    }
}

TEST_CASE("stability score implements the signed agreement") {
    CHECK(driftstat::stability_score(std::vector<int>{1, -1}, std::vector<int>{1, 0}) == 0.0);
    CHECK(driftstat::stability_score(std::vector<int>{1}, std::vector<int>{-1}) == -1.0);

    // perfect preservation scores the significant fraction
    std::vector<int> a = {1, -1, 0, 1, 0};
    CHECK(driftstat::stability_score(a, a) == doctest::Approx(3.0 / 5.0));

    CHECK_THROWS_AS(driftstat::stability_score(std::vector<int>{1}, std::vector<int>{1, 0}),
                    Error);

    SUBCASE("bounds, self-agreement, and permutation invariance") {
        Rng rng(14);
        for (int trial = 0; trial < 300; ++trial) {
            size_t d = 1 + rng.next_below(30);
            std::vector<int> tr, ts;
            for (size_t j = 0; j < d; ++j) {
                tr.push_back(static_cast<int>(rng.next_below(3)) - 1);
                ts.push_back(static_cast<int>(rng.next_below(3)) - 1);
            }
            double beta = driftstat::stability_score(tr, ts);
            CHECK(beta >= -1.0);
            CHECK(beta <= 1.0);
            CHECK(driftstat::stability_score(tr, tr) >= 0.0);

            std::vector<size_t> perm(d);
            for (size_t j = 0; j < d; ++j) perm[j] = j;
            rng.shuffle(perm);
            std::vector<int> ptr(d), pts(d);
            for (size_t j = 0; j < d; ++j) {
                ptr[j] = tr[perm[j]];
                pts[j] = ts[perm[j]];
            }
            CHECK(driftstat::stability_score(ptr, pts) == beta);
        }
    }

    SUBCASE("counts partition the features") {
        driftstat::StabilityCounts c = driftstat::stability_counts(
            std::vector<int>{1, 1, -1, 0, 0, 1}, std::vector<int>{1, -1, 0, 0, 1, 1});
        CHECK(c.preserved == 2);
        CHECK(c.flipped == 1);
        CHECK(c.half_significant == 2);
        CHECK(c.both_null == 1);
        CHECK(c.beta == doctest::Approx((2.0 - 1.0 - 2.0) / 6.0));
    }
}

TEST_CASE("beta series over a synthetic stream") {
    synth::SynthConfig cfg;
    cfg.d = 10;
    cfg.periods = 5;
    cfg.samples_per_batch = 400;
    cfg.malware_prior.assign(5, 0.4);
    cfg.feature_spec.assign(10, {0.05, 0.05});
    for (int j = 0; j < 5; ++j) cfg.feature_spec[static_cast<size_t>(j)] = {0.8, 0.1};
    cfg.seed = 77;

    auto training_sets = [](const TemporalStream& stream) {
        // frozen training set: period 0 everywhere
        driftstat::LabeledSet base;
        for (const Sample& s : stream.initial.samples) {
            base.xs.push_back(&s.x);
            base.labels.push_back(*s.true_label);
        }
        return std::vector<driftstat::LabeledSet>(static_cast<size_t>(stream.horizon()), base);
    };

    SUBCASE("drift-free stream keeps beta nearly constant") {
        TemporalStream stream = synth::generate_stream(cfg);
        auto sets = training_sets(stream);
        driftstat::StabilityReport rep = driftstat::beta_series(stream, sets, 0.05);
        REQUIRE(rep.steps.size() == 4);
        double lo = 1.0, hi = -1.0;
        for (const auto& step : rep.steps) {
            REQUIRE(step.beta.has_value());
            lo = std::min(lo, *step.beta);
            hi = std::max(hi, *step.beta);
        }
        CHECK(hi - lo <= 0.1);
        CHECK(hi > 0.3); // the five planted features stay significant
    }

    SUBCASE("flipping every discriminative feature craters beta") {
        synth::SynthConfig drifted = cfg;
        for (int j = 0; j < 5; ++j) drifted.drift_events.push_back({3, j});
        TemporalStream stream = synth::generate_stream(drifted);
        auto sets = training_sets(stream);
        driftstat::StabilityReport rep = driftstat::beta_series(stream, sets, 0.05);
        double before = *rep.steps[1].beta; // t = 2, pre-drift
        double after = *rep.steps[2].beta;  // t = 3, post-drift
        CHECK(before - after >= 2.0 * 5.0 / 10.0 - 0.15); // flips swing each feature by ~2/d
        CHECK(after < 0.0);
    }

    SUBCASE("all-null indicator vectors give beta exactly zero") {
        std::vector<int> zeros(10, 0);
        CHECK(driftstat::stability_score(zeros, zeros) == 0.0);
    }
}

TEST_CASE("correlation and permutation tests") {
    std::vector<double> x = {1, 2, 3};
    CHECK(driftstat::pearson(x, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(driftstat::kendall_tau_b(x, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(driftstat::kendall_tau_b(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));

    CHECK_THROWS_WITH_AS(driftstat::correlate(x, std::vector<double>{5, 5, 5}, 100, 1),
                         doctest::Contains("zero variance"), Error);

    SUBCASE("clear linear signal is detected") {
        std::vector<double> xs, ys;
        Rng rng(3);
        for (int i = 0; i < 40; ++i) {
            double v = rng.next_double();
            xs.push_back(v);
            ys.push_back(2.0 * v + 0.05 * rng.next_double());
        }
        driftstat::CorrelationReport rep = driftstat::correlate(xs, ys, 999, 5);
        CHECK(rep.pearson_r > 0.9);
        CHECK(rep.p_r == 1.0 / 1000.0); // bounded below by 1/(R+1)
        CHECK(rep.p_tau <= 0.01);
    }

    SUBCASE("independent series rarely reach small p") {
        int alarms = 0;
        for (uint64_t trial = 0; trial < 100; ++trial) {
            std::vector<double> xs, ys;
            Rng rng(1000 + trial);
            for (int i = 0; i < 30; ++i) {
                xs.push_back(rng.next_double());
                ys.push_back(rng.next_double());
            }
            driftstat::CorrelationReport rep = driftstat::correlate(xs, ys, 499, trial);
            if (rep.p_r < 0.01) ++alarms;
        }
        CHECK(alarms <= 5);
    }

    SUBCASE("permutation p-values are reproducible and bounded") {
        std::vector<double> xs = {0.1, 0.9, 0.3, 0.7, 0.2, 0.8};
        std::vector<double> ys = {0.2, 0.7, 0.4, 0.6, 0.1, 0.9};
        driftstat::CorrelationReport a = driftstat::correlate(xs, ys, 2000, 8);
        driftstat::CorrelationReport b = driftstat::correlate(xs, ys, 2000, 8);
        CHECK(a.p_r == b.p_r);
        CHECK(a.p_tau == b.p_tau);
        CHECK(a.p_r >= 1.0 / 2001.0);
        CHECK(a.p_r <= 1.0);
    }

    SUBCASE("pearson is affine-invariant, kendall monotone-invariant") {
        Rng rng(19);
        std::vector<double> xs, ys;
        for (int i = 0; i < 25; ++i) {
            xs.push_back(rng.next_double());
            ys.push_back(rng.next_double());
        }
        double r0 = driftstat::pearson(xs, ys);
        double t0 = driftstat::kendall_tau_b(xs, ys);
        std::vector<double> affine, warped;
        for (double v : ys) {
            affine.push_back(3.5 * v + 2.0);
            warped.push_back(std::exp(2.0 * v));
        }
        CHECK(driftstat::pearson(xs, affine) == doctest::Approx(r0).epsilon(1e-12));
        CHECK(driftstat::kendall_tau_b(xs, warped) == doctest::Approx(t0).epsilon(1e-12));
    }
}

TEST_CASE("benjamini-hochberg adjustment is monotone and bounded") {
    std::vector<double> p = {0.01, 0.04, 0.03, 0.5};
    std::vector<double> adj = driftstat::benjamini_hochberg(p);
    REQUIRE(adj.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(adj[i] >= p[i]);
        CHECK(adj[i] <= 1.0);
    }
    CHECK(adj[0] == doctest::Approx(0.04)); // 0.01 * 4 / 1
    CHECK(adj[3] == doctest::Approx(0.5));
}
