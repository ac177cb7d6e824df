#include "driftbench/semisup.hpp"

#include "driftbench/rng.hpp"
#include "driftbench/sparse.hpp"

#include <doctest.h>

#include <algorithm>

using namespace driftbench;

namespace {

int label_of(const semisup::PseudoLabelResult& r, size_t index) {
    for (const auto& a : r.assignments)
        if (a.index == index) return a.pseudo_label;
    return -1;
}

} // namespace

TEST_CASE("symmetric thresholding takes the most confident samples") {
    semisup::PseudoLabelResult r =
        semisup::pseudo_label_st(std::vector<double>{0.95, 0.5, 0.05}, 2);
    CHECK(r.achieved_k == 2);
    CHECK(label_of(r, 0) == 1);
    CHECK(label_of(r, 2) == 0);
    CHECK(*r.gamma == 0.95);

    SUBCASE("empty budget") {
        semisup::PseudoLabelResult e = semisup::pseudo_label_st(std::vector<double>{0.9}, 0);
        CHECK(e.assignments.empty());
        CHECK(e.achieved_k == 0);
    }

    SUBCASE("all scores at the boundary label malware") {
        semisup::PseudoLabelResult t =
            semisup::pseudo_label_st(std::vector<double>{0.5, 0.5, 0.5}, 2);
        CHECK(t.achieved_k == 2);
        CHECK(label_of(t, 0) == 1);
        CHECK(label_of(t, 1) == 1);
        CHECK(*t.gamma == 0.5);
    }
}

TEST_CASE("asymmetric thresholding splits the budget malware-first") {
    semisup::PseudoLabelResult r =
        semisup::pseudo_label_at(std::vector<double>{0.9, 0.7, 0.2, 0.1}, 2, 0.5);
    CHECK(r.achieved_k == 2);
    CHECK(label_of(r, 0) == 1);
    CHECK(label_of(r, 3) == 0);
    CHECK(*r.gamma_plus == 0.9);
    CHECK(*r.gamma_minus == 0.1);

    SUBCASE("share 1.0 labels only malware") {
        semisup::PseudoLabelResult m =
            semisup::pseudo_label_at(std::vector<double>{0.9, 0.7, 0.2, 0.1}, 2, 1.0);
        CHECK(m.achieved_k == 2);
        CHECK(label_of(m, 0) == 1);
        CHECK(label_of(m, 1) == 1);
        CHECK_FALSE(m.gamma_minus.has_value());
    }

    SUBCASE("budget split on a crowded pool") {
        semisup::PseudoLabelResult s =
            semisup::pseudo_label_at(std::vector<double>{0.6, 0.55, 0.5}, 3, 0.8);
        CHECK(s.achieved_k == 3);
        CHECK(label_of(s, 0) == 1);
        CHECK(label_of(s, 1) == 1);
        CHECK(label_of(s, 2) == 0); // k+ = floor(2.4) = 2, remainder goodware
        CHECK(*s.gamma_plus == 0.55);
        CHECK(*s.gamma_minus == 0.5);
    }
}

TEST_CASE("assignments always satisfy their reported thresholds") {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 1 + rng.next_below(30);
        std::vector<double> scores;
        for (size_t i = 0; i < n; ++i) scores.push_back(rng.next_double());
        size_t k = rng.next_below(n + 1);

        semisup::PseudoLabelResult st = semisup::pseudo_label_st(scores, k);
        CHECK(st.achieved_k == k);
        for (const auto& a : st.assignments) {
            if (a.pseudo_label == 1)
                CHECK(scores[a.index] >= *st.gamma);
            else
                CHECK(scores[a.index] <= 1.0 - *st.gamma);
        }

        double share = rng.next_double();
        semisup::PseudoLabelResult at = semisup::pseudo_label_at(scores, k, share);
        CHECK(at.achieved_k <= k);
        for (const auto& a : at.assignments) {
            if (a.pseudo_label == 1)
                CHECK(scores[a.index] >= *at.gamma_plus);
            else
                CHECK(scores[a.index] <= *at.gamma_minus);
        }
        // indices stay distinct
        std::vector<size_t> idx;
        for (const auto& a : at.assignments) idx.push_back(a.index);
        std::sort(idx.begin(), idx.end());
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    }
}

TEST_CASE("AT with the realized ST split reproduces ST") {
    Rng rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        // tie-free in confidence: all f distinct and no f equal to 1-f'
        std::vector<double> scores;
        size_t n = 5 + rng.next_below(20);
        for (size_t i = 0; i < n; ++i) {
            double f;
            bool clash;
            do {
                f = rng.next_double();
                clash = false;
                for (double g : scores)
                    if (f == g || f == 1.0 - g) clash = true;
            } while (clash || f == 0.5);
            scores.push_back(f);
        }
        size_t k = 1 + rng.next_below(n);
        semisup::PseudoLabelResult st = semisup::pseudo_label_st(scores, k);
        size_t realized_malware = 0;
        for (const auto& a : st.assignments) realized_malware += a.pseudo_label;
        double share = (static_cast<double>(realized_malware) + 0.5) / static_cast<double>(k);
        if (share > 1.0) share = 1.0;
        semisup::PseudoLabelResult at = semisup::pseudo_label_at(scores, k, share);
        REQUIRE(at.assignments.size() == st.assignments.size());
        for (size_t i = 0; i < st.assignments.size(); ++i) {
            CHECK(at.assignments[i].index == st.assignments[i].index);
            CHECK(at.assignments[i].pseudo_label == st.assignments[i].pseudo_label);
        }
    }
}

TEST_CASE("pseudo labeling validates its inputs") {
    CHECK_THROWS_AS(semisup::pseudo_label_st(std::vector<double>{0.5}, 2), Error);
    CHECK_THROWS_AS(semisup::pseudo_label_st(std::vector<double>{1.5}, 1), Error);
    semisup::SSLConfig cfg;
    cfg.budget_fraction = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
