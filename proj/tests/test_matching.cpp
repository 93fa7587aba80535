#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "topoprint/matching.hpp"

using namespace topo;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(int(rows.size()), int(rows[0].size()));
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[size_t(r)][size_t(c)];
    return m;
}

BettiCurve curve(std::vector<int> samples) { return BettiCurve{0.0, 1.0, std::move(samples)}; }

Fingerprint make_fp(const std::vector<std::vector<int>>& beta0s,
                    const std::vector<std::vector<int>>& beta1s) {
    Fingerprint fp;
    fp.config.betti_resolution = int(beta0s[0].size());
    fp.source_duration = 0.6 * double(beta0s.size()) + 0.4;
    for (size_t i = 0; i < beta0s.size(); ++i) {
        FingerprintEntry e;
        e.t = 0.5 + 0.6 * double(i);
        e.beta0 = curve(beta0s[i]);
        e.beta1 = curve(beta1s[i]);
        fp.entries.push_back(std::move(e));
    }
    return fp;
}

Fingerprint random_fp(std::mt19937_64& rng, int entries, int res = 8, int max_count = 5) {
    std::vector<std::vector<int>> b0, b1;
    for (int i = 0; i < entries; ++i) {
        std::vector<int> c0, c1;
        for (int r = 0; r < res; ++r) {
            c0.push_back(int(rng() % uint64_t(max_count + 1)));
            c1.push_back(int(rng() % uint64_t(max_count + 1)));
        }
        b0.push_back(c0);
        b1.push_back(c1);
    }
    return make_fp(b0, b1);
}

double assignment_cost(const Matrix& c, const std::vector<std::pair<int, int>>& pairs) {
    double acc = 0.0;
    for (auto [i, j] : pairs) acc += c.at(i, j);
    return acc;
}

std::vector<std::pair<double, double>> zip(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    std::vector<std::pair<double, double>> out;
    for (size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], y[i]);
    return out;
}

} // namespace

TEST_CASE("cost matrix of a fingerprint against itself has a zero diagonal") {
    std::mt19937_64 rng(1);
    Fingerprint fp = random_fp(rng, 5);
    CostMatrix cm = cost_matrix(fp, fp, 0.5);
    for (int i = 0; i < cm.values.rows; ++i) CHECK(cm.values.at(i, i) == 0.0);
}

TEST_CASE("cost matrix endpoints in lambda") {
    std::mt19937_64 rng(2);
    Fingerprint a = random_fp(rng, 4);
    Fingerprint b = random_fp(rng, 6);
    CostMatrix c0 = cost_matrix(a, b, 0.0);
    CostMatrix c1 = cost_matrix(a, b, 1.0);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(c1.values.at(i, j) ==
                  betti_l1(a.entries[size_t(i)].beta0, b.entries[size_t(j)].beta0));
            CHECK(c0.values.at(i, j) ==
                  betti_l1(a.entries[size_t(i)].beta1, b.entries[size_t(j)].beta1));
        }
    }
}

TEST_CASE("cost matrix matches a hand computation") {
    Fingerprint a = make_fp({{1, 1, 0, 0}, {2, 1, 1, 0}, {0, 0, 0, 0}},
                            {{0, 1, 0, 0}, {1, 1, 1, 1}, {1, 0, 0, 0}});
    Fingerprint b = make_fp({{1, 0, 0, 0}, {2, 2, 1, 0}, {1, 1, 1, 1}},
                            {{0, 0, 0, 0}, {1, 1, 0, 1}, {2, 0, 0, 0}});
    CostMatrix cm = cost_matrix(a, b, 0.5);
    Matrix expected = matrix_from_rows({{0.25, 0.625, 0.625},
                                        {0.875, 0.25, 0.75},
                                        {0.25, 0.875, 0.625}});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(cm.values.at(i, j) == doctest::Approx(expected.at(i, j)).epsilon(1e-15));
}

TEST_CASE("cost matrix rejects incompatible fingerprints") {
    Fingerprint a = make_fp({{1, 0}}, {{0, 0}});
    Fingerprint b = make_fp({{1, 0, 0, 0}}, {{0, 0, 0, 0}});
    CHECK_THROWS_AS(cost_matrix(a, b, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(cost_matrix(a, a, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(cost_matrix(Fingerprint{}, a, 0.5), std::invalid_argument);
}

TEST_CASE("assignment on simple matrices") {
    Matrix ident = matrix_from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(min_cost_assignment(ident) ==
          std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});

    Matrix rect = matrix_from_rows({{1, 0, 5}, {0, 9, 9}});
    auto pairs = min_cost_assignment(rect);
    CHECK(pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
    CHECK(assignment_cost(rect, pairs) == 0.0);

    CHECK_THROWS_AS(min_cost_assignment(Matrix()), std::invalid_argument);
    Matrix neg = matrix_from_rows({{-1.0}});
    CHECK_THROWS_AS(min_cost_assignment(neg), std::invalid_argument);
}

TEST_CASE("assignment cost equals exhaustive enumeration") {
    std::mt19937_64 rng(20240812);
    for (int trial = 0; trial < 100; ++trial) {
        const int r = 1 + int(rng() % 7), c = 1 + int(rng() % 7);
        Matrix m(r, c);
        for (double& v : m.data) v = double(rng() % 1000);
        auto pairs = min_cost_assignment(m);
        CAPTURE(trial);
        CHECK(int(pairs.size()) == std::min(r, c));
        CHECK(assignment_cost(m, pairs) == oracles::exhaustive_min_cost(m));
    }
}

TEST_CASE("assignment picks the lexicographically smallest optimal pair set") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const int r = 1 + int(rng() % 5), c = 1 + int(rng() % 5);
        Matrix m(r, c);
        for (double& v : m.data) v = double(rng() % 4); // small range forces ties
        CAPTURE(trial);
        CHECK(min_cost_assignment(m) == oracles::lex_smallest_optimal(m));
    }
}

TEST_CASE("assignment is deterministic and never beats the diagonal") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + int(rng() % 6);
        Matrix m(n, n);
        for (double& v : m.data) v = double(rng() % 100) / 8.0;
        auto pairs = min_cost_assignment(m);
        CHECK(pairs == min_cost_assignment(m));
        double diag = 0.0;
        for (int i = 0; i < n; ++i) diag += m.at(i, i);
        CHECK(assignment_cost(m, pairs) <= diag);
    }
}

TEST_CASE("neighborhood median basics") {
    auto pairs = zip({1, 2, 3, 4, 5}, {1, 100, 3, 4, 5});

    SUBCASE("k = 0 is the identity") { CHECK(neighborhood_median(pairs, 0) == pairs); }

    SUBCASE("k = 1 suppresses the outlier; ends pass through") {
        auto sm = neighborhood_median(pairs, 1);
        std::vector<double> got;
        for (auto& p : sm) got.push_back(p.second);
        CHECK(got == std::vector<double>{1, 3, 4, 4, 5});
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(neighborhood_median({}, 1), std::invalid_argument);
        CHECK_THROWS_AS(neighborhood_median(pairs, -1), std::invalid_argument);
        auto unsorted = zip({2, 1}, {0, 0});
        CHECK_THROWS_AS(neighborhood_median(unsorted, 1), std::invalid_argument);
    }
}

TEST_CASE("neighborhood median preserves monotone sequences and is idempotent there") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + int(rng() % 20);
        std::vector<double> xs(static_cast<size_t>(n)), ys(static_cast<size_t>(n));
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            xs[size_t(i)] = i;
            acc += double(rng() % 10);
            ys[size_t(i)] = acc;
        }
        auto pairs = zip(xs, ys);
        for (int k : {1, 2, 5}) {
            auto sm = neighborhood_median(pairs, k);
            CHECK(sm == pairs); // symmetric windows keep monotone data fixed
            CHECK(neighborhood_median(sm, k) == sm);
        }
    }
}

TEST_CASE("neighborhood median keeps monotone output monotone") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + int(rng() % 15);
        std::vector<double> xs(static_cast<size_t>(n)), ys(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            xs[size_t(i)] = i;
            ys[size_t(i)] = double(rng() % 50);
        }
        auto sm = neighborhood_median(zip(xs, ys), 2);
        // medians of overlapping windows of any data stay ordered when the
        // input windows are nested at the ends; at minimum the smoothing of
        // sorted data must stay sorted
        std::sort(ys.begin(), ys.end());
        auto sm2 = neighborhood_median(zip(xs, ys), 2);
        for (size_t i = 1; i < sm2.size(); ++i) CHECK(sm2[i].second >= sm2[i - 1].second);
    }
}

TEST_CASE("order score endpoints and hand value") {
    auto aligned = zip({0, 1, 2, 3}, {0, 1, 2, 3});
    CHECK(order_score(aligned) == 1.0);

    auto reversed = zip({0, 1, 2, 3}, {7, 6, 5, 4});
    CHECK(order_score(reversed) == -1.0);

    // direct Pearson evaluation: covariance 3, variances 5 and 5
    auto hand = zip({1, 2, 3, 4}, {2, 1, 4, 3});
    CHECK(order_score(hand) == doctest::Approx(0.6).epsilon(1e-12));

    auto flat = zip({1, 2, 3}, {5, 5, 5});
    CHECK(order_score(flat) == 0.0);

    CHECK_THROWS_AS(order_score({{1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("self comparison gives exactly zero error") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        Fingerprint fp = random_fp(rng, 3 + int(rng() % 10));
        MatchResult res = compare_fingerprints(fp, fp);
        CHECK(res.error == 0.0);
        CHECK(res.rho == 1.0);
        CHECK(res.positive);
        CHECK(res.pairs.size() == fp.entries.size());
        for (auto& [x, y] : res.pairs) CHECK(x == y);
    }
}

TEST_CASE("self comparison stays exact with duplicated entries") {
    // Identical windows tie the assignment; the lexicographic tie-break must
    // still recover the diagonal matching.
    Fingerprint fp = make_fp({{1, 1, 0, 0}, {1, 1, 0, 0}, {1, 1, 0, 0}, {2, 0, 0, 0}},
                             {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}});
    MatchResult res = compare_fingerprints(fp, fp);
    CHECK(res.error == 0.0);
    for (auto& [x, y] : res.pairs) CHECK(x == y);
}

TEST_CASE("error is symmetric for equal-length inputs") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + int(rng() % 8);
        Fingerprint a = random_fp(rng, n);
        Fingerprint b = random_fp(rng, n);
        CostMatrix cab = cost_matrix(a, b, 0.5);
        CostMatrix cba = cost_matrix(b, a, 0.5);
        CHECK(assignment_cost(cab.values, min_cost_assignment(cab.values)) ==
              doctest::Approx(assignment_cost(cba.values, min_cost_assignment(cba.values)))
                  .epsilon(1e-12));
        // with smoothing off the Pearson score itself is direction-free
        MatchResult ab = compare_fingerprints(a, b, 0.5, 0);
        MatchResult ba = compare_fingerprints(b, a, 0.5, 0);
        CHECK(ab.error == doctest::Approx(ba.error).epsilon(1e-12));
    }
}

TEST_CASE("scaling both fingerprints leaves the match invariant") {
    std::mt19937_64 rng(6);
    Fingerprint a = random_fp(rng, 6);
    Fingerprint b = random_fp(rng, 6);
    auto scale = [](Fingerprint fp, int c) {
        for (auto& e : fp.entries) {
            for (int& v : e.beta0.samples) v *= c;
            for (int& v : e.beta1.samples) v *= c;
        }
        return fp;
    };
    MatchResult base = compare_fingerprints(a, b);
    MatchResult scaled = compare_fingerprints(scale(a, 3), scale(b, 3));
    CHECK(cost_matrix(scale(a, 3), scale(b, 3), 0.5).values.at(0, 0) ==
          doctest::Approx(3.0 * cost_matrix(a, b, 0.5).values.at(0, 0)).epsilon(1e-12));
    CHECK(scaled.pairs == base.pairs);
    CHECK(scaled.rho == doctest::Approx(base.rho).epsilon(1e-12));
    CHECK(scaled.error == doctest::Approx(base.error).epsilon(1e-12));
}

TEST_CASE("error stays within [0, 2]") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        Fingerprint a = random_fp(rng, 2 + int(rng() % 8));
        Fingerprint b = random_fp(rng, 2 + int(rng() % 8));
        MatchResult res = compare_fingerprints(a, b);
        CHECK(res.error >= 0.0);
        CHECK(res.error <= 2.0);
    }
}

TEST_CASE("batch metrics on separable scores") {
    std::vector<double> errors = {0.01, 0.05, 0.1, 0.9, 1.0, 1.2};
    std::vector<bool> labels = {true, true, true, false, false, false};
    BatchMetrics m = metrics_from_scores(errors, labels, 0.5);
    CHECK(m.tp == 3);
    CHECK(m.tn == 3);
    CHECK(m.fp == 0);
    CHECK(m.fn == 0);
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.auc == 1.0);
    CHECK(m.learned_kappa == 0.9); // floor(0.01 * 3) = 0 -> smallest negative score
}

TEST_CASE("constant scores give AUC one half") {
    std::vector<double> errors(10, 0.7);
    std::vector<bool> labels = {true, false, true, false, true, false, true, false, true, false};
    BatchMetrics m = metrics_from_scores(errors, labels, 0.5);
    CHECK(m.auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("AUC equals the rank-statistic oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> errors;
        std::vector<bool> labels;
        for (int i = 0; i < 20; ++i) {
            errors.push_back(double(rng() % 40) / 20.0); // ties likely
            labels.push_back(rng() % 2 == 0);
        }
        bool has_pos = std::find(labels.begin(), labels.end(), true) != labels.end();
        bool has_neg = std::find(labels.begin(), labels.end(), false) != labels.end();
        if (!has_pos || !has_neg) continue;
        BatchMetrics m = metrics_from_scores(errors, labels, 0.25);
        CAPTURE(trial);
        CHECK(std::abs(m.auc - oracles::mann_whitney_auc(errors, labels)) <= 1e-12);
    }
}

TEST_CASE("classify_batch wires compare results through") {
    std::mt19937_64 rng(12);
    Fingerprint a = random_fp(rng, 5);
    Fingerprint b = random_fp(rng, 5);
    std::vector<LabeledPair> pairs = {{&a, &a, true}, {&b, &b, true}, {&a, &b, false}};
    BatchMetrics m = classify_batch(pairs, 0.2521);
    REQUIRE(m.errors.size() == 3);
    CHECK(m.errors[0] == 0.0);
    CHECK(m.errors[1] == 0.0);
    CHECK(m.errors[2] == compare_fingerprints(a, b).error);
    CHECK(m.tp == 2);

    CHECK_THROWS_AS(classify_batch({}, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(metrics_from_scores({}, {}, 0.25), std::invalid_argument);
}
