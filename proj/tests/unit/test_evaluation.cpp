#include "sec/evaluation.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace sec;

namespace {

LabelMatrix zo(std::initializer_list<int> ids, Index c) {
    return LabelMatrix::from_class_ids(std::vector<int>(ids), c, LabelEncoding::zero_one);
}

}  // namespace

TEST_CASE("accuracy: examples") {
    const auto a = zo({0, 1, 2, 1}, 3);
    CHECK(accuracy(a, a) == 1.0);
    CHECK(accuracy(zo({0, 1, 2, 0}, 3), a) == 0.75);
    CHECK(accuracy(a.to(LabelEncoding::pm1), a) == 1.0);
    CHECK_THROWS_AS(accuracy(a, zo({0, 1}, 3)), InputError);
}

TEST_CASE("accuracy equals the matching-column count") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        const Index c = 2 + trial % 5, t = 1 + trial % 40;
        const auto a = sec::testing::random_labels(c, t, rng);
        const auto b = sec::testing::perturb_labels(a, 0.5, rng);
        const auto ia = a.class_ids(), ib = b.class_ids();
        Index hits = 0;
        for (std::size_t j = 0; j < ia.size(); ++j) hits += ia[j] == ib[j];
        const double acc = accuracy(b, a);
        CHECK(acc == static_cast<double>(hits) / static_cast<double>(t));
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
}

TEST_CASE("accuracy_from_distance") {
    CHECK(accuracy_from_distance(20.0, 175) == doctest::Approx(0.9429).epsilon(5e-5 / 0.9429));
    CHECK(accuracy_from_distance(228.0, 420) == doctest::Approx(0.7286).epsilon(5e-5 / 0.7286));
    CHECK(accuracy_from_distance(0.0, 5) == 1.0);
    CHECK_THROWS_AS(accuracy_from_distance(1.0, 0), InputError);
}

TEST_CASE("f_score: examples") {
    const auto a = zo({0, 1, 1, 0}, 2);
    CHECK(f_score(a, a) == 1.0);
    // Class 0 is positive: TP=1, FP=1, FN=0.
    CHECK(f_score(zo({0, 0}, 2), zo({0, 1}, 2)) == doctest::Approx(2.0 / 3.0));
    CHECK(f_score(zo({1, 0, 0, 1}, 2), a) == 0.0);
    CHECK(f_score(zo({1, 2, 0}, 3), zo({0, 1, 2}, 3)) == 0.0);
}

TEST_CASE("f_score: multiclass is the macro average with empty classes scoring 0") {
    // truth 0,0,1,1 ; pred 0,1,1,1 ; class 2 absent everywhere
    const auto truth = zo({0, 0, 1, 1}, 3), pred = zo({0, 1, 1, 1}, 3);
    const double f0 = 2.0 * 1 / (2 * 1 + 0 + 1);  // TP 1, FP 0, FN 1
    const double f1 = 2.0 * 2 / (2 * 2 + 1 + 0);  // TP 2, FP 1, FN 0
    CHECK(f_score(pred, truth) == doctest::Approx((f0 + f1 + 0.0) / 3.0));
}

TEST_CASE("verdict names and marks") {
    for (auto v : {Verdict::win, Verdict::tie, Verdict::loss}) CHECK(parse_verdict(to_string(v)) == v);
    CHECK(verdict_mark(Verdict::win) == "•");
    CHECK(verdict_mark(Verdict::tie) == "⊙");
    CHECK(verdict_mark(Verdict::loss) == "○");
    CHECK_THROWS_AS(parse_verdict("draw"), InputError);
}

TEST_CASE("paired t-test: examples") {
    const std::vector<double> a{0.5, 0.6, 0.7};
    auto r = paired_t_test(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
    CHECK(r.verdict == Verdict::tie);

    r = paired_t_test({0.2, 0.4, 0.6}, {0.1, 0.2, 0.3});
    CHECK(r.t == doctest::Approx(std::sqrt(12.0)).epsilon(1e-12));
    CHECK(r.df == 2.0);
    CHECK(r.p == doctest::Approx(sec::testing::student_t_two_tailed(std::sqrt(12.0), 2)).epsilon(1e-6));
    CHECK(r.p == doctest::Approx(0.074).epsilon(0.01));
    CHECK(r.verdict == Verdict::tie);

    r = paired_t_test({0.3, 0.4, 0.5}, {0.2, 0.3, 0.4});
    CHECK(r.verdict == Verdict::win);
    CHECK(r.p == 0.0);
    r = paired_t_test({0.2, 0.3, 0.4}, {0.3, 0.4, 0.5});
    CHECK(r.verdict == Verdict::loss);
    CHECK_THROWS_AS(paired_t_test({1.0}, {0.0}), InputError);
    CHECK_THROWS_AS(paired_t_test({1.0, 2.0}, {0.0}), InputError);
}

TEST_CASE("paired t-test: p matches the integrated density and is antisymmetric") {
    std::mt19937_64 rng(72);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 2 + trial % 6;
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = N(rng) + 0.5;
            b[i] = N(rng);
        }
        const auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
        CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));
        CHECK(ab.p == doctest::Approx(ba.p).epsilon(1e-12));
        CHECK(ab.p >= 0.0);
        CHECK(ab.p <= 1.0);
        if (ab.verdict == Verdict::win) CHECK(ba.verdict == Verdict::loss);
        if (ab.verdict == Verdict::tie) CHECK(ba.verdict == Verdict::tie);
        CHECK(ab.p == doctest::Approx(sec::testing::student_t_two_tailed(ab.t, static_cast<int>(n) - 1)).epsilon(1e-6));
        CHECK((ab.verdict != Verdict::tie) == (ab.p < 0.05));
    }
}

TEST_CASE("splitmix64 reference values and repetition seeds") {
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
    CHECK(repetition_seed(0, 0) == splitmix64(0));
    CHECK(repetition_seed(5, 3) == (5ull ^ splitmix64(3)));
}

TEST_CASE("random_permutation is a deterministic permutation") {
    const auto p = random_permutation(100, 9);
    CHECK(p == random_permutation(100, 9));
    CHECK(p != random_permutation(100, 10));
    std::vector<Index> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < 100; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("random_permutation is uniform on small n") {
    std::map<std::vector<Index>, int> counts;
    const int draws = 24000;
    for (int s = 0; s < draws; ++s) counts[random_permutation(4, splitmix64(s))]++;
    CHECK(counts.size() == 24);
    for (const auto& [perm, count] : counts) CHECK(std::abs(count - 1000) < 150);
}

TEST_CASE("make_splits: sizes, disjointness, determinism, distinctness") {
    const auto s = make_split(10, 0.5, 1);
    CHECK(s.train.size() == 5);
    CHECK(s.test.size() == 5);
    std::set<Index> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 10);

    const SplitPlan plan{0.3, 50, 123};
    const auto a = make_splits(351, plan), b = make_splits(351, plan);
    REQUIRE(a.size() == 50);
    std::set<std::vector<Index>> distinct;
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a[r].train == b[r].train);
        CHECK(a[r].test == b[r].test);
        CHECK(a[r].train.size() == 105);
        distinct.insert(a[r].train);
    }
    CHECK(distinct.size() >= 49);

    CHECK_THROWS_AS(make_split(10, 1.0, 0), InputError);
    CHECK_THROWS_AS(make_split(10, 0.1, 0), InputError);
    CHECK_THROWS_AS(make_split(10, 0.9, 0), InputError);
    CHECK_THROWS_AS(make_splits(10, {0.5, 0, 0}), InputError);
}

TEST_CASE("make_folds partitions into contiguous near-equal blocks") {
    for (Index n : {10, 11, 14, 103}) {
        const auto folds = make_folds(n, 5);
        REQUIRE(folds.size() == 5);
        Index next = 0;
        std::size_t lo = folds[0].size(), hi = lo;
        for (const auto& f : folds) {
            for (Index i : f) CHECK(i == next++);
            lo = std::min(lo, f.size());
            hi = std::max(hi, f.size());
        }
        CHECK(next == n);
        CHECK(hi - lo <= 1);
    }
    CHECK_THROWS_AS(make_folds(3, 5), InputError);
    CHECK_THROWS_AS(make_folds(10, 1), InputError);
}

TEST_CASE("default lambda grid") {
    const auto g = default_lambda_grid();
    REQUIRE(g.size() == 7);
    CHECK(g.front() == doctest::Approx(1e-3));
    CHECK(g.back() == doctest::Approx(1e3));
}

TEST_CASE("cross_validate_lambda: single-value grid") {
    std::mt19937_64 rng(73);
    const auto ids = sec::testing::covering_ids(20, 2, rng);
    const auto Y = LabelMatrix::from_class_ids(ids, 2, LabelEncoding::pm1);
    const auto r = cross_validate_lambda({sec::testing::random_matrix(2, 20, rng), "f"}, Y,
                                         sec::testing::random_matrix(3, 20, rng), KernelSpec::linear(), {0.7});
    CHECK(r.lambda == 0.7);
    CHECK(r.mean_accuracy.size() == 1);
}

TEST_CASE("cross_validate_lambda: picks the best held-out grid value, recomputed directly") {
    std::mt19937_64 rng(74);
    const Index n = 40, c = 2;
    const auto ids = sec::testing::covering_ids(n, c, rng);
    const auto Y = LabelMatrix::from_class_ids(ids, c, LabelEncoding::pm1);
    // View 2 carries the label plus noise; the baseline is noise.
    const Matrix X2 = Y.values() + sec::testing::random_matrix(c, n, rng, 0.8);
    const DecisionMatrix F{sec::testing::random_matrix(c, n, rng), "noise"};
    const auto grid = default_lambda_grid();
    const auto r = cross_validate_lambda(F, Y, X2, KernelSpec::linear(), grid);
    REQUIRE(r.mean_accuracy.size() == grid.size());

    const auto folds = make_folds(n, 5);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total = 0;
        for (const auto& held : folds) {
            std::vector<Index> train;
            for (Index i = 0; i < n; ++i)
                if (std::find(held.begin(), held.end(), i) == held.end()) train.push_back(i);
            const auto model = adapt_classifier({select_columns(F.values, train), "noise"}, Y.select_columns(train),
                                                select_columns(X2, train), KernelSpec::linear(), grid[g]);
            const auto pred = predict_adapted(model.model, {select_columns(F.values, held), "noise"},
                                              select_columns(X2, held));
            total += accuracy(harden_decisions(pred), Y.select_columns(held));
        }
        CHECK(r.mean_accuracy[g] == doctest::Approx(total / 5).epsilon(1e-12));
    }
    const auto best = std::max_element(r.mean_accuracy.begin(), r.mean_accuracy.end());
    CHECK(r.lambda == grid[static_cast<std::size_t>(best - r.mean_accuracy.begin())]);
    CHECK(*best > 0.7);
}

TEST_CASE("summarize uses the sample deviation") {
    const auto s = summarize({1.0, 2.0, 3.0, 4.0});
    CHECK(s.mean == 2.5);
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(summarize({3.0}).stddev == 0.0);
}
