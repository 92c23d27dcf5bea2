#include "sec/evaluation.hpp"
#include "sec/integration.hpp"
#include "sec/security.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using namespace sec;

namespace {

LabelMatrix col(std::initializer_list<int> ids, Index c) {
    return LabelMatrix::from_class_ids(std::vector<int>(ids), c, LabelEncoding::zero_one);
}

}  // namespace

TEST_CASE("check_condition: anchor equal to the truth satisfies every baseline") {
    std::mt19937_64 rng(61);
    const auto truth = sec::testing::random_labels(3, 6, rng);
    std::vector<LabelMatrix> hat;
    for (int j = 0; j < 4; ++j) hat.push_back(sec::testing::random_labels(3, 6, rng));
    const auto Y = sec::testing::random_labels(3, 6, rng);
    CHECK(check_condition(hat, Y, truth, truth) == 4);
}

TEST_CASE("check_condition: Y equal to a baseline counts that baseline") {
    std::mt19937_64 rng(62);
    const auto truth = sec::testing::random_labels(2, 5, rng);
    const auto anchor = sec::testing::random_labels(2, 5, rng);
    const auto h0 = sec::testing::random_labels(2, 5, rng);
    CHECK(check_condition({h0}, h0, truth, anchor) == 1);
}

TEST_CASE("check_condition: direct arithmetic") {
    const auto truth = col({0}, 2), anchor = col({1}, 2), h = col({0}, 2), Y = col({1}, 2);
    CHECK(check_condition({h}, Y, truth, anchor) == 0);
}

TEST_CASE("check_condition: matches the trace formula") {
    std::mt19937_64 rng(63);
    for (int trial = 0; trial < 50; ++trial) {
        const Index c = 2 + trial % 2, t = 3 + trial % 6;
        const auto truth = sec::testing::random_labels(c, t, rng);
        const auto anchor = sec::testing::perturb_labels(truth, 0.3, rng);
        const auto Y = sec::testing::perturb_labels(truth, 0.3, rng);
        std::vector<LabelMatrix> hat;
        for (int j = 0; j < 3; ++j) hat.push_back(sec::testing::perturb_labels(truth, 0.4, rng));
        Index expected = 0;
        for (const auto& h : hat)
            expected += ((h.values() - Y.values()).transpose() * (truth.values() - anchor.values())).trace() <= 0.0;
        CHECK(check_condition(hat, Y, truth, anchor) == expected);
    }
}

TEST_CASE("check_condition: encoding mismatch is an input error") {
    const auto a = col({0, 1}, 2);
    CHECK_THROWS_AS(check_condition({a}, a.to(LabelEncoding::pm1), a, a), InputError);
    CHECK_THROWS_AS(check_condition({a}, a, a, col({0, 1, 1}, 2)), InputError);
}

TEST_CASE("security distances: accuracy identity and table-style values") {
    std::mt19937_64 rng(64);
    for (int trial = 0; trial < 50; ++trial) {
        const auto truth = sec::testing::random_labels(3, 10, rng);
        std::vector<LabelMatrix> hat;
        for (int j = 0; j < 3; ++j) hat.push_back(sec::testing::perturb_labels(truth, 0.5, rng));
        const auto Y = sec::testing::perturb_labels(truth, 0.3, rng);
        const auto d = security_distances(hat, Y, truth);
        CHECK(d.integrated_distance == (Y.values() - truth.values()).squaredNorm());
        CHECK(d.integrated_accuracy == doctest::Approx(1.0 - d.integrated_distance / 20.0).epsilon(1e-15));
        CHECK(d.integrated_accuracy == accuracy(Y, truth));
        double best = 1e300;
        for (const auto& h : hat) best = std::min(best, (h.values() - truth.values()).squaredNorm());
        CHECK(d.best_distance == best);
        CHECK(d.best_accuracy == doctest::Approx(1.0 - best / 20.0).epsilon(1e-15));
    }
    const auto truth = sec::testing::random_labels(2, 4, rng);
    const auto d = security_distances({truth}, truth, truth);
    CHECK(d.integrated_distance == 0.0);
    CHECK(d.integrated_accuracy == 1.0);
}

TEST_CASE("security report fields") {
    std::mt19937_64 rng(65);
    for (int trial = 0; trial < 50; ++trial) {
        const auto truth = sec::testing::random_labels(3, 8, rng);
        std::vector<LabelMatrix> hat, bar;
        for (int j = 0; j < 3; ++j) hat.push_back(sec::testing::perturb_labels(truth, 0.4, rng));
        for (int k = 0; k < 2; ++k) bar.push_back(sec::testing::perturb_labels(truth, 0.3, rng));
        const auto Y = integrate(hat, bar).Y_hard;
        const auto r = security_report(hat, bar, Y, truth);
        REQUIRE(r.condition_counts.size() == 2);
        CHECK(r.baselines == 3);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(r.condition_counts[k] == check_condition(hat, Y, truth, bar[k]));
            CHECK(r.condition_counts[k] >= 0);
            CHECK(r.condition_counts[k] <= 3);
        }
        CHECK(r.max_count == std::max(r.condition_counts[0], r.condition_counts[1]));
        CHECK(r.certified == (r.max_count == 3));
        CHECK(r.secure == (r.distances.integrated_distance <= r.distances.best_distance));
    }
}
