// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "skillalign/errors.hpp"
#include "skillalign/judge.hpp"

using namespace skillalign;

// Expected values hand-computed from the contingency tables with exact
// arithmetic (fractions), then frozen here to 10 decimals.

namespace {

void check_report(const AgreementReport& r, double accuracy, double kappa, double wkappa, double alpha,
                  double icc) {
    const double tol = 1e-9;
    CHECK(r.accuracy == doctest::Approx(accuracy).epsilon(tol));
    REQUIRE(r.cohen_kappa.has_value());
    REQUIRE(r.weighted_kappa.has_value());
    REQUIRE(r.krippendorff_alpha.has_value());
    REQUIRE(r.icc.has_value());
    CHECK(*r.cohen_kappa == doctest::Approx(kappa).epsilon(tol));
    CHECK(*r.weighted_kappa == doctest::Approx(wkappa).epsilon(tol));
    CHECK(*r.krippendorff_alpha == doctest::Approx(alpha).epsilon(tol));
    CHECK(*r.icc == doctest::Approx(icc).epsilon(tol));
}

}  // namespace

TEST_CASE("agreement fixture: identical non-constant vectors score 1 everywhere") {
    std::vector<int> a{1, 2, 3, 4, 5, 1, 2, 3, 4, 5};
    check_report(agreement_statistics(a, a), 1.0, 1.0, 1.0, 1.0, 1.0);
}

TEST_CASE("agreement fixture: chance-level 2x2 table gives kappa 0") {
    // a=[1,1,2,2], b=[1,2,1,2]: observed agreement 0.5 equals chance 0.5
    check_report(agreement_statistics({1, 1, 2, 2}, {1, 2, 1, 2}), 0.5, 0.0, 0.0, 0.125, 0.0);
}

TEST_CASE("agreement fixture: realistic 20-item ordinal ratings") {
    std::vector<int> a{5, 4, 4, 3, 5, 2, 1, 3, 4, 5, 2, 3, 4, 1, 2, 5, 3, 4, 2, 1};
    std::vector<int> b{5, 4, 3, 3, 4, 2, 1, 2, 4, 5, 2, 3, 5, 1, 1, 5, 3, 4, 2, 2};
    check_report(agreement_statistics(a, b), 0.7, 0.6238244514, 0.9185888738, 0.9233703631,
                 0.9223433243);
}

TEST_CASE("agreement fixture: one disagreement in 20") {
    std::vector<int> a, b;
    for (int rep = 0; rep < 4; ++rep)
        for (int v = 1; v <= 5; ++v) {
            a.push_back(v);
            b.push_back(v);
        }
    b[7] = 4;  // a=3 there
    check_report(agreement_statistics(a, b), 0.95, 0.9375, 0.9876543210, 0.9878029711, 0.9882643607);
}

TEST_CASE("agreement fixture: systematic +1 bias") {
    std::vector<int> a, b;
    for (int rep = 0; rep < 5; ++rep)
        for (int v = 1; v <= 4; ++v) {
            a.push_back(v);
            b.push_back(v + 1);
        }
    // zero exact agreement; ordinal statistics stay high, unweighted kappa negative
    check_report(agreement_statistics(a, b), 0.0, -0.2307692308, 0.7142857143, 0.6990740741,
                 0.7246376812);
}

TEST_CASE("agreement fixture: mixed 12-item disagreements") {
    std::vector<int> a{1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 1, 5};
    std::vector<int> b{1, 2, 2, 3, 3, 4, 4, 5, 5, 4, 3, 5};
    check_report(agreement_statistics(a, b), 0.5, 0.3793103448, 0.8163265306, 0.8313681028,
                 0.8290155440);
}

TEST_CASE("agreement degenerate case: constant identical ratings") {
    AgreementReport r = agreement_statistics({3, 3, 3}, {3, 3, 3});
    CHECK(r.accuracy == 1.0);
    CHECK_FALSE(r.cohen_kappa.has_value());
    CHECK_FALSE(r.weighted_kappa.has_value());
    CHECK_FALSE(r.krippendorff_alpha.has_value());
    CHECK_FALSE(r.icc.has_value());
    CHECK(r.n_items == 3);
}

TEST_CASE("agreement statistics are symmetric under argument swap") {
    std::vector<int> a{5, 4, 4, 3, 5, 2, 1, 3, 4, 5, 2, 3, 4, 1, 2, 5, 3, 4, 2, 1};
    std::vector<int> b{5, 4, 3, 3, 4, 2, 1, 2, 4, 5, 2, 3, 5, 1, 1, 5, 3, 4, 2, 2};
    AgreementReport ab = agreement_statistics(a, b);
    AgreementReport ba = agreement_statistics(b, a);
    CHECK(ab.accuracy == ba.accuracy);
    CHECK(*ab.cohen_kappa == *ba.cohen_kappa);
    CHECK(*ab.weighted_kappa == *ba.weighted_kappa);
    CHECK(*ab.krippendorff_alpha == *ba.krippendorff_alpha);
}

TEST_CASE("agreement statistics stay within their ranges") {
    // a spread of adversarial vectors
    std::vector<std::pair<std::vector<int>, std::vector<int>>> cases = {
        {{1, 5, 1, 5}, {5, 1, 5, 1}},
        {{1, 1, 1, 5}, {5, 5, 5, 1}},
        {{1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}},
        {{2, 2, 2, 3}, {3, 3, 3, 2}},
    };
    for (const auto& [a, b] : cases) {
        AgreementReport r = agreement_statistics(a, b);
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
        if (r.cohen_kappa) {
            CHECK(*r.cohen_kappa >= -1.0 - 1e-12);
            CHECK(*r.cohen_kappa <= 1.0 + 1e-12);
        }
        if (r.weighted_kappa) CHECK(*r.weighted_kappa <= 1.0 + 1e-12);
        if (r.krippendorff_alpha) CHECK(*r.krippendorff_alpha <= 1.0 + 1e-12);
    }
}

TEST_CASE("agreement error contracts") {
    CHECK_THROWS_AS(agreement_statistics({1, 2}, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(agreement_statistics({1}, {1}), ValidationError);
    CHECK_THROWS_AS(agreement_statistics({1, 6}, {1, 2}), ValidationError);
    CHECK_THROWS_AS(agreement_statistics({0, 2}, {1, 2}), ValidationError);
}
