#include <doctest.h>

#include <cmath>

#include "selfnorm/delta.hpp"
#include "selfnorm/verify.hpp"

using namespace selfnorm;

TEST_CASE("per-member functional, closed-form cases") {
    auto rad = DistributionSpec::rademacher().moments(0.5);
    auto dv = delta_i(rad, DeltaCoefficients::main(1.0));
    // -(1/12) * 0.5^4 * 1 + 1 * 0.5^5 * 1
    CHECK(dv.value == doctest::Approx(0.026041666666666668).epsilon(1e-15));
    CHECK(std::abs(dv.value) <= dv.bound);

    CHECK(delta_i(rad, DeltaCoefficients{0, 0, 0}).value == 0.0);

    auto nrm = DistributionSpec::normal(1.0).moments(0.1);
    auto dn = delta_i(nrm, DeltaCoefficients::main(1.0));
    // frozen against the Simpson oracle
    CHECK(dn.value == doctest::Approx(3.88307648642293e-05).epsilon(1e-11));
    CHECK(std::abs(dn.value) <= dn.bound);
}

TEST_CASE("cohort sum") {
    auto cm = cohort_moments(CohortSpec::iid(DistributionSpec::rademacher(), 100), 2.0);
    auto dv = delta_n(cm, DeltaCoefficients::main(1.0));
    CHECK(dv.b == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(dv.value == doctest::Approx(0.018666666666666668).epsilon(1e-13));

    // n identical members is n times one member
    auto one = delta_i(DistributionSpec::rademacher().moments(0.2),
                       DeltaCoefficients::main(1.0));
    CHECK(dv.value == doctest::Approx(100.0 * one.value).epsilon(1e-13));
    CHECK(dv.bound == doctest::Approx(100.0 * one.bound).epsilon(1e-13));

    // expanded per-member form agrees with the grouped one
    auto flat = cohort_moments_expanded(
        CohortSpec::iid(DistributionSpec::rademacher(), 100), 2.0);
    auto dvf = delta_n(std::span<const TruncatedMomentSet>(flat), DeltaCoefficients::main(1.0));
    CHECK(dvf.value == doctest::Approx(dv.value).epsilon(1e-14));
}

TEST_CASE("fourth-moment leading coefficient for the gaussian cohort") {
    // sum over n members of -(1/12) b^4 EX^4 I is -(1/12) x^4 (3/n) up to the
    // truncation deficit, which is astronomically small at b = 0.1
    auto cm = cohort_moments(CohortSpec::iid(DistributionSpec::normal(1.0), 10000), 10.0);
    auto dv = delta_n(cm, DeltaCoefficients::main(1.0));
    const double lead = -std::pow(10.0, 4) * 3.0 / (12.0 * 10000.0);
    CHECK(std::abs((dv.value - dv.gamma_slack) - lead) < 1e-9);
    CHECK(std::abs(dv.value - lead) <= dv.gamma_slack + 1e-9);
}

TEST_CASE("mixed scales are rejected") {
    std::vector<TruncatedMomentSet> tms = {
        DistributionSpec::rademacher().moments(0.2),
        DistributionSpec::rademacher().moments(0.3)};
    CHECK_THROWS_AS(delta_n(std::span<const TruncatedMomentSet>(tms),
                            DeltaCoefficients::main(0.0)),
                    MixedScale);
}

TEST_CASE("linearity, bound soundness, symmetry suite") {
    for (const auto& c : verify_delta()) {
        INFO(c.name, " ", c.detail);
        CHECK(c.pass);
    }
}

TEST_CASE("preset coefficient triples") {
    CHECK(DeltaCoefficients::main().alpha == doctest::Approx(-1.0 / 3.0));
    CHECK(DeltaCoefficients::main().beta == doctest::Approx(-1.0 / 12.0));
    CHECK(DeltaCoefficients::xi1().alpha == -1.0);
    CHECK(DeltaCoefficients::xi1().beta == doctest::Approx(-2.0 / 3.0));
    CHECK(DeltaCoefficients::xi2().beta == -3.0);
    CHECK(DeltaCoefficients::overshoot(0.0, 0.0).alpha == doctest::Approx(27.0 / 48.0));
    CHECK(DeltaCoefficients::mid_band().alpha == doctest::Approx(1.0 / 18.0));
    CHECK(DeltaCoefficients::mid_band().beta == doctest::Approx(-5.0 / 648.0));
    CHECK(DeltaCoefficients::low_band().alpha == doctest::Approx(-11.0 / 6.0));
    CHECK(DeltaCoefficients::low_band().beta == doctest::Approx(25.0 / 24.0));
}
