#include <doctest.h>

#include <cmath>

#include "selfnorm/oracles.hpp"
#include "selfnorm/verify.hpp"

using namespace selfnorm;

TEST_CASE("binomial tail: enumeration cases") {
    // 1/16 and 5/16 up to log-gamma rounding
    CHECK(rademacher_tail(4, 2.0).p == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(rademacher_tail(4, 0.9).p == doctest::Approx(0.3125).epsilon(1e-14));
    CHECK(rademacher_tail(4, 2.0, true).p == 0.0); // strict drops the atom at 4
    CHECK(rademacher_tail(4, 2.1).p == 0.0);       // empty event, exact zero
}

TEST_CASE("binomial tail: strict vs non-strict differ by one point mass") {
    for (long n : {16L, 36L, 100L}) {
        const double x = 1.0; // threshold sqrt(n) is on the lattice for square n
        const double ge = rademacher_tail(n, x).p;
        const double gt = rademacher_tail(n, x, true).p;
        const long k = (n + static_cast<long>(x * std::sqrt(double(n)))) / 2;
        CHECK(ge - gt == doctest::Approx(rademacher_point_mass(n, k)).epsilon(1e-12));
    }
}

TEST_CASE("binomial tail: log-sum summation vs exact rational enumeration") {
    for (const auto& c : verify_oracles()) {
        INFO(c.name, " ", c.detail);
        CHECK(c.pass);
    }
}

TEST_CASE("binomial tail: large-n cross-checks") {
    // additivity: P(>= s) = P(= s) + P(>= s + 2) on the even lattice
    const long n = 4096;
    const double x = 8.0; // threshold 512, on-lattice
    const double ge = rademacher_tail(n, x).p;
    CHECK(ge == doctest::Approx(6.4983955780507214e-16).epsilon(1e-12)); // frozen
    const double next = rademacher_tail(n, (512.0 + 2.0) / 64.0).p;
    CHECK(ge == doctest::Approx(next + rademacher_point_mass(n, (4096 + 512) / 2))
                    .epsilon(1e-13));
    CHECK_THROWS_AS(rademacher_tail(10000, 40.0), UnderflowError);
    CHECK_THROWS_AS(rademacher_tail(0, 1.0), DomainError);
    CHECK_THROWS_AS(rademacher_tail(100, -1.0), DomainError);
}

TEST_CASE("student-statistic integral oracle") {
    CHECK(gaussian_selfnorm_tail(100, 0.0).p == 0.5);

    // n = 2 reduces to the Cauchy closed form
    for (double x : {0.2, 0.7, 1.1, 1.35}) {
        const double y = x / std::sqrt(2.0 - x * x);
        CHECK(gaussian_selfnorm_tail(2, x).p ==
              doctest::Approx(cauchy_tail(y)).epsilon(1e-11));
    }

    // frozen 1e8-sample crude Monte Carlo pin (seed 20260808, 256 blocks):
    // p_mc = 0.02247386, se = 1.482e-05; the integral must sit within 3 se
    auto t = gaussian_selfnorm_tail(100, 2.0);
    CHECK(std::abs(t.p - 0.02247386) <= 3.0 * 1.482e-05);
    CHECK(t.p == doctest::Approx(0.0224673626063).epsilon(1e-9));
    CHECK(t.abs_err <= 1e-12);

    CHECK_THROWS_AS(gaussian_selfnorm_tail(100, 10.0), DomainError);
    CHECK_THROWS_AS(gaussian_selfnorm_tail(1, 0.5), DomainError);
    CHECK_THROWS_AS(gaussian_selfnorm_tail(100, -0.5), DomainError);
}

TEST_CASE("cumulant series") {
    auto rad = cramer_series(DistributionSpec::rademacher());
    CHECK(rad.g2 == 1.0);
    CHECK(rad.g3 == 0.0);
    CHECK(rad.g4 == -2.0);
    CHECK(rad.g5 == 0.0);
    CHECK(rad.a0 == 0.0);
    CHECK(rad.a1 == doctest::Approx(-1.0 / 12.0).epsilon(1e-15));
    CHECK(rad.a2 == 0.0);

    auto nrm = cramer_series(DistributionSpec::normal(1.0));
    CHECK(nrm.g3 == 0.0);
    CHECK(nrm.g4 == 0.0);
    CHECK(nrm.g5 == 0.0);
    CHECK(nrm.a0 == 0.0);
    CHECK(nrm.a1 == 0.0);
    CHECK(nrm.a2 == 0.0);

    auto tp = cramer_series(DistributionSpec::two_point(0.5, -1.0, 1.0));
    CHECK(tp.a0 == rad.a0);
    CHECK(tp.a1 == doctest::Approx(rad.a1).epsilon(1e-15));
    CHECK(tp.a2 == rad.a2);

    // defining identities hold by recomputation from raw moments
    auto sk = DistributionSpec::two_point(0.9, -1.0 / 3.0, 3.0);
    auto cs = cramer_series(sk);
    const double u2 = sk.raw_moment(2), u3 = sk.raw_moment(3), u4 = sk.raw_moment(4),
                 u5 = sk.raw_moment(5);
    CHECK(cs.g2 == doctest::Approx(u2).epsilon(1e-15));
    CHECK(cs.g3 == doctest::Approx(u3).epsilon(1e-15));
    CHECK(cs.g4 == doctest::Approx(u4 - 3.0 * u2 * u2).epsilon(1e-15));
    CHECK(cs.g5 == doctest::Approx(u5 - 10.0 * u3 * u2).epsilon(1e-15));
    CHECK(cs.a0 == doctest::Approx(cs.g3 / (6.0 * std::pow(cs.g2, 1.5))).epsilon(1e-15));
}

TEST_CASE("series tail ratio") {
    for (long n : {100L, 4096L})
        for (double x : {1.5, 3.0})
            CHECK(cramer_ratio(DistributionSpec::rademacher(), n, x) ==
                  doctest::Approx(std::exp(-std::pow(x, 4) / (12.0 * n)))
                      .epsilon(1e-14));

    // zero-excess-kurtosis four-point mixture: ratio 1 through the a2 term.
    // atoms +-1 (1998 copies each) and +-c (2 copies each); c solved so that
    // EX^4 = 3 (EX^2)^2 exactly.
    const double q = 4.0 / 4000.0;
    auto kurt = [&](double c) {
        const double m2 = (1.0 - q) + q * c * c;
        const double m4 = (1.0 - q) + q * std::pow(c, 4);
        return m4 - 3.0 * m2 * m2;
    };
    double lo = 4.0, hi = 12.0;
    REQUIRE(kurt(lo) < 0.0);
    REQUIRE(kurt(hi) > 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kurt(mid) < 0.0 ? lo : hi) = mid;
    }
    const double c = 0.5 * (lo + hi);
    std::vector<double> data;
    for (int i = 0; i < 1998; ++i) {
        data.push_back(1.0);
        data.push_back(-1.0);
    }
    data.push_back(c);
    data.push_back(c);
    data.push_back(-c);
    data.push_back(-c);
    auto four = DistributionSpec::empirical(std::move(data));
    auto cs = cramer_series(four);
    CHECK(std::abs(cs.g3) < 1e-14);
    CHECK(std::abs(cs.g4) < 1e-9);
    CHECK(std::abs(cs.g5) < 1e-12);
    CHECK(cramer_ratio(four, 1000, 4.0) == doctest::Approx(1.0).epsilon(1e-9));

    // skewed law: leading factor exp(a0 x^3 / sqrt n), coefficients rebuilt
    // from raw moments by independent arithmetic
    auto sk = DistributionSpec::two_point(0.9, -1.0 / 3.0, 3.0);
    const double g3 = sk.raw_moment(3);
    const double g4 = sk.raw_moment(4) - 3.0;
    const double g5 = sk.raw_moment(5) - 10.0 * sk.raw_moment(3);
    const double a0 = g3 / 6.0;
    const double a1 = (g4 - 3.0 * g3 * g3) / 24.0;
    const double a2 = (g5 - 10.0 * g4 * g3 + 15.0 * std::pow(g3, 3)) / 120.0;
    const long n = 10000;
    const double x = 2.0;
    const double t = x / std::sqrt(static_cast<double>(n));
    CHECK(cramer_ratio(sk, n, x) ==
          doctest::Approx(std::exp(x * x * x / std::sqrt(static_cast<double>(n)) *
                                   (a0 + a1 * t + a2 * t * t)))
              .epsilon(1e-13));
}

TEST_CASE("crude Monte Carlo") {
    auto rad = CohortSpec::iid(DistributionSpec::rademacher(), 16);
    // almost-sure event
    CHECK(crude_mc_tail(rad, -5.0, 2000, 1).p == 1.0);
    CHECK_THROWS_AS(crude_mc_tail(rad, 1.0, 0, 1), DomainError);

    auto mc = crude_mc_tail(rad, 1.0, 1000000, 314159);
    const double want = rademacher_tail(16, 1.0).p;
    CHECK(std::abs(mc.p - want) <= 4.0 * mc.abs_err);

    auto nrm = CohortSpec::iid(DistributionSpec::normal(1.0), 50);
    auto nmc = crude_mc_tail(nrm, 1.5, 200000, 2718);
    const double nwant = gaussian_selfnorm_tail(50, 1.5).p;
    CHECK(std::abs(nmc.p - nwant) <= 4.0 * nmc.abs_err);

    // reproducibility: same seed, same estimate; different seed, same law
    auto again = crude_mc_tail(nrm, 1.5, 200000, 2718);
    CHECK(again.p == nmc.p);
}
