#include <doctest.h>

#include <cmath>

#include "selfnorm/quadrature.hpp"

using namespace selfnorm;

TEST_CASE("gauss integral to tight tolerance") {
    auto q = integrate([](double t) { return std::exp(-t * t); }, -8.0, 8.0, 1e-12);
    CHECK(std::abs(q.value - std::sqrt(3.141592653589793)) < 1e-12);
    CHECK(q.abs_error < 1e-11);
}

TEST_CASE("odd integrand cancels") {
    auto q = integrate([](double t) { return t * t * t; }, -2.0, 2.0, 1e-12);
    CHECK(std::abs(q.value) < 1e-13);
}

TEST_CASE("forced cuts keep indicator discontinuities off panels") {
    auto f = [](double t) { return t <= 0.3 ? 1.0 : 0.0; };
    double cut = 0.3;
    auto q = integrate_cuts(f, 0.0, 1.0, std::span<const double>(&cut, 1), 1e-12);
    CHECK(std::abs(q.value - 0.3) < 1e-12);
}

TEST_CASE("panel budget exhaustion raises QuadratureFailure") {
    // noisy integrand that never converges under bisection
    auto f = [](double t) { return std::sin(1.0 / (t * t + 1e-12)); };
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-14, 8), QuadratureFailure);
}

TEST_CASE("narrow spike found via cuts") {
    auto f = [](double t) { return std::exp(-1e6 * (t - 0.7) * (t - 0.7)); };
    double cut = 0.7;
    auto q = integrate_cuts(f, 0.0, 1.0, std::span<const double>(&cut, 1), 1e-13);
    CHECK(std::abs(q.value - std::sqrt(3.141592653589793) * 1e-3) < 1e-12);
}
