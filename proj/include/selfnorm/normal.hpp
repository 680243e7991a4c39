#pragma once

#include <cmath>

namespace selfnorm {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;
inline constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

/// Standard normal density.
inline double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Scaled complementary error function e^{z^2} erfc(z) for z >= 0.
/// Below z = 6 the direct product is fine; above, the Abramowitz & Stegun
/// 7.1.23 asymptotic series converges past double precision.
inline double erfcx(double z) {
    if (z < 5.9) return std::exp(z * z) * std::erfc(z);
    const double inv2z2 = 1.0 / (2.0 * z * z);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 40; ++k) {
        term *= -(2.0 * k - 1.0) * inv2z2;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum / (z * 1.7724538509055160272981674833411);
}

/// Upper normal tail 1 - Phi(x).  Above x = 8 the scaled form
/// erfcx(z) e^{-z^2} is used with the rounding residual of z^2 = x^2/2
/// recovered by fma, which keeps the relative error at the few-ulp level
/// all the way to the underflow boundary.
inline double normal_tail(double x) {
    if (x < 8.5) return 0.5 * std::erfc(x / kSqrt2);
    const double z2 = 0.5 * (x * x);
    const double z2lo = 0.5 * std::fma(x, x, -(x * x));
    return 0.5 * erfcx(x / kSqrt2) * std::exp(-z2) * std::exp(-z2lo);
}

/// log(1 - Phi(x)), stable over the whole double range of x.
inline double log_normal_tail(double x) {
    if (x < 8.5) return std::log(normal_tail(x));
    return -0.5 * (x * x) - 0.5 * std::fma(x, x, -(x * x)) +
           std::log(0.5 * erfcx(x / kSqrt2));
}

/// Mills-form tail: (1 - Phi(x)) * sqrt(2*pi) * x * e^{x^2/2}, -> 1 as x -> inf.
inline double mills_ratio(double x) {
    if (x <= 0.0) return normal_tail(x) * kSqrt2Pi * x * std::exp(0.5 * x * x);
    // = x * sqrt(pi/2) * erfcx(x/sqrt(2)); avoids overflow at large x.
    return x * 1.2533141373155002512078826424055 * erfcx(x / kSqrt2);
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

} // namespace selfnorm
