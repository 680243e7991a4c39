#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "selfnorm/distribution.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/normal.hpp"
#include "selfnorm/quadrature.hpp"
#include "selfnorm/rng.hpp"

namespace selfnorm {

enum class OracleMethod { BINOMIAL_SUM, T_INTEGRAL, CRUDE_MC };

inline const char* to_string(OracleMethod m) {
    switch (m) {
    case OracleMethod::BINOMIAL_SUM: return "BINOMIAL_SUM";
    case OracleMethod::T_INTEGRAL: return "T_INTEGRAL";
    case OracleMethod::CRUDE_MC: return "CRUDE_MC";
    }
    return "?";
}

struct ExactTail {
    double p = 0.0;
    OracleMethod method = OracleMethod::BINOMIAL_SUM;
    double abs_err = 0.0; ///< certified for deterministic methods, SE for MC
};

namespace detail {

/// Smallest k with 2k - n (>|>=) x sqrt(n); snaps near-integer thresholds so
/// lattice points hit by exact arithmetic are classified correctly.
inline long binomial_kmin(long n, double x, bool strict) {
    const double v = 0.5 * (static_cast<double>(n) + x * std::sqrt(static_cast<double>(n)));
    const double r = std::nearbyint(v);
    const bool on_lattice = std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v));
    if (on_lattice) return static_cast<long>(r) + (strict ? 1 : 0);
    return static_cast<long>(std::ceil(v));
}

} // namespace detail

/// Tail of the symmetric +-1 random walk: P(S_n >= x sqrt n) (or > with
/// `strict`) by log-gamma binomial summation with the largest term factored
/// out.  On the lattice the two variants differ by exactly one point mass.
inline ExactTail rademacher_tail(long n, double x, bool strict = false) {
    if (n <= 0 || n > 10'000'000)
        throw DomainError("rademacher_tail: n outside [1, 1e7]");
    if (!(x > 0.0)) throw DomainError("rademacher_tail: x must be > 0");
    const long kmin = detail::binomial_kmin(n, x, strict);
    if (kmin > n) return {0.0, OracleMethod::BINOMIAL_SUM, 0.0};
    const double ln2 = 0.69314718055994530941723212145818;
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    auto log_pmf = [&](long k) {
        return lgn - std::lgamma(static_cast<double>(k) + 1.0) -
               std::lgamma(static_cast<double>(n - k) + 1.0) -
               static_cast<double>(n) * ln2;
    };
    const double lead = log_pmf(kmin); // terms decrease for k > n/2
    if (lead < -690.0)
        throw UnderflowError("rademacher_tail: tail below representable range");
    // ratio recursion from the leading term; terms are positive and decreasing
    double term = 1.0;
    double sum = 0.0, comp = 0.0;
    for (long k = kmin;; ++k) {
        const double t = sum + term;
        comp += (sum >= term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        if (k == n) break;
        term *= static_cast<double>(n - k) / static_cast<double>(k + 1);
        // remaining tail <= term/(1-ratio); 1e-22 keeps it below 1e-15*p
        // even when the ratio is close to 1 near the mode
        if (term < 1e-22 * sum) break;
    }
    const double p = std::exp(lead) * (sum + comp);
    return {p, OracleMethod::BINOMIAL_SUM, 1e-14 * p};
}

/// Point mass P(S_n = 2k - n).
inline double rademacher_point_mass(long n, long k) {
    if (k < 0 || k > n) return 0.0;
    const double lp = std::lgamma(static_cast<double>(n) + 1.0) -
                      std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0) -
                      static_cast<double>(n) * 0.69314718055994530941723212145818;
    return std::exp(lp);
}

/// P(S_n / V_n > x) for an iid standard normal cohort, via the exact map to
/// a Student statistic with n-1 degrees of freedom and direct adaptive
/// quadrature of the normalized integrand (1 + u^2/(n-1))^{-n/2} with the
/// exact Gamma-ratio constant.  The integrand is factored at its left edge
/// so the result carries full relative precision even for tiny tails.
inline ExactTail gaussian_selfnorm_tail(long n, double x) {
    if (n < 2) throw DomainError("gaussian_selfnorm_tail: n must be >= 2");
    if (!(x >= 0.0)) throw DomainError("gaussian_selfnorm_tail: x must be >= 0");
    if (x * x >= static_cast<double>(n))
        throw DomainError("gaussian_selfnorm_tail: requires x^2 < n");
    if (x == 0.0) return {0.5, OracleMethod::T_INTEGRAL, 0.0};
    const double nd = static_cast<double>(n);
    const double m = nd - 1.0;
    const double y = x * std::sqrt(m) / std::sqrt(nd - x * x);
    const double logC = std::lgamma(0.5 * nd) - std::lgamma(0.5 * m) -
                        0.5 * std::log(m * 3.1415926535897932384626433832795);
    auto logf = [&](double u) { return -0.5 * nd * std::log1p(u * u / m); };
    const double scale = logf(y);
    // near piece [y, H] with the integrand rescaled to 1 at its left edge
    const double decay = nd * y / (m + y * y); // local exponential decay rate
    const double H = y + std::max(2.0 * y, 60.0 / std::max(decay, 1e-9) + 10.0);
    auto g_near = [&](double u) { return std::exp(logf(u) - scale); };
    const double hint = std::clamp(1.0 / std::max(decay, 1e-9), 1e-6, 1e6);
    QuadratureResult q1 = integrate(g_near, y, H, 1e-13 * hint, 20000);
    // far piece via u = 1/v:  int_H^inf f(u) du
    //   = m^{n/2} int_0^{1/H} v^{n-2} (1 + m v^2)^{-n/2} dv,  smooth for n >= 2
    auto g_far = [&](double v) {
        return std::exp(0.5 * nd * std::log(m) + (nd - 2.0) * std::log(v) -
                        0.5 * nd * std::log1p(m * v * v) - scale);
    };
    QuadratureResult q2 = integrate(g_far, 0.0, 1.0 / H, 1e-13 * hint, 20000);
    const double amp = std::exp(logC + scale);
    const double p = amp * (q1.value + q2.value);
    const double err = amp * (q1.abs_error + q2.abs_error) + 1e-14 * p;
    return {p, OracleMethod::T_INTEGRAL, err};
}

/// Student tail with 1 degree of freedom, closed form (cross-check helper).
inline double cauchy_tail(double y) {
    return 0.5 - std::atan(y) / 3.1415926535897932384626433832795;
}

/// Cumulants through order five and the first three coefficients of the
/// classical moderate-deviation power series.
struct CramerSeries {
    double g2 = 0.0, g3 = 0.0, g4 = 0.0, g5 = 0.0;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
};

inline CramerSeries cramer_series(const DistributionSpec& dist) {
    const double u1 = 0.0; // laws are centered by construction
    const double u2 = dist.raw_moment(2);
    const double u3 = dist.raw_moment(3);
    const double u4 = dist.raw_moment(4);
    const double u5 = dist.raw_moment(5);
    CramerSeries cs;
    cs.g2 = u2 - u1 * u1;
    cs.g3 = u3 - 3.0 * u2 * u1 + 2.0 * u1 * u1 * u1;
    cs.g4 = u4 - 4.0 * u3 * u1 - 3.0 * u2 * u2 + 12.0 * u2 * u1 * u1 -
            6.0 * std::pow(u1, 4);
    cs.g5 = u5 - 5.0 * u4 * u1 - 10.0 * u3 * u2 + 20.0 * u3 * u1 * u1 +
            30.0 * u2 * u2 * u1 - 60.0 * u2 * std::pow(u1, 3) +
            24.0 * std::pow(u1, 5);
    cs.a0 = cs.g3 / (6.0 * std::pow(cs.g2, 1.5));
    cs.a1 = (cs.g4 * cs.g2 - 3.0 * cs.g3 * cs.g3) / (24.0 * std::pow(cs.g2, 3));
    cs.a2 = (cs.g5 * cs.g2 * cs.g2 - 10.0 * cs.g4 * cs.g3 * cs.g2 +
             15.0 * std::pow(cs.g3, 3)) /
            (120.0 * std::pow(cs.g2, 4.5));
    return cs;
}

/// Three-term series tail ratio exp{(x^3/sqrt n)(a0 + a1 t + a2 t^2)},
/// t = x/sqrt n, for the normalized iid sum of `dist`.
inline double cramer_ratio(const DistributionSpec& dist, long n, double x) {
    // a0, a1, a2 are scale-invariant, so no explicit standardization step
    CramerSeries cs = cramer_series(dist);
    const double t = x / std::sqrt(static_cast<double>(n));
    return std::exp(x * x * x / std::sqrt(static_cast<double>(n)) *
                    (cs.a0 + cs.a1 * t + cs.a2 * t * t));
}

/// Plain Monte Carlo of P(S_n >= x V_n): block-seeded, order-independent
/// merge of sums, reproducible under a fixed seed.
inline ExactTail crude_mc_tail(const CohortSpec& cohort, double x, long samples,
                               std::uint64_t seed, int blocks = 64) {
    if (samples < 1) throw DomainError("crude_mc_tail: samples must be >= 1");
    blocks = static_cast<int>(std::min<long>(blocks, samples));
    long done = 0;
    double hits = 0.0;
    for (int blk = 0; blk < blocks; ++blk) {
        const long quota = samples / blocks + (blk < samples % blocks ? 1 : 0);
        CounterRng rng(seed, 0x517cc1b727220a95ull + static_cast<std::uint64_t>(blk));
        for (long i = 0; i < quota; ++i) {
            double s = 0.0, v2 = 0.0;
            for (const auto& g : cohort.groups()) {
                for (long j = 0; j < g.count; ++j) {
                    const double xi = g.spec.sample(rng);
                    s += xi;
                    v2 += xi * xi;
                }
            }
            // snap lattice boundary ties the same way the exact oracles do
            const double t = x * std::sqrt(v2);
            if (s >= t - 1e-9 * std::max(1.0, std::abs(t))) hits += 1.0;
        }
        done += quota;
    }
    const double p = hits / static_cast<double>(done);
    const double se = std::sqrt(std::max(p * (1.0 - p), 0.0) /
                                static_cast<double>(done));
    return {p, OracleMethod::CRUDE_MC, se};
}

} // namespace selfnorm
