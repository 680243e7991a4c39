#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "selfnorm/delta.hpp"
#include "selfnorm/distribution.hpp"
#include "selfnorm/normal.hpp"
#include "selfnorm/oracles.hpp"
#include "selfnorm/quadrature.hpp"
#include "selfnorm/rng.hpp"
#include "selfnorm/tail.hpp"

namespace selfnorm {

/// xi(s) = 2 b s - (b s)^2 = 1 - (b s - 1)^2 <= 1 for every real s.
struct XiTransform {
    double b = 0.0;
    DistributionSpec underlying;
    double operator()(double s) const {
        const double u = b * s;
        return 2.0 * u - u * u;
    }
};

/// E xi^k e^{xi/2} for k = 0, 1, 2 plus E |xi|^3 e^{xi/2}.  Atom laws sum
/// exactly; continuous laws go through the adaptive engine with panels split
/// where xi changes sign (the weight e^{xi/2} <= sqrt(e) keeps everything
/// bounded).
struct XiMoments {
    double e0 = 0.0, e1 = 0.0, e2 = 0.0, abs3 = 0.0;
};

inline XiMoments xi_exp_moments(const DistributionSpec& spec, double b) {
    if (!(b > 0.0)) throw DomainError("xi_exp_moments: b must be > 0");
    auto xi = [b](double s) {
        const double u = b * s;
        return 2.0 * u - u * u;
    };
    XiMoments out;
    if (spec.is_discrete()) {
        for (const auto& [s, w] : spec.atoms()) {
            const double z = xi(s);
            const double e = w * std::exp(0.5 * z);
            out.e0 += e;
            out.e1 += e * z;
            out.e2 += e * z * z;
            out.abs3 += e * std::abs(z * z * z);
        }
        return out;
    }
    const std::vector<double> cuts{-1.0 / b, 0.0, 1.0 / b, 2.0 / b};
    out.e0 = spec.expect([&](double s) { return std::exp(0.5 * xi(s)); }, cuts);
    out.e1 = spec.expect(
        [&](double s) { const double z = xi(s); return z * std::exp(0.5 * z); }, cuts);
    out.e2 = spec.expect(
        [&](double s) { const double z = xi(s); return z * z * std::exp(0.5 * z); },
        cuts);
    out.abs3 = spec.expect(
        [&](double s) {
            const double z = xi(s);
            return std::abs(z * z * z) * std::exp(0.5 * z);
        },
        cuts);
    return out;
}

/// The law of eta = xi(X') where X' is the e^{xi/2}-reweighted base law.
/// Discrete bases are reweighted atom by atom; continuous bases use
/// rejection with acceptance probability e^{(xi-1)/2} <= 1.
class TiltedLaw {
public:
    static TiltedLaw make(DistributionSpec spec, double b) {
        TiltedLaw law;
        law.xform_ = XiTransform{b, std::move(spec)};
        law.normalizer_ = xi_exp_moments(law.xform_.underlying, b).e0;
        if (!(law.normalizer_ > 0.0 &&
              law.normalizer_ <= 1.6487212707001282 * (1.0 + 1e-12)))
            throw DomainError("TiltedLaw: normalizer outside (0, sqrt(e)]");
        if (law.xform_.underlying.is_discrete()) {
            double c = 0.0;
            for (const auto& [s, w] : law.xform_.underlying.atoms()) {
                const double eta = law.xform_(s);
                c += w * std::exp(0.5 * eta) / law.normalizer_;
                law.cum_.push_back(c);
                law.eta_.push_back(eta);
            }
            law.cum_.back() = 1.0; // close the table against rounding
        }
        return law;
    }

    double b() const { return xform_.b; }
    double normalizer() const { return normalizer_; }
    const DistributionSpec& base() const { return xform_.underlying; }

    /// Tilted point masses (eta value, probability); discrete bases only.
    std::vector<std::pair<double, double>> atoms() const {
        if (cum_.empty()) throw DomainError("TiltedLaw::atoms: continuous base");
        std::vector<std::pair<double, double>> out;
        double prev = 0.0;
        for (std::size_t i = 0; i < cum_.size(); ++i) {
            out.emplace_back(eta_[i], cum_[i] - prev);
            prev = cum_[i];
        }
        return out;
    }

    double sample(CounterRng& rng) const {
        if (!cum_.empty()) {
            const double u = rng.uniform();
            const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
            const std::size_t i =
                std::min(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
            return eta_[i];
        }
        for (;;) {
            const double s = xform_.underlying.sample(rng);
            const double z = xform_(s);
            if (rng.uniform() <= std::exp(0.5 * (z - 1.0))) return z;
        }
    }

private:
    XiTransform xform_{0.0, DistributionSpec::rademacher()};
    double normalizer_ = 1.0;
    std::vector<double> cum_, eta_;
};

/// Aggregate tilted-moment statistics of a cohort at b = x / B_n.
struct TiltStats {
    double m_n = 0.0;        ///< sum of tilted means
    double sigma_n2 = 0.0;   ///< sum of tilted variances
    double v_n = 0.0;        ///< sum of tilted absolute third moments
    double log_prod_norm = 0.0; ///< sum of log E e^{xi_i/2}
};

inline TiltStats tilt_stats(const CohortSpec& cohort, double x) {
    if (!(x > 0.0)) throw DomainError("tilt_stats: x must be > 0");
    const double b = x / cohort.bn();
    TiltStats st;
    for (const auto& g : cohort.groups()) {
        const XiMoments xm = xi_exp_moments(g.spec, b);
        const double cnt = static_cast<double>(g.count);
        const double mean = xm.e1 / xm.e0;
        st.m_n += cnt * mean;
        st.sigma_n2 += cnt * (xm.e2 / xm.e0 - mean * mean);
        st.v_n += cnt * xm.abs3 / xm.e0;
        st.log_prod_norm += cnt * std::log(xm.e0);
    }
    if (!(st.sigma_n2 > 0.0)) throw DegenerateDistribution("tilt_stats: sigma_n^2 = 0");
    return st;
}

inline double sample_tilted(const TiltedLaw& law, CounterRng& rng) {
    return law.sample(rng);
}

enum class TiltTarget { QUADRATIC_EVENT, SELF_NORM_LOWER_BOUND };

struct TiltedEstimate {
    double p_hat = 0.0;
    double se = 0.0; ///< NaN when samples == 1 (flagged undefined)
    long samples = 0;
    TiltStats stats;
    TiltTarget target = TiltTarget::QUADRATIC_EVENT;
    double analytic_surrogate = 0.0; ///< Gaussian-surrogate value of the same event
    double rn_certificate = 0.0;     ///< Berry-Esseen certificate band around it
};

namespace detail {

/// log of int_{t0}^inf e^{-t s / 2} dPhi(t), evaluated by factored adaptive
/// quadrature (the closed form e^{s^2/8} (1-Phi)(t0 + s/2) is kept in tests
/// as the second route).
inline double log_gaussian_tilted_tail(double t0, double s) {
    auto logq = [&](double t) { return -0.5 * t * s - 0.5 * t * t; };
    const double tstar = std::max(t0, -0.5 * s);
    const double scale = logq(tstar);
    auto g = [&](double t) { return std::exp(logq(t) - scale); };
    // decay rate beyond the peak is s/2 + t*; size the window to it so the
    // boundary layer is resolved even for very large s
    const double rate = std::max(1.0, 0.5 * s + tstar);
    const double hi = tstar + 50.0 / rate;
    QuadratureResult q = integrate(g, t0, hi, 1e-14 * (hi - t0), 20000);
    if (!(q.value > 0.0)) return -std::numeric_limits<double>::infinity();
    return scale + std::log(q.value * kInvSqrt2Pi);
}

} // namespace detail

/// Importance-sampling estimate of P(2 b S_n - b^2 V_n^2 >= x^2) by the
/// exponential change of measure: draws eta_i from the tilted laws and
/// averages e^{-sum eta / 2} over {sum eta >= x^2}, scaled by prod E e^{xi/2}.
/// Unbiased; block-seeded and order-independent.
inline TiltedEstimate conjugate_estimate(const CohortSpec& cohort, double x,
                                         long samples, std::uint64_t seed,
                                         int blocks = 64,
                                         TiltTarget target = TiltTarget::QUADRATIC_EVENT) {
    if (samples < 1) throw DomainError("conjugate_estimate: samples must be >= 1");
    const double b = x / cohort.bn();
    TiltedEstimate est;
    est.target = target;
    est.samples = samples;
    est.stats = tilt_stats(cohort, x);

    std::vector<std::pair<TiltedLaw, long>> laws;
    for (const auto& g : cohort.groups())
        laws.emplace_back(TiltedLaw::make(g.spec, b), g.count);

    const double x2 = x * x;
    const double log_scale = est.stats.log_prod_norm - 0.5 * x2;
    // boundary snap: atoms of sum(eta) that equal x^2 exactly on the lattice
    // reach us with order-dependent rounding, so classify within 1e-9 as in
    const double thr = x2 - 1e-9 * std::max(1.0, x2);
    blocks = static_cast<int>(std::min<long>(blocks, samples));
    double sw = 0.0, sw2 = 0.0;
    long done = 0;
    for (int blk = 0; blk < blocks; ++blk) {
        const long quota = samples / blocks + (blk < samples % blocks ? 1 : 0);
        CounterRng rng(seed, 0x2545f4914f6cdd1dull + static_cast<std::uint64_t>(blk));
        for (long i = 0; i < quota; ++i) {
            double t = 0.0;
            for (const auto& [law, cnt] : laws)
                for (long j = 0; j < cnt; ++j) t += law.sample(rng);
            if (t >= thr) {
                const double w = std::exp(std::min(0.5 * (x2 - t), 0.0)); // in [0, 1]
                sw += w;
                sw2 += w * w;
            }
        }
        done += quota;
    }
    const double nn = static_cast<double>(done);
    const double mean = sw / nn;
    est.p_hat = std::exp(log_scale) * mean;
    if (done > 1) {
        const double var = std::max(sw2 / nn - mean * mean, 0.0);
        est.se = std::exp(log_scale) * std::sqrt(var / (nn - 1.0));
    } else {
        est.se = std::numeric_limits<double>::quiet_NaN();
    }

    const double sigma = std::sqrt(est.stats.sigma_n2);
    const double t0 = (x2 - est.stats.m_n) / sigma;
    est.analytic_surrogate = std::exp(est.stats.log_prod_norm - 0.5 * est.stats.m_n +
                                      detail::log_gaussian_tilted_tail(t0, sigma));
    est.rn_certificate = std::exp(log_scale) * 16.0 * est.stats.v_n /
                         (sigma * sigma * sigma);
    return est;
}

/// Same estimator tagged as the certified lower bound of P(S_n >= x V_n)
/// (the quadratic event is contained in the self-normalized one).
inline TiltedEstimate lower_bound_tail(const CohortSpec& cohort, double x,
                                       long samples, std::uint64_t seed,
                                       int blocks = 64) {
    return conjugate_estimate(cohort, x, samples, seed, blocks,
                              TiltTarget::SELF_NORM_LOWER_BOUND);
}

// -------------------------------------------------------------------------
// Explicit expansion checks
// -------------------------------------------------------------------------

struct Lemma1Report {
    double lhs = 0.0;       ///< E e^{lambda b X - theta (bX)^2}, exact
    double main = 0.0;      ///< 1 + (lambda^2/2 - theta) b^2 EX^2 + delta(alpha, beta; 0)
    double remainder = 0.0; ///< lhs - main
    double bound = 0.0;     ///< max(O1, O2) (b^3 a3gt + b^5 a5le)
    double o1 = 0.0, o2 = 0.0;
    double alpha = 0.0, beta = 0.0;
    bool within = false;
};

inline double lemma1_lhs(const DistributionSpec& spec, double b, double lambda,
                         double theta) {
    auto f = [&](double s) {
        const double u = b * s;
        return std::exp(lambda * u - theta * u * u);
    };
    switch (spec.kind()) {
    case DistributionSpec::Kind::Normal: {
        // E e^{c Z - d Z^2} = (1+2d)^{-1/2} e^{c^2 / (2 (1+2d))}
        const double c = lambda * b * spec.sigma();
        const double d = theta * b * b * spec.sigma() * spec.sigma();
        return std::exp(0.5 * c * c / (1.0 + 2.0 * d)) / std::sqrt(1.0 + 2.0 * d);
    }
    case DistributionSpec::Kind::Rademacher:
        return std::exp(-theta * b * b) * std::cosh(lambda * b);
    case DistributionSpec::Kind::TwoPoint:
    case DistributionSpec::Kind::EmpiricalSample: {
        double s = 0.0;
        for (const auto& [v, w] : spec.atoms()) s += w * f(v);
        return s;
    }
    default:
        return spec.expect(f, {-1.0 / b, 1.0 / b});
    }
}

/// Fourth-order expansion of E e^{lambda b X - theta (bX)^2} with the
/// explicit two-sided remainder bound; asserts |remainder| <= bound.
inline Lemma1Report lemma1_expand(const DistributionSpec& spec, double b,
                                  double lambda, double theta) {
    if (!(lambda > 0.0 && theta > 0.0))
        throw DomainError("lemma1_expand: lambda, theta must be > 0");
    Lemma1Report rep;
    rep.alpha = lambda * lambda * lambda / 6.0 - lambda * theta;
    rep.beta = 0.5 * theta * theta - 0.5 * lambda * lambda * theta +
               std::pow(lambda, 4) / 24.0;
    const double peak = std::exp(lambda * lambda / (4.0 * theta));
    rep.o1 = peak + lambda + std::abs(0.5 * lambda * lambda - theta) +
             std::abs(rep.alpha);
    rep.o2 = (3.0 * lambda * theta * theta + std::pow(theta, 3)) / 6.0 +
             (4.0 * std::pow(lambda, 3) * theta +
              6.0 * lambda * lambda * theta * theta +
              4.0 * lambda * std::pow(theta, 3) + std::pow(theta, 4)) / 24.0 +
             peak * std::pow(lambda + theta, 5);
    const TruncatedMomentSet tm = spec.moments(b);
    rep.lhs = lemma1_lhs(spec, b, lambda, theta);
    rep.main = 1.0 + (0.5 * lambda * lambda - theta) * b * b * tm.m2 +
               rep.alpha * std::pow(b, 3) * tm.m3 +
               rep.beta * std::pow(b, 4) * tm.m4le;
    rep.remainder = rep.lhs - rep.main;
    rep.bound = std::max(rep.o1, rep.o2) *
                (std::pow(b, 3) * tm.a3gt + std::pow(b, 5) * tm.a5le);
    rep.within = std::abs(rep.remainder) <= rep.bound;
    return rep;
}

struct Lemma2Identity {
    std::string name;
    double value = 0.0;
    double main = 0.0;
    double remainder = 0.0;
    double bound = 0.0;
    bool within = false;
};

struct Lemma2Report {
    double b = 0.0;
    bool window_ok = true;
    std::array<Lemma2Identity, 5> identities;
    bool all_within() const {
        for (const auto& id : identities)
            if (!id.within) return false;
        return true;
    }
};

/// The five tilted-moment identities with remainders checked against
/// explicit constants assembled from the fourth-order expansions:
///   E e^{xi/2}          = 1 + b^2*0 + delta(-1/3, -1/12; .)
///   E xi   e^{xi/2}     = b^2 EX^2  + delta(-1,   -2/3;  .)
///   E xi^2 e^{xi/2}     = 4 b^2 EX^2 + delta(0, -3; .)
///   E|xi|^3 e^{xi/2}    = O(1) b^3 E|X|^3
///   (E xi e^{xi/2})^2   = delta(0, O(1))
/// Outside the small-b certification window the report still evaluates, with
/// window_ok flagged false.
inline Lemma2Report lemma2_identities(const DistributionSpec& spec, double b,
                                      double window = 0.2) {
    if (!(b > 0.0)) throw DomainError("lemma2_identities: b must be > 0");
    Lemma2Report rep;
    rep.b = b;
    rep.window_ok = b <= window;
    const TruncatedMomentSet tm = spec.moments(b);
    const XiMoments xm = xi_exp_moments(spec, b);
    const double b3 = std::pow(b, 3), b4 = std::pow(b, 4), b5 = std::pow(b, 5);
    const double ghalf = 1.6487212707001282; // e^{1/2}
    const double gt = b3 * tm.a3gt;
    const double le5 = b5 * tm.a5le;

    // e^{xi/2}: fourth-order remainder constants at (lambda, theta) = (1, 1/2)
    const double o1 = ghalf + 1.0 + 0.0 + 1.0 / 3.0;
    const double o2 = 0.875 / 6.0 + 4.0625 / 24.0 + ghalf * std::pow(1.5, 5);
    rep.identities[0] = {"exp_xi_half",
                         xm.e0,
                         1.0 - b3 * tm.m3 / 3.0 - b4 * tm.m4le / 12.0,
                         0.0,
                         o1 * gt + o2 * le5,
                         false};

    // xi e^{xi/2}: quintic constant 7/8 + 65/48 + 243 e^{1/2}/384 on the
    // inside window, 4 + e^{1/2} on the outside one
    rep.identities[1] = {"xi_exp_xi_half",
                         xm.e1,
                         b * b * tm.m2 - b3 * tm.m3 - 2.0 / 3.0 * b4 * tm.m4le,
                         0.0,
                         (4.0 + ghalf) * gt +
                             (7.0 / 8.0 + 65.0 / 48.0 + 243.0 * ghalf / 384.0) * le5,
                         false};

    // xi^2 e^{xi/2}: |tail poly| <= 37/8 |u|^5 plus Taylor tail 243 e^{1/2}/48,
    // and max(e^{1/2}, (4/e)^2) on the outside window
    const double k2out = std::max(ghalf, std::pow(4.0 / 2.718281828459045, 2));
    rep.identities[2] = {"xi2_exp_xi_half",
                         xm.e2,
                         4.0 * b * b * tm.m2 - 3.0 * b4 * tm.m4le,
                         0.0,
                         (4.0 + k2out) * gt +
                             (37.0 / 8.0 + 243.0 * ghalf / 48.0) * le5,
                         false};

    // |xi|^3 e^{xi/2} = O(1) b^3 E|X|^3: 27 e^{1/2} inside, (6/e)^3 outside
    const double k3out = std::max(ghalf, std::pow(6.0 / 2.718281828459045, 3));
    rep.identities[3] = {"abs_xi3_exp_xi_half",
                         xm.abs3,
                         0.0,
                         0.0,
                         27.0 * ghalf * b3 * (tm.a3 - tm.a3gt) + k3out * gt,
                         false};

    // (E xi e^{xi/2})^2 = delta(0, O(1))
    const double q = 187.0 / 48.0 + 243.0 * ghalf / 384.0;
    rep.identities[4] = {"sq_xi_exp_xi_half",
                         xm.e1 * xm.e1,
                         0.0,
                         0.0,
                         3.0 * (ghalf + 2.0) * (ghalf + 2.0) * gt +
                             3.0 * b4 * tm.m4le + 3.0 * q * q * le5,
                         false};

    for (auto& id : rep.identities) {
        id.remainder = id.value - id.main;
        id.within = std::abs(id.remainder) <= id.bound;
    }
    return rep;
}

// -------------------------------------------------------------------------
// Decomposition bounds
// -------------------------------------------------------------------------

struct DecompositionLine {
    double log_bound_interval = 0.0; ///< with O(1) slots over +-gamma_interval
    double log_bound_explicit = 0.0; ///< with proof-recovered constants
    bool vacuous_interval = false;   ///< bound >= 1, useless at this scale
    bool vacuous_explicit = false;
    double ratio_to_main = 0.0; ///< interval bound / main-term approximation
};

struct DecompositionReport {
    double x = 0.0;
    double epsilon = 0.0;
    double log_main = 0.0; ///< Gaussian-surrogate value of the main piece
    DecompositionLine i2, i3, i4;
};

/// Numeric upper bounds for the three off-event pieces of the tail
/// decomposition, with epsilon = x^{(upsilon-1)/2}.  Interval bounds
/// instantiate every unspecified O(1) slot at +gamma_interval; explicit
/// bounds use the constants recoverable from the fourth-order expansions
/// (the truncation-cap constant e^{3 A0/2}, A0 = 68, makes the first one
/// astronomically loose, which is reported rather than hidden).
inline DecompositionReport decomposition_bounds(const CohortSpec& cohort, double x,
                                                double upsilon,
                                                double gamma_interval = 13.0) {
    if (!(upsilon >= 0.0 && upsilon < 1.0))
        throw DomainError("decomposition_bounds: upsilon must be in [0,1)");
    const double eps = std::pow(x, 0.5 * (upsilon - 1.0));
    if (!(eps < 0.5))
        throw DomainError("decomposition_bounds: requires epsilon < 1/2 (x too small)");
    if (!(eps * eps < x * x))
        throw DomainError("decomposition_bounds: requires epsilon^2 < x^2");

    DecompositionReport rep;
    rep.x = x;
    rep.epsilon = eps;

    const CohortMoments cm = cohort_moments(cohort, x);
    const double b = cm.b;
    const double G = gamma_interval;
    const double sm3 = cm.sum(&TruncatedMomentSet::m3);
    const double sm4le = cm.sum(&TruncatedMomentSet::m4le);
    const double sa3gt = cm.sum(&TruncatedMomentSet::a3gt);
    const double sa5le = cm.sum(&TruncatedMomentSet::a5le);
    const double b3 = std::pow(b, 3), b4 = std::pow(b, 4), b5 = std::pow(b, 5);
    const double slack = b3 * sa3gt + b5 * sa5le;
    const double x2 = x * x;

    auto logsumexp = [](double a, double c) {
        const double m = std::max(a, c);
        return m + std::log(std::exp(a - m) + std::exp(c - m));
    };

    // main piece: Gaussian surrogate of P(sum xi >= x^2 - eps^2)
    const TiltStats st = tilt_stats(cohort, x);
    const double sigma = std::sqrt(st.sigma_n2);
    const double t0 = (x2 - eps * eps - st.m_n) / sigma;
    rep.log_main = st.log_prod_norm - 0.5 * st.m_n +
                   detail::log_gaussian_tilted_tail(t0, sigma);

    // ---- piece 2: truncated-sum overshoot + count-of-large-terms ----------
    {
        const double d_interval =
            27.0 / 48.0 * b3 * sm3 + G * b4 * sm4le + G * slack;
        const double li = logsumexp(-9.0 * x2 / 8.0 + d_interval, -x2);
        const double A0 = 68.0; // with t = 5 in the counting bound
        const double beta_exp = 81.0 / 384.0 * std::exp(1.5 * A0);
        const double d_explicit = 27.0 / 48.0 * b3 * sm3 + beta_exp * b4 * sm4le +
                                  (2.0 * 27.0 / 48.0 + beta_exp * A0) * b3 * sa3gt;
        const double le = logsumexp(-9.0 * x2 / 8.0 + d_explicit, -x2);
        rep.i2 = {li, le, li >= 0.0, le >= 0.0, std::exp(li - rep.log_main)};
    }

    // ---- piece 3: mid band x^2 + eps x < b^2 V_n^2 < 9 x^2 ----------------
    {
        const double li = -0.5 * x2 - 0.25 * eps * x +
                          (b3 * sm3 / 18.0 - 5.0 / 648.0 * b4 * sm4le) + G * slack;
        const double w = std::sqrt(1.0 + eps / x);
        const double lam = w, th = w / 9.0;
        const double a1 = std::pow(lam, 3) / 6.0 - lam * th;
        const double b1 = 0.5 * th * th - 0.5 * lam * lam * th + std::pow(lam, 4) / 24.0;
        const double peak = std::exp(lam * lam / (4.0 * th));
        const double o1 = peak + lam + std::abs(0.5 * lam * lam - th) + std::abs(a1);
        const double o2 = (3.0 * lam * th * th + std::pow(th, 3)) / 6.0 +
                          (4.0 * std::pow(lam, 3) * th + 6.0 * lam * lam * th * th +
                           4.0 * lam * std::pow(th, 3) + std::pow(th, 4)) / 24.0 +
                          peak * std::pow(lam + th, 5);
        const double g1 = std::max(o1, o2);
        const double root = std::sqrt(x2 + eps * x);
        const double le = -0.5 * (x2 + eps * x) + eps * root / 9.0 +
                          a1 * b3 * sm3 + b1 * b4 * sm4le + g1 * slack;
        rep.i3 = {li, le, li >= 0.0, le >= 0.0, std::exp(li - rep.log_main)};
    }

    // ---- piece 4: low band b^2 V_n^2 < x^2 - eps x -------------------------
    {
        const double li = -0.5 * x2 - 0.25 * eps * x +
                          (-11.0 / 6.0 * b3 * sm3 + 25.0 / 24.0 * b4 * sm4le) +
                          G * slack;
        const double w = std::sqrt(1.0 - eps / x);
        const double lam = w, th = 2.0 * w;
        const double a2 = std::pow(lam, 3) / 6.0 - lam * th;
        const double b2 = 0.5 * th * th - 0.5 * lam * lam * th + std::pow(lam, 4) / 24.0;
        const double peak = std::exp(lam * lam / (4.0 * th));
        const double o1 = peak + lam + std::abs(0.5 * lam * lam - th) + std::abs(a2);
        const double o2 = (3.0 * lam * th * th + std::pow(th, 3)) / 6.0 +
                          (4.0 * std::pow(lam, 3) * th + 6.0 * lam * lam * th * th +
                           4.0 * lam * std::pow(th, 3) + std::pow(th, 4)) / 24.0 +
                          peak * std::pow(lam + th, 5);
        const double g2 = std::max(o1, o2);
        const double root = std::sqrt(x2 - eps * x);
        const double le = -0.5 * (x2 - eps * x) - 2.0 * eps * root + a2 * b3 * sm3 +
                          b2 * b4 * sm4le + g2 * slack;
        rep.i4 = {li, le, li >= 0.0, le >= 0.0, std::exp(li - rep.log_main)};
    }
    return rep;
}

} // namespace selfnorm
