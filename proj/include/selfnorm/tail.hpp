#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "selfnorm/delta.hpp"
#include "selfnorm/distribution.hpp"
#include "selfnorm/normal.hpp"

namespace selfnorm {

struct TailPoint {
    double x = 0.0;
    long n = 0;
    double b = 0.0; ///< x / B_n
};

inline TailPoint tail_point(const CohortSpec& cohort, double x) {
    if (!(x > 0.0)) throw DomainError("tail_point: x must be > 0");
    return {x, cohort.n(), x / cohort.bn()};
}

/// Declared moment/growth assumptions plus the finite-n surrogate knobs.
/// Every asymptotic condition "x = o(n^t)" is evaluated as x <= theta * n^t
/// and verdicts always carry the margin x / (theta n^t).
struct AssumptionProfile {
    double delta = 1.0;   ///< moment order 3 + delta, delta in [0, 1]
    double M = 1.0;       ///< moment cap sup_i E|X_i|^{3+delta} <= M
    double c = 1.0;       ///< variance floor B_n^2 >= c n
    double gamma = 1.0;   ///< third-moment growth sum EX_i^3 = O(n^gamma)
    std::optional<double> epsilon; ///< for the fourth-moment theorem
    std::optional<double> rho;     ///< window exponent, rho < 1/3

    double theta = 0.5;          ///< o(.) surrogate scale
    double eta = 1e-3;           ///< gap below 1/4 in the "otherwise" tau case
    double upsilon = 0.0;        ///< exponent in the o(x^upsilon) hypothesis
    double hyp_threshold = 0.1;  ///< threshold for |Delta bound| <= thr * x^ups
    double gamma_interval = 13.0; ///< half-width for unspecified O(1) slots
};

/// Finding produced when a declared assumption fails its numeric check.
struct ProfileFinding {
    std::string what;
    double margin; ///< ratio by which the declaration is exceeded
};

inline std::vector<ProfileFinding> check_profile(const CohortSpec& cohort,
                                                 const AssumptionProfile& p) {
    std::vector<ProfileFinding> out;
    if (p.delta < 0.0 || p.delta > 1.0)
        out.push_back({"delta outside [0,1]", p.delta});
    const double nn = static_cast<double>(cohort.n());
    if (cohort.bn2() < p.c * nn)
        out.push_back({"B_n^2 >= c n fails", (p.c * nn) / cohort.bn2()});
    const double sup = cohort.sup_abs_moment(3.0 + p.delta);
    if (sup > p.M)
        out.push_back({"sup E|X|^{3+delta} <= M fails", sup / p.M});
    if (p.epsilon) {
        const double sup4 = cohort.sup_abs_moment(4.0 + *p.epsilon);
        if (sup4 > p.M)
            out.push_back({"sup E|X|^{4+eps} <= M fails", sup4 / p.M});
    }
    return out;
}

enum class Formula { THM31, THM32, THM34, NORMAL_ONLY };
enum class Regime { INSIDE, BOUNDARY, OUTSIDE };
enum class Side { UPPER, LOWER };

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::INSIDE: return "INSIDE";
    case Regime::BOUNDARY: return "BOUNDARY";
    case Regime::OUTSIDE: return "OUTSIDE";
    }
    return "?";
}

inline const char* to_string(Formula f) {
    switch (f) {
    case Formula::THM31: return "THM31";
    case Formula::THM32: return "THM32";
    case Formula::THM34: return "THM34";
    case Formula::NORMAL_ONLY: return "NORMAL_ONLY";
    }
    return "?";
}

struct RegimeVerdict {
    Regime regime = Regime::OUTSIDE;
    double margin = 0.0; ///< >1 means the binding inequality failed by that factor
    std::string condition;
    bool hypothesis_violated = false;
};

inline RegimeVerdict classify_margin(double margin, std::string condition) {
    RegimeVerdict v;
    v.margin = margin;
    v.condition = std::move(condition);
    v.regime = margin <= 1.0 ? Regime::INSIDE
               : margin <= 2.0 ? Regime::BOUNDARY
                               : Regime::OUTSIDE;
    v.hypothesis_violated = v.regime == Regime::OUTSIDE;
    return v;
}

struct TailApproximation {
    double ratio = 1.0; ///< approximation of P(S_n >= x V_n) / (1 - Phi(x))
    double tail = 0.0;  ///< ratio * (1 - Phi(x))
    Formula formula = Formula::NORMAL_ONLY;
    RegimeVerdict regime;
    Side side = Side::UPPER;
    double envelope_exponent = 0.0; ///< crude-envelope metadata where defined
    bool unquantified_slack = true; ///< the multiplicative (1+o(1)) is not rated
};

struct TauResult {
    double tau = 0.0;
    std::string case_label;
};

/// Piecewise range exponent: (1+delta)/(6+2delta) below the fourth moment,
/// 1/4 at delta = 1 with reduced third-moment growth, strictly below 1/4
/// otherwise (by the configured eta).
inline TauResult tau_range(const AssumptionProfile& p) {
    if (p.delta < 0.0 || p.delta > 1.0)
        throw DomainError("tau_range: delta outside [0,1]");
    if (p.delta < 1.0)
        return {(1.0 + p.delta) / (6.0 + 2.0 * p.delta), "delta<1"};
    if (p.gamma < 1.0) return {0.25, "delta=1, third-moment sum O(n^gamma), gamma<1"};
    return {0.25 - p.eta, "otherwise (strictly below 1/4)"};
}

/// Main tail-ratio formula exp{Delta_n} with the o(x^upsilon) hypothesis
/// checked as |bound| <= threshold * x^upsilon, the unspecified O(1) slot
/// widened over +-gamma_interval, and x = o(sqrt n) as x <= theta sqrt n.
inline TailApproximation ratio_thm31(const TailPoint& pt, const DeltaValue& dv,
                                     const AssumptionProfile& prof = {}) {
    TailApproximation out;
    out.formula = Formula::THM31;
    out.ratio = std::exp(dv.value);
    out.tail = out.ratio * normal_tail(pt.x);
    const double total_bound =
        dv.bound + prof.gamma_interval * dv.gamma_slack;
    const double m1 = total_bound / (prof.hyp_threshold * std::pow(pt.x, prof.upsilon));
    const double m2 = pt.x / (prof.theta * std::sqrt(static_cast<double>(pt.n)));
    out.regime = classify_margin(
        std::max(m1, m2),
        m1 >= m2 ? "Delta bound <= thr * x^upsilon" : "x <= theta * sqrt(n)");
    out.envelope_exponent = total_bound;
    return out;
}

/// Third-moment formula exp{-x^3 sum EX^3 / (3 B_n^3)} on x = o(n^tau).
inline TailApproximation ratio_thm32(const TailPoint& pt, const CohortSpec& cohort,
                                     const AssumptionProfile& prof) {
    TailApproximation out;
    out.formula = Formula::THM32;
    const double bn3 = std::pow(cohort.bn(), 3);
    const double s3 = cohort.sum_raw_moment(3);
    out.ratio = std::exp(-pt.x * pt.x * pt.x * s3 / (3.0 * bn3));
    out.tail = out.ratio * normal_tail(pt.x);
    const TauResult tr = tau_range(prof);
    const double margin =
        pt.x / (prof.theta * std::pow(static_cast<double>(pt.n), tr.tau));
    out.regime = classify_margin(margin, "x <= theta * n^tau (" + tr.case_label + ")");
    out.envelope_exponent =
        std::pow(pt.x, 3) /
        std::pow(static_cast<double>(pt.n), 1.5 - prof.gamma);
    return out;
}

/// Fourth-moment formula exp{-x^4 sum EX^4 / (12 B_n^4)} inside the window
/// x = o(n^{1/2 - gamma/3}) and O(n^rho).
inline TailApproximation ratio_thm34(const TailPoint& pt, const CohortSpec& cohort,
                                     const AssumptionProfile& prof) {
    if (!prof.epsilon || !prof.rho)
        throw DomainError("ratio_thm34: profile requires epsilon and rho");
    if (!(*prof.rho < 1.0 / 3.0))
        throw DomainError("ratio_thm34: rho must be < 1/3");
    TailApproximation out;
    out.formula = Formula::THM34;
    const double bn4 = std::pow(cohort.bn2(), 2);
    const double s4 = cohort.sum_raw_moment(4);
    out.ratio = std::exp(-std::pow(pt.x, 4) * s4 / (12.0 * bn4));
    out.tail = out.ratio * normal_tail(pt.x);
    const double nn = static_cast<double>(pt.n);
    const double m1 = pt.x / (prof.theta * std::pow(nn, 0.5 - prof.gamma / 3.0));
    const double m2 = pt.x / (prof.theta * std::pow(nn, *prof.rho));
    out.regime = classify_margin(
        std::max(m1, m2),
        m1 >= m2 ? "x <= theta * n^{1/2-gamma/3}" : "x <= theta * n^rho");
    out.envelope_exponent = std::pow(pt.x, 4) * s4 / (12.0 * bn4);
    return out;
}

struct BerryEsseenBound {
    double leading = 0.0;  ///< computable surrogate of the bound's main term
    double envelope = 0.0; ///< crude n-power envelope
};

/// Third-moment exponential Berry-Esseen surrogate:
/// x^2 |sum EX^3| / B_n^3 * e^{-x^2/2} / sqrt(2 pi), with the crude envelope
/// x^2 / n^{3/2-gamma} * e^{-x^2/2}.
inline BerryEsseenBound be_bound_third(const TailPoint& pt, const CohortSpec& cohort,
                                       const AssumptionProfile& prof) {
    BerryEsseenBound out;
    const double damp = std::exp(-0.5 * pt.x * pt.x);
    out.leading = pt.x * pt.x * std::abs(cohort.sum_raw_moment(3)) /
                  std::pow(cohort.bn(), 3) * damp * kInvSqrt2Pi;
    out.envelope = pt.x * pt.x /
                   std::pow(static_cast<double>(pt.n), 1.5 - prof.gamma) * damp;
    return out;
}

/// Fourth-moment counterpart: x^3 sum EX^4 / B_n^4 * e^{-x^2/2} / sqrt(2 pi),
/// envelope x^3 / n * e^{-x^2/2}.
inline BerryEsseenBound be_bound_fourth(const TailPoint& pt,
                                        const CohortSpec& cohort) {
    BerryEsseenBound out;
    const double damp = std::exp(-0.5 * pt.x * pt.x);
    out.leading = std::pow(pt.x, 3) * cohort.sum_raw_moment(4) /
                  std::pow(cohort.bn2(), 2) * damp * kInvSqrt2Pi;
    out.envelope = std::pow(pt.x, 3) / static_cast<double>(pt.n) * damp;
    return out;
}

/// ((1+x)/d_{n,delta})^{2+delta} with d = B_n / L^{1/(2+delta)},
/// L = sum E|X_i|^{2+delta}.
inline double jsw_error_factor(const TailPoint& pt, const CohortSpec& cohort,
                               double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw DomainError("jsw_error_factor: delta must be in (0,1]");
    const double L = cohort.sum_abs_moment(2.0 + delta);
    const double d = cohort.bn() / std::pow(L, 1.0 / (2.0 + delta));
    return std::pow((1.0 + pt.x) / d, 2.0 + delta);
}

/// One-call evaluation of a formula on either tail.  The lower tail
/// P(S_n <= -x V_n) / Phi(-x) is computed by sign-flipping the cohort, so
/// symmetric cohorts give bit-identical sides.
inline TailApproximation approximate_tail(const CohortSpec& cohort, double x,
                                          Formula formula,
                                          const AssumptionProfile& prof = {},
                                          Side side = Side::UPPER) {
    const CohortSpec use = side == Side::LOWER ? cohort.negated() : cohort;
    const TailPoint pt = tail_point(use, x);
    TailApproximation out;
    switch (formula) {
    case Formula::THM31:
        out = ratio_thm31(pt, delta_n(cohort_moments(use, x),
                                      DeltaCoefficients::main(0.0)),
                          prof);
        break;
    case Formula::THM32:
        out = ratio_thm32(pt, use, prof);
        break;
    case Formula::THM34:
        out = ratio_thm34(pt, use, prof);
        break;
    case Formula::NORMAL_ONLY:
        out.ratio = 1.0;
        out.tail = normal_tail(x);
        out.regime = classify_margin(0.0, "none");
        break;
    }
    out.side = side;
    return out;
}

struct RegimeZone {
    bool fired = false;
    double margin = 0.0;
    std::string detail;
};

/// Classification of (x, n, cohort) against the three range statements:
/// (i)  reduced third-moment sum widens the plain normal-approximation range,
/// (ii) provable-failure zone (large skew sum, x beyond n^{(1+d)/(6+2d)-rho}),
/// (iii) sub-unity zone beyond n^{1/4} inside the fourth-moment window.
struct RegimeReport {
    RegimeZone widened;
    RegimeZone failure;
    RegimeZone subunity;
    double tau = 0.0;
    std::string tau_case;
};

inline RegimeReport regime_report(const TailPoint& pt, const CohortSpec& cohort,
                                  const AssumptionProfile& prof, double c1 = 1.0,
                                  double c2 = 1.0, double c3 = 1.0) {
    RegimeReport rep;
    const TauResult tr = tau_range(prof);
    rep.tau = tr.tau;
    rep.tau_case = tr.case_label;
    const double nn = static_cast<double>(pt.n);
    const double s3 = std::abs(cohort.sum_raw_moment(3));
    char buf[192];

    // (i): |sum EX^3| <= c1 * n^{3/(3+delta)} widens the range to n^tau
    const double cap_i = c1 * std::pow(nn, 3.0 / (3.0 + prof.delta));
    rep.widened.margin = s3 / cap_i;
    rep.widened.fired = rep.widened.margin <= 1.0;
    std::snprintf(buf, sizeof buf,
                  "|sum EX^3| = %.6g vs c1 n^{3/(3+delta)} = %.6g; tau = %.6g",
                  s3, cap_i, tr.tau);
    rep.widened.detail = buf;

    // (ii): |sum EX^3| >= c1 n^{3/(3+delta)+3rho} and x >= c2 n^{(1+delta)/(6+2delta)-rho}
    const double rho = prof.rho ? *prof.rho : prof.delta / (9.0 + 3.0 * prof.delta);
    const double skew_floor = c1 * std::pow(nn, 3.0 / (3.0 + prof.delta) + 3.0 * rho);
    const double x_floor =
        c2 * std::pow(nn, (1.0 + prof.delta) / (6.0 + 2.0 * prof.delta) - rho);
    const double m_skew = skew_floor / std::max(s3, 1e-300);
    const double m_x = x_floor / pt.x;
    const double m_hi = pt.x / (prof.theta * std::pow(nn, tr.tau));
    rep.failure.margin = std::max({m_skew, m_x, m_hi});
    rep.failure.fired = rep.failure.margin <= 1.0;
    std::snprintf(buf, sizeof buf,
                  "skew %.3g vs floor %.3g; x %.4g vs floor %.4g, cap %.4g (rho=%.4g)",
                  s3, skew_floor, pt.x, x_floor,
                  prof.theta * std::pow(nn, tr.tau), rho);
    rep.failure.detail = buf;

    // (iii): x >= c3 n^{1/4} inside the fourth-moment window => ratio < 1
    const double x14 = c3 * std::pow(nn, 0.25);
    const double m_lo = x14 / pt.x;
    const double m_win = pt.x / (prof.theta * std::pow(nn, 0.5 - prof.gamma / 3.0));
    const double m_rho =
        prof.rho ? pt.x / (prof.theta * std::pow(nn, *prof.rho)) : m_win;
    rep.subunity.margin = std::max({m_lo, m_win, m_rho});
    rep.subunity.fired = rep.subunity.margin <= 1.0;
    std::snprintf(buf, sizeof buf, "x %.4g vs c3 n^{1/4} = %.4g, window caps %.4g / %.4g",
                  pt.x, x14, prof.theta * std::pow(nn, 0.5 - prof.gamma / 3.0),
                  prof.rho ? prof.theta * std::pow(nn, *prof.rho) : 0.0);
    rep.subunity.detail = buf;
    return rep;
}

} // namespace selfnorm
