#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "selfnorm/distribution.hpp"
#include "selfnorm/errors.hpp"

namespace selfnorm {

/// Coefficient triple of the truncated-moment functional
///   delta(alpha, beta; gamma) =
///       alpha b^3 EX^3 + beta b^4 EX^4 I{|bX|<=1}
///     + gamma (b^3 E|X|^3 I{|bX|>1} + b^5 E|X|^5 I{|bX|<=1}).
struct DeltaCoefficients {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    /// Coefficients of the main tail-ratio exponent.
    static DeltaCoefficients main(double gamma = 0.0) {
        return {-1.0 / 3.0, -1.0 / 12.0, gamma};
    }
    /// First tilted-moment identity (mean of the tilted transform).
    static DeltaCoefficients xi1(double gamma = 0.0) {
        return {-1.0, -2.0 / 3.0, gamma};
    }
    /// Second tilted-moment identity.
    static DeltaCoefficients xi2(double gamma = 0.0) {
        return {0.0, -3.0, gamma};
    }
    /// Truncated-sum overshoot bound (counting piece of the decomposition).
    static DeltaCoefficients overshoot(double beta, double gamma) {
        return {27.0 / 48.0, beta, gamma};
    }
    /// Mid-band decomposition piece.
    static DeltaCoefficients mid_band(double gamma = 0.0) {
        return {1.0 / 18.0, -5.0 / 648.0, gamma};
    }
    /// Low-band decomposition piece.
    static DeltaCoefficients low_band(double gamma = 0.0) {
        return {-11.0 / 6.0, 25.0 / 24.0, gamma};
    }

    DeltaCoefficients operator+(const DeltaCoefficients& o) const {
        return {alpha + o.alpha, beta + o.beta, gamma + o.gamma};
    }
    DeltaCoefficients operator*(double k) const {
        return {k * alpha, k * beta, k * gamma};
    }
    DeltaCoefficients operator-() const { return {-alpha, -beta, -gamma}; }
};

/// A functional value with its explicit majorant and, as metadata, the
/// cohort's gamma-slot slack sum(b^3 a3gt + b^5 a5le) so callers can widen
/// the bound over a gamma interval without recomputing moments.
struct DeltaValue {
    double value = 0.0;
    double bound = 0.0;       ///< (|alpha|+|beta|+2|gamma|) b^3 E|X|^3, summed
    double gamma_slack = 0.0; ///< sum of b^3 a3gt + b^5 a5le
    DeltaCoefficients coeffs;
    double b = 0.0;
};

/// Per-member functional.  The bound uses b^4 X^4 <= b^3 |X|^3 and
/// b^5 |X|^5 <= b^3 |X|^3 on {|bX| <= 1}.
inline DeltaValue delta_i(const TruncatedMomentSet& tm, DeltaCoefficients c) {
    tm.validate();
    const double b = tm.b;
    const double b3 = b * b * b;
    DeltaValue dv;
    dv.coeffs = c;
    dv.b = b;
    dv.gamma_slack = b3 * tm.a3gt + std::pow(b, 5) * tm.a5le;
    dv.value = c.alpha * b3 * tm.m3 + c.beta * std::pow(b, 4) * tm.m4le +
               c.gamma * dv.gamma_slack;
    dv.bound = (std::abs(c.alpha) + std::abs(c.beta) + 2.0 * std::abs(c.gamma)) *
               b3 * tm.a3;
    return dv;
}

/// Cohort sum, members in index order with compensated accumulation so CLI
/// output is bit-stable across runs.
inline DeltaValue delta_n(const CohortMoments& cm, DeltaCoefficients c) {
    if (cm.entries.empty()) throw DomainError("delta_n: empty cohort");
    DeltaValue out;
    out.coeffs = c;
    out.b = cm.b;
    double v = 0.0, vc = 0.0, bd = 0.0, gs = 0.0;
    for (const auto& e : cm.entries) {
        if (std::abs(e.tm.b - cm.b) > 1e-12 * cm.b)
            throw MixedScale("delta_n: members carry different b");
        DeltaValue d = delta_i(e.tm, c);
        const double y = static_cast<double>(e.count) * d.value;
        const double t = v + y;
        vc += (std::abs(v) >= std::abs(y)) ? (v - t) + y : (y - t) + v;
        v = t;
        bd += static_cast<double>(e.count) * d.bound;
        gs += static_cast<double>(e.count) * d.gamma_slack;
    }
    out.value = v + vc;
    out.bound = bd;
    out.gamma_slack = gs;
    return out;
}

inline DeltaValue delta_n(std::span<const TruncatedMomentSet> tms,
                          DeltaCoefficients c) {
    if (tms.empty()) throw DomainError("delta_n: empty cohort");
    CohortMoments cm;
    cm.b = tms.front().b;
    for (const auto& tm : tms) {
        if (std::abs(tm.b - cm.b) > 1e-12 * cm.b)
            throw MixedScale("delta_n: members carry different b");
        cm.entries.push_back({tm, 1});
    }
    return delta_n(cm, c);
}

/// Linearity and homogeneity of the functional over the given members:
/// Delta(c1) + Delta(c2) == Delta(c1+c2) and k Delta(c1) == Delta(k c1)
/// for k in {-1, 0.5, 7}, within 1e-12 relative.
inline bool linearity_check(DeltaCoefficients c1, DeltaCoefficients c2,
                            const CohortMoments& cm) {
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1e-30});
    };
    const double v1 = delta_n(cm, c1).value;
    const double v2 = delta_n(cm, c2).value;
    if (!close(v1 + v2, delta_n(cm, c1 + c2).value)) return false;
    for (double k : {-1.0, 0.5, 7.0})
        if (!close(k * v1, delta_n(cm, c1 * k).value)) return false;
    return true;
}

} // namespace selfnorm
