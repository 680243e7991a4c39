#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "selfnorm/errors.hpp"

namespace selfnorm {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    int panels = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
inline constexpr double kGK15Nodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kGK15KronrodW[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double kGK15GaussW[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kGK15KronrodW[7] * fc;
    double gauss = kGK15GaussW[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kGK15Nodes[j];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kGK15KronrodW[j] * fsum;
        if (j % 2 == 1) gauss += kGK15GaussW[j / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    return Panel{a, b, kron, std::abs(kron - gauss)};
}

} // namespace detail

/// Adaptive bisection on [a, b] with the embedded (G7, K15) pair: the panel
/// with the largest error estimate is split until the summed estimate meets
/// `abs_tol` or the panel budget runs out (QuadratureFailure).
template <class F>
QuadratureResult integrate(const F& f, double a, double b,
                           double abs_tol = 1e-10, int max_panels = 4000) {
    if (a == b) return {0.0, 0.0, 0};
    std::priority_queue<detail::Panel> heap;
    detail::Panel p0 = detail::gk15(f, a, b);
    double total = p0.value;
    double err = p0.error;
    heap.push(p0);
    int panels = 1;
    const double width_floor =
        1e-14 * (std::abs(a) + std::abs(b) + 1.0);
    while (err > abs_tol) {
        if (panels >= max_panels)
            throw QuadratureFailure(
                "adaptive quadrature: tolerance not reached within panel budget");
        detail::Panel worst = heap.top();
        if (worst.b - worst.a < width_floor) break; // refinement exhausted
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        detail::Panel l = detail::gk15(f, worst.a, m);
        detail::Panel r = detail::gk15(f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++panels;
    }
    return {total, err, panels};
}

/// Same, but the integration range is pre-split at every interior cut so a
/// discontinuity (e.g. a truncation indicator) never crosses a panel.
template <class F>
QuadratureResult integrate_cuts(const F& f, double a, double b,
                                std::span<const double> cuts,
                                double abs_tol = 1e-10,
                                int max_panels = 4000) {
    std::vector<double> knots{a, b};
    for (double c : cuts)
        if (c > a && c < b) knots.push_back(c);
    std::sort(knots.begin(), knots.end());
    QuadratureResult out;
    const double per = abs_tol / static_cast<double>(knots.size());
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        QuadratureResult r =
            integrate(f, knots[i], knots[i + 1], per, max_panels);
        out.value += r.value;
        out.abs_error += r.abs_error;
        out.panels += r.panels;
    }
    return out;
}

} // namespace selfnorm
