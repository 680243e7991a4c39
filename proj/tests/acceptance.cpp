// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances and budgets are pinned in code; nothing is deferred
// to runtime calibration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "selfnorm/delta.hpp"
#include "selfnorm/oracles.hpp"
#include "selfnorm/tail.hpp"
#include "selfnorm/tilt.hpp"
#include "selfnorm/verify.hpp"

using namespace selfnorm;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void report(int id, bool pass, const std::string& what, double secs,
            double budget_secs) {
    const bool in_budget = budget_secs <= 0.0 || secs <= budget_secs;
    const bool ok = pass && in_budget;
    if (!ok) ++g_failures;
    std::printf("[%s] %d. %s (%.2fs%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(),
                secs, in_budget ? "" : " OVER BUDGET");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// 1. Two-atom cohort along x = 2 n^{1/4}: the exact binomial log-ratio must
//    approach -x^4/(12 n) with error E(16384) <= 0.3, non-increasing in n up
//    to one lattice-parity exception.
void criterion1() {
    Timer t;
    std::vector<double> errs;
    for (long n : {256L, 1024L, 4096L, 16384L}) {
        const double x = 2.0 * std::pow(static_cast<double>(n), 0.25);
        const ExactTail ex = rademacher_tail(n, x);
        const double lr = std::log(ex.p) - log_normal_tail(x);
        errs.push_back(std::abs(lr + std::pow(x, 4) / (12.0 * n)));
    }
    int exceptions = 0;
    for (std::size_t i = 1; i < errs.size(); ++i)
        if (errs[i] > errs[i - 1]) ++exceptions;
    const bool pass = errs.back() <= 0.3 && exceptions <= 1;
    report(1, pass,
           "binomial-oracle error law on x = 2 n^{1/4}: E = {" + fmt(errs[0]) + ", " +
               fmt(errs[1]) + ", " + fmt(errs[2]) + ", " + fmt(errs[3]) +
               "}, E(16384) <= 0.3, non-increasing with " +
               std::to_string(exceptions) + " lattice-parity exception(s)",
           t.seconds(), 5.0);
}

// 2. Gaussian cohorts: t-integral log-ratio within 3 x^6/n^2 + 0.05 of
//    -x^4/(4 n) at x = n^{1/4} and 2 n^{1/4}.
void criterion2() {
    Timer t;
    bool pass = true;
    std::string detail;
    for (long n : {1000L, 10000L}) {
        for (double c : {1.0, 2.0}) {
            const double x = c * std::pow(static_cast<double>(n), 0.25);
            const ExactTail ex = gaussian_selfnorm_tail(n, x);
            const double err = std::abs(std::log(ex.p) - log_normal_tail(x) +
                                        std::pow(x, 4) / (4.0 * n));
            const double tol = 3.0 * std::pow(x, 6) / (static_cast<double>(n) * n) + 0.05;
            if (err > tol) pass = false;
            detail += " E(" + std::to_string(n) + "," + fmt(c) + ")=" + fmt(err) +
                      "<=" + fmt(tol);
        }
    }
    report(2, pass, "t-integral error law on x = c n^{1/4}:" + detail, t.seconds(),
           10.0);
}

// 3. Breakdown at n^{1/4} and convergence below it.
void criterion3() {
    Timer t;
    const long n = 16384;
    const double x14 = 2.0 * std::pow(static_cast<double>(n), 0.25);
    const double r14 =
        std::exp(std::log(rademacher_tail(n, x14).p) - log_normal_tail(x14));
    const double x15 = std::pow(static_cast<double>(n), 0.2);
    const double r15 = rademacher_tail(n, x15).p / normal_tail(x15);
    const bool pass = r14 <= std::exp(-1.0) && r15 >= 0.9 && r15 <= 1.1;
    report(3, pass,
           "range breakdown: ratio(2 n^{1/4}) = " + fmt(r14) +
               " <= e^-1, ratio(n^{1/5}) = " + fmt(r15) + " in [0.9, 1.1]",
           t.seconds(), 5.0);
}

// 4. Conjugate-method sampler: 3-SE agreement with the exact binomial tail,
//    relative SE <= 5% at 1e5 samples, plus exact-enumeration unbiasedness.
void criterion4() {
    Timer t;
    bool pass = true;
    std::string detail;
    const auto coh = CohortSpec::iid(DistributionSpec::rademacher(), 100);
    for (double x : {2.0, 3.0, 4.0}) {
        const TiltedEstimate est = conjugate_estimate(coh, x, 100000, 917);
        const double want = rademacher_tail(100, x).p;
        const double z = std::abs(est.p_hat - want) / est.se;
        const double rel = est.se / est.p_hat;
        if (z > 3.0 || rel > 0.05) pass = false;
        // Gaussian-surrogate certificate must cover the estimate on every run
        if (std::abs(est.p_hat - est.analytic_surrogate) >
            3.0 * est.se + est.rn_certificate)
            pass = false;
        detail += " x=" + fmt(x) + ": |z|=" + fmt(z) + ", relSE=" + fmt(rel);
    }
    double worst = 0.0;
    for (long n : {8L, 12L, 16L}) {
        const double e = verify_detail::conjugate_enumeration(n, 1.5);
        const double want = rademacher_tail(n, 1.5).p;
        worst = std::max(worst, std::abs(e - want) / want);
    }
    if (worst > 1e-12) pass = false;
    report(4, pass,
           "tilted sampler vs binomial oracle:" + detail +
               "; enumeration worst rel = " + fmt(worst) + " <= 1e-12",
           t.seconds(), 30.0);
}

// 5. Fourth-order expansion certification over the full 180-point grid.
void criterion5() {
    Timer t;
    int pass_count = 0, total = 0;
    double worst = 0.0;
    for (const auto& d :
         {DistributionSpec::normal(1.0), DistributionSpec::rademacher(),
          DistributionSpec::centered_uniform(std::sqrt(3.0)),
          DistributionSpec::two_point(0.9, -1.0 / 3.0, 3.0)})
        for (double lam : {0.5, 1.0, 2.0})
            for (double th : {0.25, 0.5, 1.0})
                for (double b : {0.02, 0.05, 0.1, 0.2, 0.4}) {
                    const Lemma1Report r = lemma1_expand(d, b, lam, th);
                    ++total;
                    if (r.within) ++pass_count;
                    if (r.bound > 0.0)
                        worst = std::max(worst, std::abs(r.remainder) / r.bound);
                }
    report(5, pass_count == total && total == 180,
           "expansion remainder within bound: " + std::to_string(pass_count) + "/" +
               std::to_string(total) + ", worst |rem|/bound = " + fmt(worst),
           t.seconds(), 5.0);
}

// 6. Tilted mean/variance limits: |m_n - x^2| and |sigma_n^2 - 4 x^2| shrink
//    by >= 1.5 per halving of b at fixed x = 3.
void criterion6() {
    Timer t;
    bool pass = true;
    std::string detail;
    double prev_m = 0.0, prev_s = 0.0;
    bool first = true;
    for (double b : {0.2, 0.1, 0.05, 0.025}) {
        const long n = std::lround(std::pow(3.0 / b, 2));
        const TiltStats st =
            tilt_stats(CohortSpec::iid(DistributionSpec::rademacher(), n), 3.0);
        const double dm = std::abs(st.m_n - 9.0);
        const double ds = std::abs(st.sigma_n2 - 36.0);
        if (!first) {
            if (prev_m / dm < 1.5 || prev_s / ds < 1.5) pass = false;
            detail += " b=" + fmt(b) + ": factors " + fmt(prev_m / dm) + "/" +
                      fmt(prev_s / ds);
        }
        prev_m = dm;
        prev_s = ds;
        first = false;
    }
    report(6, pass, "tilted mean/variance limits:" + detail + " all >= 1.5",
           t.seconds(), 2.0);
}

// 7. Range-exponent classifier reproduces the piecewise definition exactly.
void criterion7() {
    Timer t;
    bool pass = true;
    for (double delta : {0.0, 0.3, 0.7, 1.0}) {
        for (double gamma : {0.0, 0.5, 1.0}) {
            AssumptionProfile p;
            p.delta = delta;
            p.gamma = gamma;
            const double tau = tau_range(p).tau;
            double want;
            if (delta < 1.0) want = (1.0 + delta) / (6.0 + 2.0 * delta);
            else if (gamma < 1.0) want = 0.25;
            else want = 0.25 - p.eta;
            if (tau != want) pass = false;
        }
    }
    report(7, pass, "range exponent classifier: 12/12 table cases exact", t.seconds(),
           5.0);
}

// 8. Functional algebra: 1000 randomized linearity/homogeneity cases at
//    1e-12 relative plus exact alpha-independence for symmetric laws.
void criterion8() {
    Timer t;
    bool pass = true;
    std::string detail;
    for (const auto& c : verify_delta(20260808ull)) {
        if (!c.pass) {
            pass = false;
            detail += " FAILED:" + c.name;
        }
    }
    report(8, pass, "functional linearity and symmetry suite" + detail, t.seconds(),
           10.0);
}

// 9. Exponential Berry-Esseen surrogate: |exact - normal tail| <= 20x the
//    fourth-moment surrogate at every grid point, and the measured/surrogate
//    profile spread across the grid below a factor 5.
void criterion9() {
    Timer t;
    const long n = 4096;
    const auto coh = CohortSpec::iid(DistributionSpec::rademacher(), n);
    bool envelope_ok = true;
    double lo = 1e300, hi = 0.0;
    std::string detail;
    for (int xi = 2; xi <= 8; ++xi) {
        const double x = xi;
        const double measured = std::abs(rademacher_tail(n, x).p - normal_tail(x));
        const double surrogate = be_bound_fourth(tail_point(coh, x), coh).leading;
        const double ratio = measured / surrogate;
        if (measured > 20.0 * surrogate) envelope_ok = false;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    const double spread = hi / lo;
    const bool shape_ok = spread < 5.0;
    detail = "20x envelope: " + std::string(envelope_ok ? "ok" : "FAIL") +
             " (max ratio " + fmt(hi) + "); shape spread " + fmt(spread) +
             " < 5: " + (shape_ok ? "ok" : "FAIL") +
             " (lattice point mass dominates |exact - tail| at small x and nearly "
             "cancels the kurtosis deficit at x = 8)";
    report(9, envelope_ok && shape_ok, "fourth-moment surrogate profile: " + detail,
           t.seconds(), 10.0);
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return g_failures;
}
