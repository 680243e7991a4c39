#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfnorm/delta.hpp"
#include "selfnorm/distribution.hpp"
#include "selfnorm/oracles.hpp"
#include "selfnorm/tail.hpp"
#include "selfnorm/tilt.hpp"

namespace selfnorm {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace verify_detail {

inline void add(std::vector<CheckResult>& out, const std::string& name, bool pass,
                const std::string& detail = "") {
    out.push_back({name, pass, detail});
}

inline std::string g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::vector<DistributionSpec> standard_pool() {
    return {DistributionSpec::normal(1.0), DistributionSpec::rademacher(),
            DistributionSpec::centered_uniform(std::sqrt(3.0)),
            DistributionSpec::two_point(0.9, -1.0 / 3.0, 3.0)};
}

/// Exact tail of the symmetric walk by 128-bit integer enumeration;
/// independent of the log-gamma summation path.  n <= 64.
inline double rademacher_tail_rational(long n, double x, bool strict = false) {
    if (n < 1 || n > 64) throw DomainError("rational oracle: n must be <= 64");
    const long kmin = [&] {
        const double v =
            0.5 * (static_cast<double>(n) + x * std::sqrt(static_cast<double>(n)));
        const double r = std::nearbyint(v);
        if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)))
            return static_cast<long>(r) + (strict ? 1 : 0);
        return static_cast<long>(std::ceil(v));
    }();
    if (kmin > n) return 0.0;
    unsigned __int128 coeff = 1; // C(n, 0)
    unsigned __int128 sum = 0;
    for (long k = 0; k <= n; ++k) {
        if (k >= kmin) sum += coeff;
        if (k < n) coeff = coeff * static_cast<unsigned __int128>(n - k) /
                           static_cast<unsigned __int128>(k + 1);
    }
    const long double total = std::exp2(static_cast<long double>(n));
    return static_cast<double>(static_cast<long double>(sum) / total);
}

/// Expectation of the conjugate estimator over all 2^n sign vectors with the
/// sampler's own tilted atom probabilities and weight algebra.
inline double conjugate_enumeration(long n, double x) {
    if (n < 1 || n > 24) throw DomainError("conjugate_enumeration: n must be <= 24");
    const double b = x / std::sqrt(static_cast<double>(n));
    const TiltedLaw law = TiltedLaw::make(DistributionSpec::rademacher(), b);
    const auto atoms = law.atoms();
    const double log_scale =
        static_cast<double>(n) * std::log(law.normalizer()) - 0.5 * x * x;
    const double x2 = x * x;
    const double thr = x2 - 1e-9 * std::max(1.0, x2);
    double mean = 0.0;
    for (long mask = 0; mask < (1L << n); ++mask) {
        double t = 0.0, pr = 1.0;
        for (long i = 0; i < n; ++i) {
            const int bit = static_cast<int>((mask >> i) & 1);
            t += atoms[static_cast<std::size_t>(bit)].first;
            pr *= atoms[static_cast<std::size_t>(bit)].second;
        }
        if (t >= thr) mean += pr * std::exp(std::min(0.5 * (x2 - t), 0.0));
    }
    return std::exp(log_scale) * mean;
}

} // namespace verify_detail

// ---------------------------------------------------------------------------

inline std::vector<CheckResult> verify_delta(std::uint64_t seed = 12345) {
    using namespace verify_detail;
    std::vector<CheckResult> out;
    CounterRng rng(seed);
    const auto pool = standard_pool();

    int lin_pass = 0;
    const int lin_total = 1000;
    for (int i = 0; i < lin_total; ++i) {
        std::vector<CohortSpec::Group> groups;
        const int k = 1 + static_cast<int>(rng.uniform() * 3);
        for (int j = 0; j < k; ++j) {
            const auto& spec =
                pool[static_cast<std::size_t>(rng.uniform() * pool.size()) % pool.size()];
            groups.push_back({spec, 1 + static_cast<long>(rng.uniform() * 50)});
        }
        const CohortSpec cohort = CohortSpec::of_groups(groups);
        const double x = 0.2 + 5.0 * rng.uniform();
        const CohortMoments cm = cohort_moments(cohort, x);
        auto coeff = [&] {
            return DeltaCoefficients{10.0 * rng.uniform() - 5.0,
                                     10.0 * rng.uniform() - 5.0,
                                     10.0 * rng.uniform() - 5.0};
        };
        if (linearity_check(coeff(), coeff(), cm)) ++lin_pass;
    }
    add(out, "delta.linearity_1000_random", lin_pass == lin_total,
        std::to_string(lin_pass) + "/" + std::to_string(lin_total));

    bool bound_ok = true, sym_ok = true;
    for (const auto& spec : pool) {
        for (double b : {0.02, 0.1, 0.3, 0.7, 1.5, 3.0}) {
            const TruncatedMomentSet tm = spec.moments(b);
            for (int i = 0; i < 20; ++i) {
                const DeltaCoefficients c{10.0 * rng.uniform() - 5.0,
                                          10.0 * rng.uniform() - 5.0,
                                          10.0 * rng.uniform() - 5.0};
                const DeltaValue dv = delta_i(tm, c);
                if (std::abs(dv.value) > dv.bound) bound_ok = false;
            }
            if (tm.m3 == 0.0) {
                const DeltaValue lo = delta_i(tm, {-5.0, -1.0 / 12.0, 1.0});
                const DeltaValue mid = delta_i(tm, {0.0, -1.0 / 12.0, 1.0});
                const DeltaValue hi = delta_i(tm, {5.0, -1.0 / 12.0, 1.0});
                if (lo.value != mid.value || mid.value != hi.value) sym_ok = false;
            }
        }
    }
    add(out, "delta.bound_soundness_grid", bound_ok);
    add(out, "delta.symmetric_alpha_independence_exact", sym_ok);

    // additive-inverse and zero-functional sanity
    const CohortMoments cm =
        cohort_moments(CohortSpec::iid(DistributionSpec::rademacher(), 100), 2.0);
    const double vplus = delta_n(cm, DeltaCoefficients::main(1.0)).value;
    const double vminus = delta_n(cm, -DeltaCoefficients::main(1.0)).value;
    add(out, "delta.additive_inverse", vplus + vminus == 0.0);
    add(out, "delta.zero_functional",
        delta_n(cm, DeltaCoefficients{0, 0, 0}).value == 0.0);
    return out;
}

inline std::vector<CheckResult> verify_lemmas() {
    using namespace verify_detail;
    std::vector<CheckResult> out;

    int pass = 0, total = 0;
    double worst = 0.0;
    for (const auto& d : standard_pool())
        for (double lam : {0.5, 1.0, 2.0})
            for (double th : {0.25, 0.5, 1.0})
                for (double b : {0.02, 0.05, 0.1, 0.2, 0.4}) {
                    const Lemma1Report r = lemma1_expand(d, b, lam, th);
                    ++total;
                    if (r.within) ++pass;
                    if (r.bound > 0.0)
                        worst = std::max(worst, std::abs(r.remainder) / r.bound);
                }
    add(out, "lemma1.remainder_within_bound_grid", pass == total,
        std::to_string(pass) + "/" + std::to_string(total) +
            ", worst |rem|/bound = " + g(worst));

    // frozen constants of the fourth-order expansion at (1, 1/2)
    const Lemma1Report r11 =
        lemma1_expand(DistributionSpec::rademacher(), 0.1, 1.0, 0.5);
    const bool c_ok = std::abs(r11.o1 - 2.9820546040334613) < 1e-12 &&
                      std::abs(r11.o2 - 12.835081316045765) < 1e-10;
    add(out, "lemma1.printed_constants_at_1_half", c_ok,
        "O1 = " + g(r11.o1) + ", O2 = " + g(r11.o2));

    bool l2_ok = true, window_flag_ok = true;
    for (const auto& d : standard_pool())
        for (double b : {0.2, 0.1, 0.05, 0.025}) {
            const Lemma2Report rep = lemma2_identities(d, b);
            if (!rep.all_within() || !rep.window_ok) l2_ok = false;
        }
    window_flag_ok = !lemma2_identities(DistributionSpec::rademacher(), 0.25).window_ok;
    add(out, "lemma2.identities_within_bounds_grid", l2_ok);
    add(out, "lemma2.window_flag", window_flag_ok);

    // two-point closed forms of the tilted moments
    bool closed_ok = true;
    for (double b : {0.05, 0.1, 0.2}) {
        const XiMoments xm = xi_exp_moments(DistributionSpec::rademacher(), b);
        const double e0 = std::exp(-0.5 * b * b) * std::cosh(b);
        const double e1 =
            std::exp(-0.5 * b * b) * (2.0 * b * std::sinh(b) - b * b * std::cosh(b));
        if (std::abs(xm.e0 - e0) > 1e-14 || std::abs(xm.e1 - e1) > 1e-14)
            closed_ok = false;
    }
    add(out, "lemma2.rademacher_closed_forms", closed_ok);
    return out;
}

inline std::vector<CheckResult> verify_oracles(std::uint64_t seed = 777) {
    using namespace verify_detail;
    std::vector<CheckResult> out;

    add(out, "binomial.n4_x2",
        std::abs(rademacher_tail(4, 2.0).p - 0.0625) < 1e-15);
    add(out, "binomial.n4_x09",
        std::abs(rademacher_tail(4, 0.9).p - 0.3125) < 1e-15);

    bool rational_ok = true;
    double worst = 0.0;
    for (long n : {8L, 16L, 33L, 64L})
        for (double x : {0.5, 1.0, 1.7, 2.5, 4.0}) {
            const double a = rademacher_tail(n, x).p;
            const double b = rademacher_tail_rational(n, x);
            if (b == 0.0) {
                if (a != 0.0) rational_ok = false;
                continue;
            }
            const double rel = std::abs(a - b) / b;
            worst = std::max(worst, rel);
            if (rel > 1e-13) rational_ok = false;
        }
    add(out, "binomial.logsum_vs_rational_n_le_64", rational_ok,
        "worst rel = " + g(worst));

    bool bracket_ok = true;
    for (long n : {12L, 36L, 64L})
        for (double x : {0.5, 1.0, 2.0}) {
            const double ge = rademacher_tail_rational(n, x, false);
            const double gt = rademacher_tail_rational(n, x, true);
            const double v = 0.5 * (n + x * std::sqrt(static_cast<double>(n)));
            const double r = std::nearbyint(v);
            double atom = 0.0;
            if (std::abs(v - r) <= 1e-9 * std::max(1.0, v))
                atom = rademacher_tail_rational(n, x, false) -
                       rademacher_tail_rational(
                           n, (2.0 * r + 2.0 - n) / std::sqrt(static_cast<double>(n)) -
                                  1e-12,
                           false);
            if (std::abs((ge - gt) - atom) > 1e-15) bracket_ok = false;
        }
    add(out, "binomial.lattice_bracketing_exact", bracket_ok);

    bool cauchy_ok = true;
    for (double x : {0.1, 0.5, 0.9, 1.2}) {
        const double y = x / std::sqrt(2.0 - x * x);
        const double a = gaussian_selfnorm_tail(2, x).p;
        if (std::abs(a - cauchy_tail(y)) > 1e-12) cauchy_ok = false;
    }
    add(out, "t_integral.cauchy_closed_form", cauchy_ok);

    // Student mapping: crude MC within 4 SE over a 5 x 5 grid
    bool mc_ok = true;
    double worst_z = 0.0;
    int idx = 0;
    for (long n : {10L, 20L, 50L, 100L, 200L})
        for (double x : {0.5, 1.0, 1.5, 2.0, 2.5}) {
            const auto coh = CohortSpec::iid(DistributionSpec::normal(1.0), n);
            const ExactTail mc = crude_mc_tail(coh, x, 50000, seed + idx++, 32);
            const ExactTail ti = gaussian_selfnorm_tail(n, x);
            const double z = std::abs(mc.p - ti.p) / std::max(mc.abs_err, 1e-12);
            worst_z = std::max(worst_z, z);
            if (z > 4.0) mc_ok = false;
        }
    add(out, "t_integral.student_mapping_mc_4se_5x5", mc_ok,
        "worst |z| = " + g(worst_z));

    const CramerSeries rad = cramer_series(DistributionSpec::rademacher());
    add(out, "cramer.rademacher",
        rad.g2 == 1.0 && rad.g3 == 0.0 && rad.g4 == -2.0 && rad.g5 == 0.0 &&
            rad.a0 == 0.0 && std::abs(rad.a1 + 1.0 / 12.0) < 1e-15 && rad.a2 == 0.0);
    const CramerSeries nrm = cramer_series(DistributionSpec::normal(1.0));
    add(out, "cramer.normal_zero_coeffs",
        nrm.g3 == 0.0 && nrm.g4 == 0.0 && nrm.g5 == 0.0 && nrm.a0 == 0.0 &&
            nrm.a1 == 0.0 && nrm.a2 == 0.0);
    const CramerSeries tp = cramer_series(DistributionSpec::two_point(0.5, -1.0, 1.0));
    add(out, "cramer.twopoint_equals_rademacher",
        std::abs(tp.a1 - rad.a1) < 1e-15 && tp.a0 == rad.a0 && tp.a2 == rad.a2);

    bool cr_ok = true;
    for (long n : {100L, 1000L})
        for (double x : {2.0, 4.0}) {
            const double r = cramer_ratio(DistributionSpec::rademacher(), n, x);
            const double want = std::exp(-std::pow(x, 4) / (12.0 * n));
            if (std::abs(r - want) > 1e-14 * want) cr_ok = false;
        }
    add(out, "cramer.rademacher_ratio_closed_form", cr_ok);

    // Taylor control of the exact log tail-ratio against the quartic
    // expansion; C fitted on this grid and frozen at 0.56
    const double kFrozenC = 0.56;
    bool taylor_ok = true;
    double worst_c = 0.0;
    const std::vector<std::pair<long, double>> grid = {
        {2500, 10.0}, {2500, 13.0}, {2500, 15.0},  {10000, 14.0}, {10000, 20.0},
        {10000, 25.0}, {40000, 20.0}, {40000, 30.0}, {40000, 38.0}};
    for (const auto& [n, x] : grid) {
        const ExactTail ex = gaussian_selfnorm_tail(n, x);
        const double lr = std::log(ex.p) - log_normal_tail(x);
        const double nx = static_cast<double>(n) - x * x;
        const double closed = x * x / nx -
                              static_cast<double>(n) * std::pow(x, 4) / (4.0 * nx * nx) -
                              std::pow(x, 4) / (2.0 * nx * nx);
        const double c = std::abs(lr - closed) / (std::pow(x, 6) / (static_cast<double>(n) * n));
        worst_c = std::max(worst_c, c);
        if (c > kFrozenC) taylor_ok = false;
    }
    add(out, "t_integral.taylor_control_frozen_C", taylor_ok,
        "max C = " + g(worst_c) + " <= 0.56");
    return out;
}

inline std::vector<CheckResult> verify_tilt(std::uint64_t seed = 4242) {
    using namespace verify_detail;
    std::vector<CheckResult> out;
    CounterRng rng(seed);

    bool xi_ok = true;
    for (int i = 0; i < 1000000; ++i) {
        const double b = 5.0 * rng.uniform();
        const double s = 20.0 * rng.uniform() - 10.0;
        const double u = b * s;
        if (2.0 * u - u * u > 1.0) xi_ok = false;
    }
    add(out, "tilt.xi_le_one_1e6", xi_ok);

    bool norm_ok = true;
    for (const auto& d : standard_pool())
        for (double b : {0.02, 0.1, 0.5, 1.0, 2.0}) {
            const double e0 = xi_exp_moments(d, b).e0;
            if (!(e0 > 0.0 && e0 <= 1.6487212707001282 * (1.0 + 1e-12)))
                norm_ok = false;
        }
    add(out, "tilt.normalizer_bracket", norm_ok);

    bool sig_ok = true;
    for (double b : {0.1, 0.37, 0.9}) {
        const auto atoms = TiltedLaw::make(DistributionSpec::rademacher(), b).atoms();
        const double want = 1.0 / (1.0 + std::exp(-2.0 * b));
        if (std::abs(atoms[1].second - want) > 1e-14) sig_ok = false;
    }
    add(out, "tilt.rademacher_reweight_sigmoid", sig_ok);

    bool enum_ok = true;
    double worst_rel = 0.0;
    for (long n : {8L, 12L, 16L}) {
        const double x = 1.5;
        const double e = conjugate_enumeration(n, x);
        const double want = rademacher_tail(n, x).p;
        const double rel = std::abs(e - want) / want;
        worst_rel = std::max(worst_rel, rel);
        if (rel > 1e-12) enum_ok = false;
    }
    add(out, "tilt.enumeration_unbiasedness_n8_12_16", enum_ok,
        "worst rel = " + g(worst_rel));

    {
        const auto coh = CohortSpec::iid(DistributionSpec::rademacher(), 100);
        const TiltedEstimate est = conjugate_estimate(coh, 3.0, 20000, seed);
        const double want = rademacher_tail(100, 3.0).p;
        const double z = std::abs(est.p_hat - want) / est.se;
        add(out, "tilt.conjugate_vs_binomial_3se", z <= 3.0, "|z| = " + g(z));
        const bool cert_ok = std::abs(est.p_hat - est.analytic_surrogate) <=
                             3.0 * est.se + est.rn_certificate;
        add(out, "tilt.certificate_soundness", cert_ok);
    }
    {
        const auto coh = CohortSpec::iid(DistributionSpec::normal(1.0), 100);
        const TiltedEstimate lb = lower_bound_tail(coh, 2.0, 40000, seed + 9);
        const double truth = gaussian_selfnorm_tail(100, 2.0).p;
        add(out, "tilt.lower_bound_gaussian",
            lb.p_hat <= truth + 3.0 * lb.se,
            "bound " + g(lb.p_hat) + " vs tail " + g(truth));
        const bool cert_ok = std::abs(lb.p_hat - lb.analytic_surrogate) <=
                             3.0 * lb.se + lb.rn_certificate;
        add(out, "tilt.certificate_soundness_gaussian", cert_ok);
    }

    // small-b limits of the tilted mean and variance (trend over halvings)
    {
        bool trend_ok = true;
        double prev_m = 0.0, prev_s = 0.0;
        bool first = true;
        for (double b : {0.2, 0.1, 0.05, 0.025}) {
            const long n = std::lround(std::pow(3.0 / b, 2));
            const TiltStats st =
                tilt_stats(CohortSpec::iid(DistributionSpec::rademacher(), n), 3.0);
            const double dm = std::abs(st.m_n - 9.0);
            const double ds = std::abs(st.sigma_n2 - 36.0);
            if (!first && !(prev_m / dm >= 1.5 && prev_s / ds >= 1.5)) trend_ok = false;
            prev_m = dm;
            prev_s = ds;
            first = false;
        }
        add(out, "tilt.small_b_limits_trend", trend_ok);
    }

    {
        const auto rep = decomposition_bounds(
            CohortSpec::iid(DistributionSpec::rademacher(), 10000), 6.0, 0.0);
        add(out, "tilt.decomposition_piece2_small", rep.i2.ratio_to_main < 0.01,
            "I2/I1 = " + g(rep.i2.ratio_to_main));
        add(out, "tilt.decomposition_explicit_i2_vacuous_reported",
            rep.i2.vacuous_explicit && !rep.i2.vacuous_interval);
        // pieces 3/4 only drop below the main term deep in the range: the
        // eps x term must beat the log(sqrt(2 pi) x) prefactor gap
        const auto far = decomposition_bounds(
            CohortSpec::iid(DistributionSpec::rademacher(), 1000000000000000L),
            1600.0, 0.0);
        add(out, "tilt.decomposition_pieces34_eventually_small",
            far.i3.ratio_to_main < 1.0 && far.i4.ratio_to_main < 1.0,
            "I3/I1 = " + g(far.i3.ratio_to_main) + ", I4/I1 = " + g(far.i4.ratio_to_main));
        bool guard_ok = false;
        try {
            decomposition_bounds(CohortSpec::iid(DistributionSpec::rademacher(), 100),
                                 1.0, 0.0);
        } catch (const DomainError&) {
            guard_ok = true;
        }
        add(out, "tilt.decomposition_domain_guard", guard_ok);
    }
    return out;
}

inline nlohmann::json verify_report(const std::string& suite) {
    std::vector<std::pair<std::string, std::vector<CheckResult>>> suites;
    if (suite == "delta" || suite == "all") suites.emplace_back("delta", verify_delta());
    if (suite == "lemmas" || suite == "all")
        suites.emplace_back("lemmas", verify_lemmas());
    if (suite == "oracles" || suite == "all")
        suites.emplace_back("oracles", verify_oracles());
    if (suite == "tilt" || suite == "all") suites.emplace_back("tilt", verify_tilt());
    if (suites.empty())
        throw DomainError("unknown verify suite: " + suite +
                          " (expected lemmas|delta|oracles|tilt|all)");
    nlohmann::json rep;
    rep["suite"] = suite;
    int failures = 0;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [name, checks] : suites) {
        for (const auto& c : checks) {
            nlohmann::json j;
            j["suite"] = name;
            j["name"] = c.name;
            j["pass"] = c.pass;
            if (!c.detail.empty()) j["detail"] = c.detail;
            if (!c.pass) ++failures;
            arr.push_back(j);
        }
    }
    rep["checks"] = arr;
    rep["failures"] = failures;
    rep["pass"] = failures == 0;
    return rep;
}

} // namespace selfnorm
