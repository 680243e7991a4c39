#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfnorm/config.hpp"
#include "selfnorm/delta.hpp"
#include "selfnorm/distribution.hpp"
#include "selfnorm/oracles.hpp"
#include "selfnorm/tail.hpp"
#include "selfnorm/tilt.hpp"

namespace selfnorm {

inline constexpr int kSchemaVersion = 1;

/// One grid point of an experiment sweep.  Absent quantities stay
/// disengaged and serialize as "NA"; the column set never varies.
struct ResultRow {
    long n = 0;
    double x = 0.0;
    double b = 0.0;
    std::optional<double> exact_p;
    std::string exact_method = "NA";
    std::optional<double> exact_err;
    std::optional<double> mc_se;
    double normal_tail_p = 0.0;
    std::optional<double> log_ratio_exact;
    std::optional<double> delta_value;
    std::optional<double> delta_bound;
    std::optional<double> thm31_ratio, thm31_log_ratio, thm31_margin;
    std::string thm31_regime = "NA";
    std::optional<double> thm32_ratio, thm32_log_ratio, thm32_margin;
    std::string thm32_regime = "NA";
    std::optional<double> thm34_ratio, thm34_log_ratio, thm34_margin;
    std::string thm34_regime = "NA";
    std::optional<double> be3_bound, be3_envelope;
    std::optional<double> be4_bound, be4_envelope;
    std::optional<double> jsw_factor;
    double tau = 0.0;
    std::string tau_case;
    bool hypothesis_violated = false;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string opt17(const std::optional<double>& v) {
    // columns are finite or explicitly "NA"; an undefined SE arrives as NaN
    return v && std::isfinite(*v) ? fmt17(*v) : std::string("NA");
}

inline std::uint64_t row_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

inline const char* result_csv_header() {
    return "schema_version,n,x,b,exact_p,exact_method,exact_err,mc_se,"
           "normal_tail,log_ratio_exact,delta_value,delta_bound,"
           "thm31_ratio,thm31_log_ratio,thm31_regime,thm31_margin,"
           "thm32_ratio,thm32_log_ratio,thm32_regime,thm32_margin,"
           "thm34_ratio,thm34_log_ratio,thm34_regime,thm34_margin,"
           "be3_bound,be3_envelope,be4_bound,be4_envelope,jsw_factor,"
           "tau,tau_case";
}

inline std::string to_csv(const ResultRow& r) {
    using detail::fmt17;
    using detail::opt17;
    std::ostringstream os;
    os << kSchemaVersion << ',' << r.n << ',' << fmt17(r.x) << ',' << fmt17(r.b)
       << ',' << opt17(r.exact_p) << ',' << r.exact_method << ','
       << opt17(r.exact_err) << ',' << opt17(r.mc_se) << ','
       << fmt17(r.normal_tail_p) << ',' << opt17(r.log_ratio_exact) << ','
       << opt17(r.delta_value) << ',' << opt17(r.delta_bound) << ','
       << opt17(r.thm31_ratio) << ',' << opt17(r.thm31_log_ratio) << ','
       << r.thm31_regime << ',' << opt17(r.thm31_margin) << ','
       << opt17(r.thm32_ratio) << ',' << opt17(r.thm32_log_ratio) << ','
       << r.thm32_regime << ',' << opt17(r.thm32_margin) << ','
       << opt17(r.thm34_ratio) << ',' << opt17(r.thm34_log_ratio) << ','
       << r.thm34_regime << ',' << opt17(r.thm34_margin) << ','
       << opt17(r.be3_bound) << ',' << opt17(r.be3_envelope) << ','
       << opt17(r.be4_bound) << ',' << opt17(r.be4_envelope) << ','
       << opt17(r.jsw_factor) << ',' << fmt17(r.tau) << ',' << r.tau_case;
    return os.str();
}

inline nlohmann::json to_json(const ResultRow& r) {
    nlohmann::json j;
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v && std::isfinite(*v)) j[k] = *v;
        else j[k] = "NA";
    };
    j["schema_version"] = kSchemaVersion;
    j["n"] = r.n;
    j["x"] = r.x;
    j["b"] = r.b;
    put("exact_p", r.exact_p);
    j["exact_method"] = r.exact_method;
    put("exact_err", r.exact_err);
    put("mc_se", r.mc_se);
    j["normal_tail"] = r.normal_tail_p;
    put("log_ratio_exact", r.log_ratio_exact);
    put("delta_value", r.delta_value);
    put("delta_bound", r.delta_bound);
    put("thm31_ratio", r.thm31_ratio);
    put("thm31_log_ratio", r.thm31_log_ratio);
    j["thm31_regime"] = r.thm31_regime;
    put("thm31_margin", r.thm31_margin);
    put("thm32_ratio", r.thm32_ratio);
    put("thm32_log_ratio", r.thm32_log_ratio);
    j["thm32_regime"] = r.thm32_regime;
    put("thm32_margin", r.thm32_margin);
    put("thm34_ratio", r.thm34_ratio);
    put("thm34_log_ratio", r.thm34_log_ratio);
    j["thm34_regime"] = r.thm34_regime;
    put("thm34_margin", r.thm34_margin);
    put("be3_bound", r.be3_bound);
    put("be3_envelope", r.be3_envelope);
    put("be4_bound", r.be4_bound);
    put("be4_envelope", r.be4_envelope);
    put("jsw_factor", r.jsw_factor);
    j["tau"] = r.tau;
    j["tau_case"] = r.tau_case;
    return j;
}

inline ResultRow row_from_json(const nlohmann::json& j) {
    ResultRow r;
    auto opt = [&](const char* k) -> std::optional<double> {
        if (j.at(k).is_string()) return std::nullopt;
        return j.at(k).get<double>();
    };
    r.n = j.at("n").get<long>();
    r.x = j.at("x").get<double>();
    r.b = j.at("b").get<double>();
    r.exact_p = opt("exact_p");
    r.exact_method = j.at("exact_method").get<std::string>();
    r.exact_err = opt("exact_err");
    r.mc_se = opt("mc_se");
    r.normal_tail_p = j.at("normal_tail").get<double>();
    r.log_ratio_exact = opt("log_ratio_exact");
    r.delta_value = opt("delta_value");
    r.delta_bound = opt("delta_bound");
    r.thm31_ratio = opt("thm31_ratio");
    r.thm31_log_ratio = opt("thm31_log_ratio");
    r.thm31_regime = j.at("thm31_regime").get<std::string>();
    r.thm31_margin = opt("thm31_margin");
    r.thm32_ratio = opt("thm32_ratio");
    r.thm32_log_ratio = opt("thm32_log_ratio");
    r.thm32_regime = j.at("thm32_regime").get<std::string>();
    r.thm32_margin = opt("thm32_margin");
    r.thm34_ratio = opt("thm34_ratio");
    r.thm34_log_ratio = opt("thm34_log_ratio");
    r.thm34_regime = j.at("thm34_regime").get<std::string>();
    r.thm34_margin = opt("thm34_margin");
    r.be3_bound = opt("be3_bound");
    r.be3_envelope = opt("be3_envelope");
    r.be4_bound = opt("be4_bound");
    r.be4_envelope = opt("be4_envelope");
    r.jsw_factor = opt("jsw_factor");
    r.tau = j.at("tau").get<double>();
    r.tau_case = j.at("tau_case").get<std::string>();
    return r;
}

struct OracleRun {
    ExactTail tail;
    std::string label;
    bool monte_carlo = false;
};

/// Computes the oracle value for one grid point per the config's choice.
inline std::optional<OracleRun> run_oracle(const ExperimentConfig& cfg,
                                           const CohortSpec& cohort, double x,
                                           std::uint64_t row_seed) {
    OracleChoice oc = cfg.oracle;
    if (oc == OracleChoice::NONE) return std::nullopt;
    if (oc == OracleChoice::AUTO) {
        if (cohort.all_same_kind(DistributionSpec::Kind::Rademacher))
            oc = OracleChoice::BINOMIAL;
        else if (cohort.all_same_kind(DistributionSpec::Kind::Normal) &&
                 x * x < static_cast<double>(cohort.n()))
            oc = OracleChoice::T_INTEGRAL;
        else
            oc = OracleChoice::TILTED_MC;
    }
    switch (oc) {
    case OracleChoice::BINOMIAL: {
        ExactTail t = rademacher_tail(cohort.n(), x);
        return OracleRun{t, to_string(t.method), false};
    }
    case OracleChoice::T_INTEGRAL: {
        ExactTail t = gaussian_selfnorm_tail(cohort.n(), x);
        return OracleRun{t, to_string(t.method), false};
    }
    case OracleChoice::CRUDE_MC: {
        ExactTail t = crude_mc_tail(cohort, x, cfg.mc.samples, row_seed, cfg.mc.blocks);
        return OracleRun{t, to_string(t.method), true};
    }
    case OracleChoice::TILTED_MC: {
        TiltedEstimate te =
            conjugate_estimate(cohort, x, cfg.mc.samples, row_seed, cfg.mc.blocks);
        return OracleRun{ExactTail{te.p_hat, OracleMethod::CRUDE_MC, te.se},
                         "TILTED_MC", true};
    }
    default:
        return std::nullopt;
    }
}

inline ResultRow compute_row(const ExperimentConfig& cfg, const CohortSpec& cohort,
                             double x, std::uint64_t row_seed) {
    ResultRow r;
    const TailPoint pt = tail_point(cohort, x);
    r.n = pt.n;
    r.x = x;
    r.b = pt.b;
    r.normal_tail_p = normal_tail(x);
    const TauResult tr = tau_range(cfg.profile);
    r.tau = tr.tau;
    r.tau_case = tr.case_label;

    if (auto ex = run_oracle(cfg, cohort, x, row_seed)) {
        r.exact_p = ex->tail.p;
        r.exact_method = ex->label;
        r.exact_err = ex->tail.abs_err;
        if (ex->monte_carlo) r.mc_se = ex->tail.abs_err;
        if (ex->tail.p > 0.0)
            r.log_ratio_exact = std::log(ex->tail.p) - log_normal_tail(x);
    }

    const CohortMoments cm = cohort_moments(cohort, x);
    const DeltaValue dv = delta_n(cm, DeltaCoefficients::main(0.0));
    r.delta_value = dv.value;
    r.delta_bound = dv.bound + cfg.profile.gamma_interval * dv.gamma_slack;

    if (cfg.wants("THM31")) {
        const TailApproximation a = ratio_thm31(pt, dv, cfg.profile);
        r.thm31_ratio = a.ratio;
        r.thm31_log_ratio = dv.value;
        r.thm31_regime = to_string(a.regime.regime);
        r.thm31_margin = a.regime.margin;
        r.hypothesis_violated |= a.regime.hypothesis_violated;
    }
    if (cfg.wants("THM32")) {
        const TailApproximation a = ratio_thm32(pt, cohort, cfg.profile);
        r.thm32_ratio = a.ratio;
        r.thm32_log_ratio = std::log(a.ratio);
        r.thm32_regime = to_string(a.regime.regime);
        r.thm32_margin = a.regime.margin;
        r.hypothesis_violated |= a.regime.hypothesis_violated;
    }
    if (cfg.wants("THM34") && cfg.profile.epsilon && cfg.profile.rho) {
        const TailApproximation a = ratio_thm34(pt, cohort, cfg.profile);
        r.thm34_ratio = a.ratio;
        r.thm34_log_ratio = std::log(a.ratio);
        r.thm34_regime = to_string(a.regime.regime);
        r.thm34_margin = a.regime.margin;
        r.hypothesis_violated |= a.regime.hypothesis_violated;
    }
    if (cfg.wants("BE3")) {
        const BerryEsseenBound be = be_bound_third(pt, cohort, cfg.profile);
        r.be3_bound = be.leading;
        r.be3_envelope = be.envelope;
    }
    if (cfg.wants("BE4")) {
        const BerryEsseenBound be = be_bound_fourth(pt, cohort);
        r.be4_bound = be.leading;
        r.be4_envelope = be.envelope;
    }
    if (cfg.wants("JSW") && cfg.profile.delta > 0.0)
        r.jsw_factor = jsw_error_factor(pt, cohort, cfg.profile.delta);
    return r;
}

struct RunResult {
    std::vector<ResultRow> rows;
    bool any_hypothesis_violated = false;
    std::string rendered; ///< full output file body
};

/// Executes the grid in index order; one ResultRow per (n, x) point.  Output
/// is byte-deterministic for a fixed config and seed.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
    RunResult out;
    const std::uint64_t seed = cfg.mc.seed.value_or(0);
    std::size_t index = 0;
    for (long n : cfg.n_grid) {
        const CohortSpec cohort = cfg.cohort_for(n);
        for (double x : cfg.xs_for(n)) {
            ResultRow r = compute_row(cfg, cohort, x, detail::row_seed(seed, index));
            out.any_hypothesis_violated |= r.hypothesis_violated;
            out.rows.push_back(std::move(r));
            ++index;
        }
    }
    if (cfg.format == "csv") {
        std::ostringstream os;
        os << result_csv_header() << '\n';
        for (const auto& r : out.rows) os << to_csv(r) << '\n';
        out.rendered = os.str();
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : out.rows) arr.push_back(to_json(r));
        out.rendered = arr.dump(2);
        out.rendered.push_back('\n');
    }
    return out;
}

/// Sweep along x = c n^{1/4} (breakdown curve) and x = c n^{1/5}
/// (convergence curve) for the two oracle-backed laws; emits the exact ratio
/// against the -x^4/(kappa n) prediction, kappa = 12 (rademacher) or 4
/// (normal).
inline std::string sweep_breakdown(const std::string& dist,
                                   const std::vector<double>& cs,
                                   const std::vector<long>& ns) {
    const bool rademacher = dist == "rademacher";
    if (!rademacher && dist != "normal")
        throw DomainError("sweep_breakdown: dist must be rademacher or normal");
    const double kappa = rademacher ? 12.0 : 4.0;
    std::ostringstream os;
    os << "schema_version,dist,c,n,x_quarter,exact_ratio_quarter,"
          "predicted_ratio_quarter,x_fifth,exact_ratio_fifth\n";
    auto oracle = [&](long n, double x) {
        return rademacher ? rademacher_tail(n, x) : gaussian_selfnorm_tail(n, x);
    };
    for (double c : cs) {
        for (long n : ns) {
            const double x14 = c * std::pow(static_cast<double>(n), 0.25);
            const double x15 = c * std::pow(static_cast<double>(n), 0.2);
            const double r14 =
                c == 0.0 ? 1.0
                         : std::exp(std::log(oracle(n, x14).p) - log_normal_tail(x14));
            const double r15 =
                c == 0.0 ? 1.0
                         : std::exp(std::log(oracle(n, x15).p) - log_normal_tail(x15));
            const double pred = std::exp(-std::pow(c, 4) / kappa);
            os << kSchemaVersion << ',' << dist << ',' << detail::fmt17(c) << ','
               << n << ',' << detail::fmt17(x14) << ',' << detail::fmt17(r14) << ','
               << detail::fmt17(pred) << ',' << detail::fmt17(x15) << ','
               << detail::fmt17(r15) << '\n';
        }
    }
    return os.str();
}

} // namespace selfnorm
