// selfnorm: batch front end for self-normalized tail-probability experiments.
//
// Subcommands:
//   run             sweep a (distribution, n, x) grid from a config file
//   verify          run the library verification suites, JSON report
//   sweep-breakdown breakdown/convergence curves along x = c n^{1/4}, c n^{1/5}
//   moments         truncated moment functionals of one distribution
//   oracle          exact/MC tail for one (distribution, n, x)

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfnorm/config.hpp"
#include "selfnorm/experiment.hpp"
#include "selfnorm/verify.hpp"

using namespace selfnorm;

namespace {

int cmd_run(const std::string& config_path, bool strict,
            const std::string& out_override, const std::string& format_override,
            std::uint64_t seed_override, bool have_seed) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment(config::Document::parse_file(config_path));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s", e.what());
        if (e.line > 0) std::fprintf(stderr, " (line %d)", e.line);
        if (!e.field.empty()) std::fprintf(stderr, " [field %s]", e.field.c_str());
        std::fprintf(stderr, "\n");
        return 1;
    }
    if (!out_override.empty()) cfg.out_path = out_override;
    if (!format_override.empty()) cfg.format = format_override;
    if (have_seed) cfg.mc.seed = seed_override;

    RunResult res;
    try {
        res = run_experiment(cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return 1;
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "cannot write %s\n", cfg.out_path.c_str());
        return 1;
    }
    out << res.rendered;
    out.close();
    std::printf("wrote %zu rows to %s (%s)\n", res.rows.size(), cfg.out_path.c_str(),
                cfg.format.c_str());
    long violated = 0;
    for (const auto& r : res.rows)
        if (r.hypothesis_violated) ++violated;
    if (violated > 0)
        std::printf("hypothesis violated on %ld of %zu rows\n", violated,
                    res.rows.size());
    if (strict && res.any_hypothesis_violated) return 2;
    return 0;
}

DistributionSpec dist_from_flags(const std::string& kind, double sigma,
                                 double halfwidth, double p, double a, double b,
                                 const std::string& path) {
    if (kind == "normal") return DistributionSpec::normal(sigma);
    if (kind == "rademacher") return DistributionSpec::rademacher();
    if (kind == "uniform") return DistributionSpec::centered_uniform(halfwidth);
    if (kind == "twopoint") return DistributionSpec::two_point(p, a, b);
    if (kind == "empirical") {
        std::ifstream in(path);
        if (!in) throw DomainError("cannot open " + path);
        std::vector<double> data;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) data.push_back(std::stod(line));
        return DistributionSpec::empirical(std::move(data));
    }
    throw DomainError("unknown --kind " + kind);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-normalized moderate-deviation toolkit"};
    app.require_subcommand(1);

    // run
    std::string config_path, out_override, format_override;
    bool strict = false;
    std::uint64_t seed_override = 0;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "config file")->required();
    run->add_flag("--strict", strict, "exit 2 if any hypothesis check fails");
    run->add_option("--out", out_override, "output path override");
    run->add_option("--format", format_override, "csv or json")
        ->check(CLI::IsMember({"csv", "json", ""}));
    auto* seed_opt = run->add_option("--seed", seed_override, "MC seed override");

    // verify
    std::string suite = "all";
    std::string verify_out;
    auto* verify = app.add_subcommand("verify", "run verification suites");
    verify->add_option("suite", suite, "lemmas|delta|oracles|tilt|all");
    verify->add_option("--out", verify_out, "write JSON report to file");

    // sweep-breakdown
    std::string sw_dist = "rademacher";
    std::vector<double> sw_c{1.0, 2.0};
    std::vector<long> sw_n{256, 1024, 4096, 16384};
    std::string sw_out;
    auto* sweep = app.add_subcommand("sweep-breakdown",
                                     "breakdown curves along x = c n^{1/4}");
    sweep->add_option("--dist", sw_dist, "rademacher or normal")
        ->check(CLI::IsMember({"rademacher", "normal"}));
    sweep->add_option("--c", sw_c, "c values")->delimiter(',');
    sweep->add_option("--n", sw_n, "n values")->delimiter(',');
    sweep->add_option("--out", sw_out, "output CSV path (default stdout)");

    // moments
    std::string m_kind = "rademacher", m_path;
    double m_sigma = 1.0, m_half = 1.0, m_p = 0.5, m_a = -1.0, m_b2 = 1.0;
    double m_scale = 0.5;
    auto* moments = app.add_subcommand("moments", "truncated moments at scale b");
    moments->add_option("--kind", m_kind, "normal|rademacher|uniform|twopoint|empirical");
    moments->add_option("--sigma", m_sigma, "normal sigma");
    moments->add_option("--halfwidth", m_half, "uniform halfwidth");
    moments->add_option("--p", m_p, "twopoint p");
    moments->add_option("--a", m_a, "twopoint atom a");
    moments->add_option("--b", m_b2, "twopoint atom b");
    moments->add_option("--path", m_path, "empirical csv (one value per line)");
    moments->add_option("--scale", m_scale, "tilting scale b")->required();

    // oracle
    std::string o_kind = "rademacher", o_path, o_method = "auto";
    double o_sigma = 1.0, o_half = 1.0, o_p = 0.5, o_a = -1.0, o_b2 = 1.0;
    long o_n = 100;
    double o_x = 2.0;
    long o_samples = 100000;
    std::uint64_t o_seed = 1;
    auto* oracle = app.add_subcommand("oracle", "tail probability for one point");
    oracle->add_option("--kind", o_kind, "distribution kind");
    oracle->add_option("--sigma", o_sigma, "normal sigma");
    oracle->add_option("--halfwidth", o_half, "uniform halfwidth");
    oracle->add_option("--p", o_p, "twopoint p");
    oracle->add_option("--a", o_a, "twopoint atom a");
    oracle->add_option("--b", o_b2, "twopoint atom b");
    oracle->add_option("--path", o_path, "empirical csv");
    oracle->add_option("--n", o_n, "cohort size")->required();
    oracle->add_option("--x", o_x, "threshold x")->required();
    oracle->add_option("--method", o_method,
                       "auto|binomial|t-integral|crude-mc|tilted-mc");
    oracle->add_option("--samples", o_samples, "MC samples");
    oracle->add_option("--seed", o_seed, "MC seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(config_path, strict, out_override, format_override,
                           seed_override, seed_opt->count() > 0);

        if (*verify) {
            const nlohmann::json rep = verify_report(suite);
            const std::string text = rep.dump(2) + "\n";
            if (!verify_out.empty()) {
                std::ofstream out(verify_out, std::ios::binary);
                out << text;
            }
            std::fputs(text.c_str(), stdout);
            return rep["pass"].get<bool>() ? 0 : 3;
        }

        if (*sweep) {
            const std::string csv = sweep_breakdown(sw_dist, sw_c, sw_n);
            if (!sw_out.empty()) {
                std::ofstream out(sw_out, std::ios::binary);
                out << csv;
            } else {
                std::fputs(csv.c_str(), stdout);
            }
            return 0;
        }

        if (*moments) {
            const DistributionSpec d =
                dist_from_flags(m_kind, m_sigma, m_half, m_p, m_a, m_b2, m_path);
            const TruncatedMomentSet t = d.moments(m_scale);
            std::printf("b,m2,m3,a3,m4le,a3gt,a5le,m3le,m2le\n");
            std::printf("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                        t.b, t.m2, t.m3, t.a3, t.m4le, t.a3gt, t.a5le, t.m3le, t.m2le);
            if (d.kind() == DistributionSpec::Kind::EmpiricalSample)
                std::printf("in_window_count,%ld\n", d.window_count(m_scale));
            if (d.edge_warning())
                std::fprintf(stderr, "warning: density table edge exceeds 1e-12\n");
            return 0;
        }

        if (*oracle) {
            const DistributionSpec d =
                dist_from_flags(o_kind, o_sigma, o_half, o_p, o_a, o_b2, o_path);
            const CohortSpec coh = CohortSpec::iid(d, o_n);
            ExactTail t;
            if (o_method == "binomial" ||
                (o_method == "auto" && d.kind() == DistributionSpec::Kind::Rademacher)) {
                t = rademacher_tail(o_n, o_x);
            } else if (o_method == "t-integral" ||
                       (o_method == "auto" &&
                        d.kind() == DistributionSpec::Kind::Normal)) {
                t = gaussian_selfnorm_tail(o_n, o_x);
            } else if (o_method == "crude-mc") {
                t = crude_mc_tail(coh, o_x, o_samples, o_seed);
            } else {
                const TiltedEstimate te = conjugate_estimate(coh, o_x, o_samples, o_seed);
                t = {te.p_hat, OracleMethod::CRUDE_MC, te.se};
            }
            std::printf("p,method,abs_err\n%.17g,%s,%.17g\n", t.p, to_string(t.method),
                        t.abs_err);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
