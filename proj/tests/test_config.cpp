#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "selfnorm/config.hpp"
#include "selfnorm/experiment.hpp"

using namespace selfnorm;

namespace {

const char* kBaseConfig = R"(
# comment line
[cohort]
dist = {kind = "rademacher"}

[grid]
n = [16, 64]
x = [1.0, 2.0]

[run]
formulas = ["THM31", "THM32", "BE4"]
oracle = "BINOMIAL"

[mc]
seed = 3

[profile]
delta = 1.0
gamma = 0.0

[output]
path = "out.csv"
format = "csv"
)";

} // namespace

TEST_CASE("config parsing") {
    auto cfg = load_experiment(config::Document::parse(kBaseConfig));
    CHECK(cfg.n_grid == std::vector<long>{16, 64});
    CHECK(cfg.x_grid == std::vector<double>{1.0, 2.0});
    CHECK(cfg.formulas.size() == 3);
    CHECK(cfg.oracle == OracleChoice::BINOMIAL);
    CHECK(cfg.mc.seed == 3);
    CHECK(cfg.profile.delta == 1.0);
    CHECK(cfg.format == "csv");
    CHECK(cfg.dist.kind() == DistributionSpec::Kind::Rademacher);
}

TEST_CASE("config diagnostics carry line and field") {
    // missing grid
    try {
        load_experiment(config::Document::parse("[cohort]\ndist = {kind = \"rademacher\"}\n"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "grid.n");
    }
    // malformed number with line info
    try {
        config::Document::parse("[grid]\nn = [16]\nx = [oops]\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 3);
    }
    // empty grid rejected
    CHECK_THROWS_AS(
        load_experiment(config::Document::parse(
            "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = []\nx = [1.0]\n")),
        ConfigError);
    // unknown formula
    CHECK_THROWS_AS(
        load_experiment(config::Document::parse(
            "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = [4]\nx = [1.0]\n"
            "[run]\nformulas = [\"THM99\"]\noracle = \"BINOMIAL\"\n[mc]\nseed = 1\n")),
        ConfigError);
    // MC oracle without a seed
    CHECK_THROWS_AS(
        load_experiment(config::Document::parse(
            "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = [4]\nx = [1.0]\n"
            "[run]\noracle = \"CRUDE_MC\"\n")),
        ConfigError);
    // bad format
    CHECK_THROWS_AS(
        load_experiment(config::Document::parse(
            "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = [4]\nx = [1]\n"
            "[run]\noracle = \"BINOMIAL\"\n[output]\nformat = \"xml\"\n")),
        ConfigError);
    // unterminated string
    CHECK_THROWS_AS(config::Document::parse("a = \"oops\n"), ConfigError);
    // non-integer n
    CHECK_THROWS_AS(
        load_experiment(config::Document::parse(
            "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = [4.5]\nx = [1]\n")),
        ConfigError);
}

TEST_CASE("distribution tables parse") {
    auto doc = config::Document::parse(
        "[cohort]\n"
        "dist = {kind = \"twopoint\", p = 0.9, a = -0.3333333333333333, b = 3.0}\n"
        "[grid]\nn = [10]\nx = [1.0]\n[run]\noracle = \"NONE\"\n");
    auto cfg = load_experiment(doc);
    CHECK(cfg.dist.kind() == DistributionSpec::Kind::TwoPoint);
    CHECK(cfg.dist.raw_moment(3) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));

    // empirical member from a one-value-per-line file
    const char* path = "test_empirical_data.csv";
    {
        std::ofstream f(path);
        for (int i = 0; i < 64; ++i) f << ((i % 2 == 0) ? 1.0 : -1.0) << "\n";
    }
    auto doc2 = config::Document::parse(
        "[cohort]\ndist = {kind = \"empirical\", path = \"test_empirical_data.csv\"}\n"
        "[grid]\nn = [8]\nx = [1.0]\n[run]\noracle = \"NONE\"\n");
    auto cfg2 = load_experiment(doc2);
    CHECK(cfg2.dist.second_moment() == 1.0);
    std::remove(path);
}

TEST_CASE("explicit member lists") {
    auto cfg = load_experiment(config::Document::parse(
        "[cohort]\nmembers = [{kind = \"rademacher\"}, {kind = \"normal\", sigma = 2.0}]\n"
        "[grid]\nn = [2]\nx = [1.0]\n[run]\noracle = \"NONE\"\n"));
    auto coh = cfg.cohort_for(2);
    CHECK(coh.n() == 2);
    CHECK(coh.bn2() == doctest::Approx(5.0).epsilon(1e-14));
    CHECK_THROWS_AS(cfg.cohort_for(3), ConfigError); // grid n must match
}

TEST_CASE("x rule expands per n") {
    auto cfg = load_experiment(config::Document::parse(
        "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = [16, 256]\n"
        "x_rule = {c = 2.0, tau = 0.25}\n[run]\noracle = \"NONE\"\n"));
    CHECK(cfg.xs_for(16) == std::vector<double>{4.0});
    CHECK(cfg.xs_for(256) == std::vector<double>{8.0});
}

TEST_CASE("experiment runs are deterministic and rows well formed") {
    auto cfg = load_experiment(config::Document::parse(kBaseConfig));
    auto r1 = run_experiment(cfg);
    auto r2 = run_experiment(cfg);
    CHECK(r1.rendered == r2.rendered); // byte identical
    CHECK(r1.rows.size() == 4);
    CHECK(r1.rendered.substr(0, std::string(result_csv_header()).size()) ==
          result_csv_header());
    for (const auto& row : r1.rows) {
        CHECK(row.exact_method == "BINOMIAL_SUM");
        CHECK(row.exact_p.has_value());
        CHECK(row.thm31_ratio.has_value());
        CHECK_FALSE(row.thm34_ratio.has_value()); // not requested
        CHECK(row.be4_bound.has_value());
        CHECK_FALSE(row.be3_bound.has_value());
    }

    // tilted-MC rows are reproducible under a fixed seed as well
    auto mc_cfg = load_experiment(config::Document::parse(
        "[cohort]\ndist = {kind = \"twopoint\", p = 0.9, a = -0.3333333333333333, b = 3.0}\n"
        "[grid]\nn = [50]\nx = [2.0]\n[run]\noracle = \"TILTED_MC\"\n"
        "[mc]\nsamples = 20000\nseed = 12\n"));
    auto m1 = run_experiment(mc_cfg);
    auto m2 = run_experiment(mc_cfg);
    CHECK(m1.rendered == m2.rendered);
    CHECK(m1.rows[0].mc_se.has_value());
    CHECK(m1.rows[0].exact_method == "TILTED_MC");

    // a single-sample run has no standard error; it must surface as NA in
    // both formats, never as NaN or null
    mc_cfg.mc.samples = 1;
    auto one = run_experiment(mc_cfg);
    CHECK(one.rendered.find("nan") == std::string::npos);
    mc_cfg.format = "json";
    auto onej = run_experiment(mc_cfg);
    CHECK(onej.rendered.find("null") == std::string::npos);
    auto parsed = nlohmann::json::parse(onej.rendered);
    CHECK(parsed[0]["mc_se"] == "NA");
}

TEST_CASE("json round trip is lossless") {
    auto cfg = load_experiment(config::Document::parse(kBaseConfig));
    cfg.format = "json";
    auto res = run_experiment(cfg);
    auto arr = nlohmann::json::parse(res.rendered);
    REQUIRE(arr.size() == res.rows.size());
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        ResultRow rt = row_from_json(arr[i]);
        const ResultRow& orig = res.rows[i];
        CHECK(rt.n == orig.n);
        CHECK(rt.x == orig.x);
        CHECK(rt.b == orig.b);
        CHECK(rt.exact_p == orig.exact_p);
        CHECK(rt.normal_tail_p == orig.normal_tail_p);
        CHECK(rt.log_ratio_exact == orig.log_ratio_exact);
        CHECK(rt.delta_value == orig.delta_value);
        CHECK(rt.thm31_ratio == orig.thm31_ratio);
        CHECK(rt.thm32_ratio == orig.thm32_ratio);
        CHECK(rt.thm34_ratio == orig.thm34_ratio);
        CHECK(rt.be4_bound == orig.be4_bound);
        CHECK(rt.jsw_factor == orig.jsw_factor);
        CHECK(rt.tau == orig.tau);
        CHECK(rt.exact_method == orig.exact_method);
        CHECK(rt.thm31_regime == orig.thm31_regime);
    }
}

TEST_CASE("breakdown sweep emits the predicted plateau") {
    auto parse_last = [](const std::string& csv, double& c, long& n, double& r14,
                         double& pred, double& r15) {
        auto pos = csv.rfind('\n', csv.size() - 2);
        std::string last = csv.substr(pos + 1);
        double x14, x15;
        int sv;
        char dist[32];
        REQUIRE(std::sscanf(last.c_str(), "%d,%31[^,],%lf,%ld,%lf,%lf,%lf,%lf,%lf",
                            &sv, dist, &c, &n, &x14, &r14, &pred, &x15, &r15) == 9);
    };
    double c, r14, pred, r15;
    long n;

    // c = 0 degenerates to ratio 1 on both curves
    parse_last(sweep_breakdown("rademacher", {0.0}, {4096}), c, n, r14, pred, r15);
    CHECK(r14 == 1.0);
    CHECK(r15 == 1.0);
    CHECK(pred == 1.0);

    // c = 2: breakdown plateau at exp(-c^4/12), clearly below 1
    parse_last(sweep_breakdown("rademacher", {2.0}, {16384}), c, n, r14, pred, r15);
    CHECK(pred == doctest::Approx(std::exp(-16.0 / 12.0)).epsilon(1e-12));
    CHECK(std::abs(std::log(r14) - std::log(pred)) < 0.5);
    CHECK(r14 < 0.5);
    CHECK(r15 > r14); // the n^{1/5} curve sits closer to 1

    // c = 1: the n^{1/5} curve has converged into [0.9, 1.1]
    parse_last(sweep_breakdown("rademacher", {1.0}, {16384}), c, n, r14, pred, r15);
    CHECK(r15 > 0.9);
    CHECK(r15 < 1.1);

    parse_last(sweep_breakdown("normal", {1.0}, {10000}), c, n, r14, pred, r15);
    CHECK(pred == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
    CHECK(std::abs(std::log(r14) - std::log(pred)) < 0.05);
    CHECK(r15 > 0.9);
    CHECK(r15 < 1.1);
    CHECK_THROWS_AS(sweep_breakdown("poisson", {1.0}, {16}), DomainError);
}

TEST_CASE("strict hypothesis flag propagates") {
    // far outside every range: x = theta-violating for n = 16
    auto cfg = load_experiment(config::Document::parse(
        "[cohort]\ndist = {kind = \"rademacher\"}\n[grid]\nn = [16]\nx = [3.9]\n"
        "[run]\nformulas = [\"THM32\"]\noracle = \"BINOMIAL\"\n[mc]\nseed = 1\n"
        "[profile]\ndelta = 0.0\n"));
    auto res = run_experiment(cfg);
    CHECK(res.any_hypothesis_violated);
    CHECK(res.rows[0].thm32_regime == "OUTSIDE");
}
