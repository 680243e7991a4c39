#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "selfnorm/distribution.hpp"
#include "selfnorm/errors.hpp"
#include "selfnorm/tail.hpp"

namespace selfnorm {

/// Minimal flat declarative config: [section] headers, `key = value` lines,
/// values are strings, numbers, booleans, arrays, or one-level inline tables
/// `{k = v, ...}`.  See configs/SCHEMA.md for the experiment schema.
namespace config {

struct Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

struct Value {
    std::variant<std::string, double, bool, Array, Table> v;
    int line = 0;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<Array>(v); }
    bool is_table() const { return std::holds_alternative<Table>(v); }

    const std::string& str(const std::string& field) const {
        if (!is_string()) throw ConfigError("expected string", line, field);
        return std::get<std::string>(v);
    }
    double num(const std::string& field) const {
        if (!is_number()) throw ConfigError("expected number", line, field);
        return std::get<double>(v);
    }
    const Array& arr(const std::string& field) const {
        if (!is_array()) throw ConfigError("expected array", line, field);
        return std::get<Array>(v);
    }
    const Table& tab(const std::string& field) const {
        if (!is_table()) throw ConfigError("expected inline table", line, field);
        return std::get<Table>(v);
    }
};

class Document {
public:
    static Document parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path, 0);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static Document parse(const std::string& text) {
        Document doc;
        std::string section;
        int lineno = 0;
        std::istringstream in(text);
        std::string raw;
        while (std::getline(in, raw)) {
            ++lineno;
            std::string line = strip_comment(raw);
            trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("malformed section header", lineno);
                section = line.substr(1, line.size() - 2);
                trim(section);
                if (section.empty())
                    throw ConfigError("empty section name", lineno);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected key = value", lineno);
            std::string key = line.substr(0, eq);
            std::string rest = line.substr(eq + 1);
            trim(key);
            trim(rest);
            if (key.empty()) throw ConfigError("empty key", lineno);
            std::size_t pos = 0;
            Value val = parse_value(rest, pos, lineno, key);
            skip_ws(rest, pos);
            if (pos != rest.size())
                throw ConfigError("trailing characters after value", lineno, key);
            const std::string full = section.empty() ? key : section + "." + key;
            doc.values_[full] = std::move(val);
        }
        return doc;
    }

    const Value* find(const std::string& key) const {
        auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }

    const Value& require(const std::string& key) const {
        const Value* v = find(key);
        if (!v) throw ConfigError("missing required field", 0, key);
        return *v;
    }

    const std::map<std::string, Value>& all() const { return values_; }

private:
    static void trim(std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& s) {
        bool in_str = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_str = !in_str;
            if (s[i] == '#' && !in_str) return s.substr(0, i);
        }
        return s;
    }

    static void skip_ws(const std::string& s, std::size_t& pos) {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }

    static Value parse_value(const std::string& s, std::size_t& pos, int lineno,
                             const std::string& field) {
        skip_ws(s, pos);
        if (pos >= s.size()) throw ConfigError("missing value", lineno, field);
        Value out;
        out.line = lineno;
        const char c = s[pos];
        if (c == '"') {
            std::string str;
            ++pos;
            while (pos < s.size() && s[pos] != '"') str.push_back(s[pos++]);
            if (pos >= s.size())
                throw ConfigError("unterminated string", lineno, field);
            ++pos;
            out.v = std::move(str);
            return out;
        }
        if (c == '[') {
            Array arr;
            ++pos;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == ']') {
                ++pos;
                out.v = std::move(arr);
                return out;
            }
            for (;;) {
                arr.push_back(parse_value(s, pos, lineno, field));
                skip_ws(s, pos);
                if (pos < s.size() && s[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (pos < s.size() && s[pos] == ']') {
                    ++pos;
                    break;
                }
                throw ConfigError("expected ',' or ']' in array", lineno, field);
            }
            out.v = std::move(arr);
            return out;
        }
        if (c == '{') {
            Table tab;
            ++pos;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == '}') {
                ++pos;
                out.v = std::move(tab);
                return out;
            }
            for (;;) {
                skip_ws(s, pos);
                std::string key;
                while (pos < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                        s[pos] == '_'))
                    key.push_back(s[pos++]);
                if (key.empty())
                    throw ConfigError("expected key in inline table", lineno, field);
                skip_ws(s, pos);
                if (pos >= s.size() || s[pos] != '=')
                    throw ConfigError("expected '=' in inline table", lineno, field);
                ++pos;
                tab[key] = parse_value(s, pos, lineno, field + "." + key);
                skip_ws(s, pos);
                if (pos < s.size() && s[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (pos < s.size() && s[pos] == '}') {
                    ++pos;
                    break;
                }
                throw ConfigError("expected ',' or '}' in inline table", lineno, field);
            }
            out.v = std::move(tab);
            return out;
        }
        // bare token: boolean or number
        std::string tok;
        while (pos < s.size() && s[pos] != ',' && s[pos] != ']' && s[pos] != '}' &&
               s[pos] != ' ' && s[pos] != '\t')
            tok.push_back(s[pos++]);
        if (tok == "true") {
            out.v = true;
            return out;
        }
        if (tok == "false") {
            out.v = false;
            return out;
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.v = d;
            return out;
        } catch (const std::exception&) {
            throw ConfigError("cannot parse value '" + tok + "'", lineno, field);
        }
    }

    std::map<std::string, Value> values_;
};

} // namespace config

/// A distribution parsed from an inline table {kind = "...", ...}.
inline DistributionSpec parse_distribution(const config::Table& t, int line,
                                           const std::string& field) {
    auto get = [&](const char* k) -> const config::Value& {
        auto it = t.find(k);
        if (it == t.end())
            throw ConfigError(std::string("distribution missing '") + k + "'", line,
                              field);
        return it->second;
    };
    auto it = t.find("kind");
    if (it == t.end()) throw ConfigError("distribution missing 'kind'", line, field);
    const std::string kind = it->second.str(field + ".kind");
    if (kind == "normal")
        return DistributionSpec::normal(get("sigma").num(field + ".sigma"));
    if (kind == "rademacher") return DistributionSpec::rademacher();
    if (kind == "twopoint")
        return DistributionSpec::two_point(get("p").num(field + ".p"),
                                           get("a").num(field + ".a"),
                                           get("b").num(field + ".b"));
    if (kind == "uniform")
        return DistributionSpec::centered_uniform(
            get("halfwidth").num(field + ".halfwidth"));
    if (kind == "empirical") {
        const std::string path = get("path").str(field + ".path");
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open empirical data file: " + path, line, field);
        std::vector<double> data;
        std::string lineb;
        int ln = 0;
        while (std::getline(in, lineb)) {
            ++ln;
            if (lineb.empty()) continue;
            try {
                data.push_back(std::stod(lineb));
            } catch (const std::exception&) {
                throw ConfigError("bad number in " + path + " line " +
                                      std::to_string(ln),
                                  line, field);
            }
        }
        return DistributionSpec::empirical(std::move(data));
    }
    if (kind == "table") {
        const auto& xs = get("x").arr(field + ".x");
        const auto& fs = get("f").arr(field + ".f");
        std::vector<double> xv, fv;
        for (const auto& v : xs) xv.push_back(v.num(field + ".x"));
        for (const auto& v : fs) fv.push_back(v.num(field + ".f"));
        return DistributionSpec::density_table(std::move(xv), std::move(fv));
    }
    throw ConfigError("unknown distribution kind '" + kind + "'", line, field);
}

enum class OracleChoice { AUTO, BINOMIAL, T_INTEGRAL, CRUDE_MC, TILTED_MC, NONE };

inline const char* to_string(OracleChoice o) {
    switch (o) {
    case OracleChoice::AUTO: return "AUTO";
    case OracleChoice::BINOMIAL: return "BINOMIAL";
    case OracleChoice::T_INTEGRAL: return "T_INTEGRAL";
    case OracleChoice::CRUDE_MC: return "CRUDE_MC";
    case OracleChoice::TILTED_MC: return "TILTED_MC";
    case OracleChoice::NONE: return "NONE";
    }
    return "?";
}

struct McConfig {
    long samples = 100000;
    std::optional<std::uint64_t> seed;
    int blocks = 64;
};

struct XRule {
    double c = 1.0;
    double tau = 0.25;
};

struct ExperimentConfig {
    DistributionSpec dist = DistributionSpec::rademacher(); ///< iid member law
    std::vector<DistributionSpec> members; ///< explicit members (overrides dist)
    std::vector<long> n_grid;
    std::vector<double> x_grid;   ///< literal x values, or
    std::optional<XRule> x_rule;  ///< x = c * n^tau per n
    std::vector<std::string> formulas{"THM31", "THM32", "THM34", "BE3", "BE4", "JSW"};
    OracleChoice oracle = OracleChoice::AUTO;
    McConfig mc;
    AssumptionProfile profile;
    std::string out_path = "results.csv";
    std::string format = "csv";

    bool wants(const std::string& f) const {
        for (const auto& s : formulas)
            if (s == f) return true;
        return false;
    }

    CohortSpec cohort_for(long n) const {
        if (!members.empty()) {
            if (n != static_cast<long>(members.size()))
                throw ConfigError("grid n does not match explicit member count", 0,
                                  "grid.n");
            return CohortSpec::of(members);
        }
        return CohortSpec::iid(dist, n);
    }

    std::vector<double> xs_for(long n) const {
        if (x_rule)
            return {x_rule->c * std::pow(static_cast<double>(n), x_rule->tau)};
        return x_grid;
    }
};

inline ExperimentConfig load_experiment(const config::Document& doc) {
    ExperimentConfig ec;
    if (const auto* v = doc.find("cohort.dist"))
        ec.dist = parse_distribution(v->tab("cohort.dist"), v->line, "cohort.dist");
    if (const auto* v = doc.find("cohort.members")) {
        for (const auto& m : v->arr("cohort.members"))
            ec.members.push_back(
                parse_distribution(m.tab("cohort.members[]"), v->line, "cohort.members"));
    }
    if (!doc.find("cohort.dist") && !doc.find("cohort.members"))
        throw ConfigError("missing required field", 0, "cohort.dist");

    const auto& ns = doc.require("grid.n");
    for (const auto& v : ns.arr("grid.n")) {
        const double d = v.num("grid.n");
        if (d < 1 || d != std::floor(d))
            throw ConfigError("grid.n entries must be positive integers", v.line,
                              "grid.n");
        ec.n_grid.push_back(static_cast<long>(d));
    }
    if (ec.n_grid.empty()) throw ConfigError("empty grid", 0, "grid.n");

    const auto* xs = doc.find("grid.x");
    const auto* xr = doc.find("grid.x_rule");
    if (xs) {
        for (const auto& v : xs->arr("grid.x")) ec.x_grid.push_back(v.num("grid.x"));
        if (ec.x_grid.empty()) throw ConfigError("empty grid", xs->line, "grid.x");
    }
    if (xr) {
        const auto& t = xr->tab("grid.x_rule");
        XRule rule;
        if (auto it = t.find("c"); it != t.end()) rule.c = it->second.num("grid.x_rule.c");
        if (auto it = t.find("tau"); it != t.end())
            rule.tau = it->second.num("grid.x_rule.tau");
        ec.x_rule = rule;
    }
    if (!xs && !xr) throw ConfigError("missing required field", 0, "grid.x");

    if (const auto* v = doc.find("run.formulas")) {
        ec.formulas.clear();
        for (const auto& f : v->arr("run.formulas")) {
            const std::string s = f.str("run.formulas");
            if (s != "THM31" && s != "THM32" && s != "THM34" && s != "BE3" &&
                s != "BE4" && s != "JSW")
                throw ConfigError("unknown formula '" + s + "'", v->line,
                                  "run.formulas");
            ec.formulas.push_back(s);
        }
    }
    if (const auto* v = doc.find("run.oracle")) {
        const std::string s = v->str("run.oracle");
        if (s == "AUTO") ec.oracle = OracleChoice::AUTO;
        else if (s == "BINOMIAL") ec.oracle = OracleChoice::BINOMIAL;
        else if (s == "T_INTEGRAL") ec.oracle = OracleChoice::T_INTEGRAL;
        else if (s == "CRUDE_MC") ec.oracle = OracleChoice::CRUDE_MC;
        else if (s == "TILTED_MC") ec.oracle = OracleChoice::TILTED_MC;
        else if (s == "NONE") ec.oracle = OracleChoice::NONE;
        else throw ConfigError("unknown oracle '" + s + "'", v->line, "run.oracle");
    }

    if (const auto* v = doc.find("mc.samples"))
        ec.mc.samples = static_cast<long>(v->num("mc.samples"));
    if (const auto* v = doc.find("mc.seed"))
        ec.mc.seed = static_cast<std::uint64_t>(v->num("mc.seed"));
    if (const auto* v = doc.find("mc.blocks"))
        ec.mc.blocks = static_cast<int>(v->num("mc.blocks"));

    auto& p = ec.profile;
    if (const auto* v = doc.find("profile.delta")) p.delta = v->num("profile.delta");
    if (const auto* v = doc.find("profile.M")) p.M = v->num("profile.M");
    if (const auto* v = doc.find("profile.c")) p.c = v->num("profile.c");
    if (const auto* v = doc.find("profile.gamma")) p.gamma = v->num("profile.gamma");
    if (const auto* v = doc.find("profile.epsilon")) p.epsilon = v->num("profile.epsilon");
    if (const auto* v = doc.find("profile.rho")) p.rho = v->num("profile.rho");
    if (const auto* v = doc.find("profile.theta")) p.theta = v->num("profile.theta");
    if (const auto* v = doc.find("profile.eta")) p.eta = v->num("profile.eta");
    if (const auto* v = doc.find("profile.upsilon")) p.upsilon = v->num("profile.upsilon");
    if (const auto* v = doc.find("profile.hyp_threshold"))
        p.hyp_threshold = v->num("profile.hyp_threshold");
    if (const auto* v = doc.find("profile.gamma_interval"))
        p.gamma_interval = v->num("profile.gamma_interval");

    if (const auto* v = doc.find("output.path")) ec.out_path = v->str("output.path");
    if (const auto* v = doc.find("output.format")) {
        ec.format = v->str("output.format");
        if (ec.format != "csv" && ec.format != "json")
            throw ConfigError("format must be csv or json", v->line, "output.format");
    }

    const bool mc_needed = ec.oracle == OracleChoice::CRUDE_MC ||
                           ec.oracle == OracleChoice::TILTED_MC ||
                           ec.oracle == OracleChoice::AUTO;
    if (mc_needed && !ec.mc.seed)
        throw ConfigError("mc.seed is required when a Monte Carlo oracle may run", 0,
                          "mc.seed");
    return ec;
}

} // namespace selfnorm
