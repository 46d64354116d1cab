#pragma once

// Command-line front end. Kept in a header so the test suite can drive it
// in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <stocorder/stocorder.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace stocorder::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { ok = 0, usage = 2, data = 3 };

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Locale-independent strict parse of a whole field.
inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::vector<double> parse_list(std::string_view s, std::string_view what) {
    std::vector<double> out;
    while (true) {
        const auto comma = s.find(',');
        const auto v = parse_double(s.substr(0, comma));
        if (!v) throw ConfigError("malformed number in " + std::string(what) + ": '" + std::string(s) + "'");
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace detail

/// FNV-1a 64 over the file bytes, as 16 hex digits.
inline std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/// One value per row; a non-numeric first row is taken as a header. Blank
/// rows are skipped. Errors name the 1-based line.
inline Sample parse_samples(std::istream& in, const std::string& source = "<input>") {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto field = detail::trim(line);
        if (field.empty()) continue;
        const auto v = detail::parse_double(field);
        if (!v) {
            if (!seen_content) {
                seen_content = true;  // header row
                continue;
            }
            throw DataError(source + ": line " + std::to_string(line_no) + ": not a number: '" + std::string(field) +
                            "'");
        }
        seen_content = true;
        values.push_back(*v);
    }
    if (values.empty()) throw DataError(source + ": no data rows");
    return Sample(std::move(values));
}

inline Sample parse_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return parse_samples(in, path.string());
}

/// "uniform:lo,hi", "normal:mu,sigma", "sqrt", "mixture:w,lo,hi;w,lo,hi;...",
/// "empirical:<path>" or a scenario name such as "Fpi_b:0.1".
inline Distribution parse_distribution(std::string_view spec) {
    const auto colon = spec.find(':');
    const auto kind = spec.substr(0, colon);
    const auto args = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    if (kind == "sqrt") return Distribution::sqrt_law();
    if (kind == "uniform" || kind == "normal") {
        const auto v = detail::parse_list(args, spec);
        if (v.size() != 2) throw ConfigError(std::string(kind) + " needs two parameters");
        return kind == "uniform" ? Distribution::uniform(v[0], v[1]) : Distribution::normal(v[0], v[1]);
    }
    if (kind == "mixture") {
        std::vector<MixtureComponent> parts;
        std::string_view rest = args;
        while (!rest.empty()) {
            const auto semi = rest.find(';');
            const auto v = detail::parse_list(rest.substr(0, semi), spec);
            if (v.size() != 3) throw ConfigError("mixture pieces are weight,lo,hi");
            parts.push_back({v[0], v[1], v[2]});
            if (semi == std::string_view::npos) break;
            rest.remove_prefix(semi + 1);
        }
        return Distribution::uniform_mixture(std::move(parts));
    }
    if (kind == "empirical") return Distribution::empirical(parse_samples(std::filesystem::path(std::string(args))));
    return make_scenario(spec).f;
}

struct RunConfig {
    std::string command;
    std::string x_path, y_path;
    double alpha = 0.05;
    std::optional<double> pi0;
    std::string method;
    std::size_t bootstrap = kDefaultBootstrap;
    double k_const = kDefaultK;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::string output;
    // limit
    double a = 0.0;
    double lambda = 0.5;
    std::vector<double> quantiles;
    std::vector<double> tails;
    // index
    std::string f_spec, g_spec;
    std::size_t grid = kDefaultGrid;
    // simulate
    std::string table;
    std::string scenario;
    std::size_t reps = 1000;
    std::vector<std::size_t> n_values;
    std::optional<std::size_t> m;
    std::vector<double> pi0_rows;
    std::vector<std::string> columns;
    bool compare = false;
};

namespace detail {

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json base_report(const RunConfig& c) {
    Json j;
    j["command"] = c.command;
    j["inputs"] = nullptr;
    j["params"] = Json::object();
    j["statistic"] = nullptr;
    j["threshold"] = nullptr;
    j["decision"] = nullptr;
    j["bounds"] = nullptr;
    j["constants"] = {{"sigma_bar", nullptr}, {"sigma_hat", nullptr}, {"K_quantile", nullptr}, {"delta_nm", nullptr}};
    j["seed"] = nullptr;
    j["version"] = std::string(kVersion);
    return j;
}

struct Inputs {
    Sample x, y;
};

inline Inputs load_inputs(const RunConfig& c, Json& report) {
    if (c.x_path.empty() || c.y_path.empty()) throw ConfigError(c.command + " needs --x and --y sample files");
    Inputs in{parse_samples(std::filesystem::path(c.x_path)), parse_samples(std::filesystem::path(c.y_path))};
    report["inputs"] = {{"n", in.x.size()},
                        {"m", in.y.size()},
                        {"paths", {c.x_path, c.y_path}},
                        {"hashes", {file_hash(c.x_path), file_hash(c.y_path)}}};
    return in;
}

inline void fill_constants(Json& j, const TestConstants& c) {
    j["constants"]["sigma_bar"] = optional_json(c.sigma_bar);
    j["constants"]["sigma_hat"] = optional_json(c.sigma_hat);
    j["constants"]["K_quantile"] = optional_json(c.k_quantile);
    j["constants"]["lambda_nm"] = c.lambda_nm;
    j["constants"]["pi_hat"] = c.pi_hat;
    j["constants"]["pi_boot"] = optional_json(c.pi_boot);
    j["constants"]["sigma_fallback"] = c.sigma_fallback;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

inline void flatten(const Json& j, const std::string& prefix, std::ostream& os) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
    } else {
        os << prefix << ',' << (j.is_string() ? csv_field(j.get<std::string>()) : j.dump()) << '\n';
    }
}

inline void emit(const Json& j, const RunConfig& c, std::ostream& os) {
    if (c.format == "csv") {
        os << "field,value\n";
        flatten(j, "", os);
    } else {
        os << j.dump(2) << '\n';
    }
}

inline ForMethod parse_for_method(const std::string& s) {
    if (s.empty() || s == "conservative") return ForMethod::conservative;
    if (s == "plugin") return ForMethod::plugin;
    if (s == "boot") return ForMethod::boot;
    throw ConfigError("--method for test-for is conservative, plugin or boot");
}

inline BoundMethod parse_bound_method(const std::string& s) {
    if (s == "upper-boot") return BoundMethod::upper_boot;
    if (s == "upper-direct" || s.empty()) return BoundMethod::upper_direct;
    if (s == "lower") return BoundMethod::lower;
    throw ConfigError("--method for bounds is upper-boot, upper-direct or lower");
}

inline TestKind parse_test_kind(const std::string& s) {
    if (s == "conservative" || s.empty()) return TestKind::for_conservative;
    if (s == "plugin") return TestKind::for_plugin;
    if (s == "boot") return TestKind::for_boot;
    if (s == "against") return TestKind::against;
    throw ConfigError("--method for simulate is conservative, plugin, boot or against");
}

inline int cmd_estimate(const RunConfig& c, std::ostream& os) {
    Json j = base_report(c);
    const auto in = load_inputs(c, j);
    const auto s = empirical_pi(in.x, in.y);
    const auto boot = bootstrap_bias_correct(in.x, in.y, c.bootstrap, c.seed);
    const double sig = sigma_hat(s);
    j["params"] = {{"B", c.bootstrap}, {"K", c.k_const}};
    j["statistic"] = s.value;
    j["constants"]["sigma_hat"] = sig;
    const auto r = s.pi_hat.reduced();
    Json t_hat = Json::array();
    for (const auto& t : s.t_values) t_hat.push_back(t.value());
    Json est = {{"pi_hat", s.value},
                {"pi_hat_fraction", std::to_string(r.num) + "/" + std::to_string(r.den)},
                {"pi_boot", boot.pi_boot},
                {"bias_hat", boot.bias_hat},
                {"sigma_hat", sig},
                {"lambda_nm", s.lambda_nm},
                {"argmax_points", s.argmax_points},
                {"t_hat", t_hat},
                {"theta", precedence_index(Distribution::empirical(in.x), Distribution::empirical(in.y))}};
    try {
        const auto cs = contact_sets(in.x, in.y, c.k_const);
        j["constants"]["delta_nm"] = cs.delta_nm;
        est["gamma_n_size"] = cs.gamma_n.size();
    } catch (const DomainError&) {
        est["gamma_n_size"] = nullptr;  // samples too small for the contact-set rate
    }
    j["estimate"] = est;
    j["seed"] = c.seed;
    emit(j, c, os);
    return ok;
}

inline int cmd_test_for(const RunConfig& c, std::ostream& os) {
    if (!c.pi0) throw ConfigError("test-for needs --pi0");
    const ForMethod method = parse_for_method(c.method);
    Json j = base_report(c);
    const auto in = load_inputs(c, j);
    const auto r = test_for(in.x, in.y, *c.pi0, c.alpha, method,
                            method == ForMethod::boot ? std::optional<std::size_t>(c.bootstrap) : std::nullopt, c.seed);
    j["params"] = {{"pi0", *c.pi0}, {"alpha", c.alpha}, {"method", std::string(r.method)}};
    if (method == ForMethod::boot) j["params"]["B"] = c.bootstrap;
    j["statistic"] = r.statistic;
    j["threshold"] = r.threshold;
    j["decision"] = std::string(to_string(r.decision));
    fill_constants(j, r.constants);
    if (method == ForMethod::boot) j["seed"] = c.seed;
    emit(j, c, os);
    return ok;
}

inline int cmd_test_against(const RunConfig& c, std::ostream& os) {
    if (!c.pi0) throw ConfigError("test-against needs --pi0");
    Json j = base_report(c);
    const auto in = load_inputs(c, j);
    const auto r = test_against(in.x, in.y, *c.pi0, c.alpha);
    j["params"] = {{"pi0", *c.pi0}, {"alpha", c.alpha}};
    j["statistic"] = r.statistic;
    j["threshold"] = r.threshold;
    j["decision"] = std::string(to_string(r.decision));
    fill_constants(j, r.constants);
    emit(j, c, os);
    return ok;
}

inline int cmd_bounds(const RunConfig& c, std::ostream& os) {
    const BoundMethod method = parse_bound_method(c.method);
    Json j = base_report(c);
    const auto in = load_inputs(c, j);
    const bool boot = method != BoundMethod::lower;
    const auto r = confidence_bounds(in.x, in.y, c.alpha, method,
                                     boot ? std::optional<std::size_t>(c.bootstrap) : std::nullopt, c.k_const, c.seed);
    j["params"] = {{"alpha", c.alpha}, {"method", std::string(to_string(method))}};
    if (boot) j["params"]["B"] = c.bootstrap;
    if (method == BoundMethod::upper_boot) j["params"]["K"] = c.k_const;
    j["statistic"] = r.constants.pi_hat;
    j["bounds"] = {{method == BoundMethod::lower ? "lower" : "upper", r.bound}, {"level", 1.0 - c.alpha}};
    fill_constants(j, r.constants);
    j["constants"]["delta_nm"] = optional_json(r.delta_nm);
    if (boot) j["seed"] = c.seed;
    emit(j, c, os);
    return ok;
}

inline int cmd_limit(const RunConfig& c, std::ostream& os) {
    const LimitLawParams p{c.a, c.lambda};
    p.validate();
    Json j = base_report(c);
    j["params"] = {{"a", c.a}, {"lambda", c.lambda}};
    Json q = Json::array(), t = Json::array();
    for (double prob : c.quantiles) q.push_back({{"p", prob}, {"value", quantile(p, prob)}});
    for (double v : c.tails) t.push_back({{"v", v}, {"value", tail_prob(p, v)}});
    const auto mom = moments(p);
    j["limit"] = {{"quantiles", q}, {"tails", t}, {"mean", mom.mean}, {"variance", mom.variance}};
    if (c.quantiles.size() == 1) j["statistic"] = q[0]["value"];
    emit(j, c, os);
    return ok;
}

inline int cmd_index(const RunConfig& c, std::ostream& os) {
    if (c.f_spec.empty() || c.g_spec.empty()) throw ConfigError("index needs --f and --g");
    const auto f = parse_distribution(c.f_spec);
    const auto g = parse_distribution(c.g_spec);
    Json j = base_report(c);
    j["params"] = {{"f", c.f_spec}, {"g", c.g_spec}, {"grid", c.grid}};
    const auto below = min_contamination_below(f, g, c.grid);
    const auto above = min_contamination_above(f, g, c.grid);
    const auto pi = pi_index(f, g, c.grid);
    const auto rev = pi_index_reversed(f, g, c.grid);
    j["statistic"] = pi.value;
    j["index"] = {{"pi0_below", below.value},
                  {"pi0prime_above", above.value},
                  {"pi", pi.value},
                  {"pi_reversed", rev.value},
                  {"theta", precedence_index(f, g)}};
    emit(j, c, os);
    return ok;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& os) {
    if (!c.table.empty()) {
        TableScale s;
        s.reps = c.reps;
        s.bootstrap = c.bootstrap;
        s.pi0 = c.pi0_rows;
        s.n = c.n_values;
        s.columns = c.columns;
        s.seed = c.seed;
        const auto t = reproduce_table(parse_table_id(c.table), s);
        if (c.format == "json") {
            Json j = base_report(c);
            j["params"] = {{"table", c.table}, {"reps", c.reps}, {"B", c.bootstrap}};
            j["seed"] = c.seed;
            Json cells = Json::array();
            for (const auto& cell : t.cells)
                cells.push_back({{"pi0", cell.pi0},
                                 {"n", cell.n},
                                 {"column", cell.column},
                                 {"scenario", cell.report.scenario},
                                 {"rejections", cell.report.rejections},
                                 {"frequency", cell.report.frequency},
                                 {"reference", cell.reference},
                                 {"tolerance", cell.tolerance},
                                 {"within", cell.within},
                                 {"seed", cell.report.base_seed}});
            j["cells"] = cells;
            os << j.dump(2) << '\n';
        } else if (c.compare) {
            write_comparison_csv(os, t);
        } else {
            write_table_csv(os, t);
        }
        return ok;
    }
    if (c.scenario.empty()) throw ConfigError("simulate needs --table or --scenario");
    if (c.n_values.size() != 1) throw ConfigError("simulate --scenario needs exactly one --n");
    if (!c.pi0) throw ConfigError("simulate --scenario needs --pi0");
    const std::size_t n = c.n_values[0];
    const std::size_t m = c.m.value_or(n);
    const auto sc = make_scenario(c.scenario, static_cast<double>(n) / static_cast<double>(n + m));
    const TestSpec spec{parse_test_kind(c.method), *c.pi0, c.alpha, c.bootstrap};
    const auto r = run_scenario(sc, n, m, c.reps, spec, c.seed);
    Json j = base_report(c);
    j["params"] = {{"scenario", r.scenario}, {"n", n},      {"m", m}, {"reps", r.reps}, {"test", to_string(spec.kind)},
                   {"pi0", spec.pi0},        {"alpha", spec.alpha}};
    if (spec.kind == TestKind::for_boot) j["params"]["B"] = spec.bootstrap;
    j["statistic"] = r.frequency;
    j["simulation"] = {{"rejections", r.rejections}, {"frequency", r.frequency}, {"wall_seconds", r.wall_seconds}};
    j["seed"] = c.seed;
    emit(j, c, os);
    return ok;
}

}  // namespace detail

/// Parses argv and dispatches. Exit codes: 0 success, 2 usage, 3 data.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Inference on contaminated stochastic order between two samples.", "stocorder"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "key=value file mirroring the long flags; flags win");
    app.require_subcommand(1, 1);

    app.add_option("--x", c.x_path, "X sample file (one value per row)");
    app.add_option("--y", c.y_path, "Y sample file (one value per row)");
    app.add_option("--alpha", c.alpha, "Significance level")->capture_default_str();
    app.add_option("--pi0", c.pi0, "Contamination level under test");
    app.add_option("--method", c.method,
                   "test-for: conservative|plugin|boot; bounds: upper-boot|upper-direct|lower; "
                   "simulate: conservative|plugin|boot|against");
    app.add_option("--B", c.bootstrap, "Bootstrap replicates")->capture_default_str();
    app.add_option("--K", c.k_const, "Contact-set constant (> 2)")->capture_default_str();
    app.add_option("--seed", c.seed, "Base seed")->capture_default_str();
    app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--output", c.output, "Write the report here instead of stdout");
    app.add_option("--a", c.a, "Limit law parameter a")->capture_default_str();
    app.add_option("--lambda", c.lambda, "Limit law parameter lambda")->capture_default_str();
    app.add_option("--quantile", c.quantiles, "Quantile level(s) of the limit law");
    app.add_option("--tail", c.tails, "Point(s) v for P(Bbar > v)");
    app.add_option("--f", c.f_spec, "Distribution spec for F");
    app.add_option("--g", c.g_spec, "Distribution spec for G");
    app.add_option("--grid", c.grid, "Initial evaluation grid size")->capture_default_str();
    app.add_option("--table", c.table, "T1, T2, T3 or T4");
    app.add_option("--scenario", c.scenario, "Scenario name, e.g. Fpi_b:0.1");
    app.add_option("--reps", c.reps, "Monte Carlo replicates")->capture_default_str();
    app.add_option("--n", c.n_values, "Sample size(s); with --table, a row subset");
    app.add_option("--m", c.m, "Y sample size (defaults to n)");
    app.add_option("--rows", c.pi0_rows, "pi0 row subset of a table");
    app.add_option("--columns", c.columns, "Column subset of a table");
    app.add_flag("--compare", c.compare, "Table CSV in long form with published values");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"estimate", "pi_hat, bias-corrected pi_hat, sigma_hat, contact summary, theta (--x --y [--B --K --seed])"},
        {"test-for", "Test H0: pi >= pi0 (--x --y --pi0 [--alpha --method --B --seed])"},
        {"test-against", "Test H0: pi <= pi0 (--x --y --pi0 [--alpha])"},
        {"bounds", "Confidence bound for pi (--x --y --method [--alpha --B --K --seed])"},
        {"limit", "Tail, quantiles and moments of the limit law (--a --lambda [--quantile --tail])"},
        {"index", "Contamination indices between analytic laws (--f --g [--grid])"},
        {"simulate", "Monte Carlo rejection rates (--table T1..T4 | --scenario S --n N --pi0 P)"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }
    c.command = app.get_subcommands().front()->get_name();

    bool reads_data = !c.x_path.empty() || c.command == "index";
    try {
        std::ofstream file;
        if (!c.output.empty()) {
            file.open(c.output);
            if (!file) throw DataError("cannot write '" + c.output + "'");
        }
        std::ostream& os = c.output.empty() ? out : file;
        os.imbue(std::locale::classic());
        if (c.command == "estimate") return detail::cmd_estimate(c, os);
        if (c.command == "test-for") return detail::cmd_test_for(c, os);
        if (c.command == "test-against") return detail::cmd_test_against(c, os);
        if (c.command == "bounds") return detail::cmd_bounds(c, os);
        if (c.command == "limit") return detail::cmd_limit(c, os);
        if (c.command == "index") return detail::cmd_index(c, os);
        reads_data = false;
        return detail::cmd_simulate(c, os);
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return data;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const DomainError& e) {
        err << (reads_data ? "error: " : "usage error: ") << e.what() << '\n';
        return reads_data ? data : usage;
    }
}

}  // namespace stocorder::cli
