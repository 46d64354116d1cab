#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <locale>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "contamination.hpp"
#include "distribution.hpp"
#include "error.hpp"
#include "inference.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace stocorder {

/// X-law against Y-law, with the analytic pi(F, G) when known.
struct Scenario {
    std::string id;
    Distribution f;
    Distribution g;
    std::optional<double> true_pi;
};

namespace detail {

inline double parse_level(std::string_view text, std::string_view name) {
    std::string s(text);
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v = 0.0;
    if (!(in >> v) || !in.eof() || !(v > 0.0 && v < 1.0))
        throw ConfigError("scenario '" + std::string(name) + "' needs a contamination level in (0, 1)");
    return v;
}

}  // namespace detail

/// Registry: "F0", "Fpi_a:<pi>", "Fpi_b:<pi>", "Ftilde_a:<pi>", "Ftilde_b:<pi>".
/// The Y-law is Uniform(0, 1) throughout; lambda only shapes "Fpi_b".
inline Scenario make_scenario(std::string_view name, double lambda = 0.5) {
    const auto uniform = Distribution::uniform(0.0, 1.0);
    if (name == "F0") return {std::string(name), uniform, uniform, 0.0};
    const auto colon = name.find(':');
    if (colon == std::string_view::npos) throw ConfigError("unknown scenario '" + std::string(name) + "'");
    const auto family = name.substr(0, colon);
    const double pi = detail::parse_level(name.substr(colon + 1), name);
    LeastFavorable kind;
    if (family == "Fpi_a") kind = LeastFavorable::for_power;
    else if (family == "Fpi_b") kind = LeastFavorable::for_boundary;
    else if (family == "Ftilde_a") kind = LeastFavorable::against_boundary;
    else if (family == "Ftilde_b") kind = LeastFavorable::against_power;
    else throw ConfigError("unknown scenario family '" + std::string(family) + "'");
    return {std::string(name), make_least_favorable(kind, pi, lambda), uniform, pi};
}

enum class TestKind { for_conservative, for_plugin, for_boot, against };

inline std::string_view to_string(TestKind k) {
    switch (k) {
        case TestKind::for_conservative: return "for-conservative";
        case TestKind::for_plugin: return "for-plugin";
        case TestKind::for_boot: return "for-boot";
        case TestKind::against: return "against";
    }
    return "?";
}

struct TestSpec {
    TestKind kind = TestKind::for_conservative;
    double pi0 = 0.05;
    double alpha = 0.05;
    std::size_t bootstrap = kDefaultBootstrap;
};

struct ReplicationReport {
    std::string scenario;
    std::size_t n = 0, m = 0;
    std::size_t reps = 0;
    TestSpec test;
    std::size_t rejections = 0;
    double frequency = 0.0;
    std::uint64_t base_seed = 0;
    double wall_seconds = 0.0;
};

inline void validate(const TestSpec& t) {
    if (t.kind == TestKind::against) {
        if (!(t.pi0 >= 0.0 && t.pi0 < 1.0)) throw ConfigError("pi0 must lie in [0, 1)");
        if (!(t.alpha > 0.0 && t.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    } else {
        detail::require_for_params(t.pi0, t.alpha);
        if (t.kind == TestKind::for_boot && t.bootstrap < 1) throw ConfigError("bootstrap needs B >= 1");
    }
}

/// Replicate r draws x then y from the generator seeded by mix64(base_seed, r);
/// bootstrap replicates inside derive from that replicate seed.
inline ReplicationReport run_scenario(const Scenario& sc, std::size_t n, std::size_t m, std::size_t reps,
                                      const TestSpec& test, std::uint64_t base_seed) {
    if (reps < 1 || n < 1 || m < 1) throw ConfigError("reps, n and m must be positive");
    validate(test);
    const auto start = std::chrono::steady_clock::now();
    std::optional<double> threshold;
    if (test.kind == TestKind::against)
        threshold = against_threshold(test.pi0, static_cast<double>(n) / static_cast<double>(n + m), test.alpha);
    std::vector<unsigned char> rejected(reps, 0);
    parallel_for(reps, [&](std::size_t r) {
        const std::uint64_t seed = mix64(base_seed, r);
        SeededGenerator rng(seed);
        const Sample x = sample(sc.f, rng, n);
        const Sample y = sample(sc.g, rng, m);
        TestResult res;
        switch (test.kind) {
            case TestKind::for_conservative:
                res = test_for(x, y, test.pi0, test.alpha, ForMethod::conservative);
                break;
            case TestKind::for_plugin:
                res = test_for(x, y, test.pi0, test.alpha, ForMethod::plugin);
                break;
            case TestKind::for_boot:
                res = test_for(x, y, test.pi0, test.alpha, ForMethod::boot, test.bootstrap, seed);
                break;
            case TestKind::against:
                res = test_against(x, y, test.pi0, test.alpha, threshold);
                break;
        }
        rejected[r] = res.decision == Decision::reject ? 1 : 0;
    });
    ReplicationReport rep;
    rep.scenario = sc.id;
    rep.n = n;
    rep.m = m;
    rep.reps = reps;
    rep.test = test;
    rep.base_seed = base_seed;
    for (auto v : rejected) rep.rejections += v;
    rep.frequency = static_cast<double>(rep.rejections) / static_cast<double>(reps);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Published rejection-frequency tables (1000 replicates each, n = m, alpha 0.05).

enum class TableId { T1, T2, T3, T4 };

inline constexpr std::array<double, 4> kTablePi0 = {0.01, 0.05, 0.1, 0.2};
inline constexpr std::array<std::size_t, 6> kTableN = {50, 100, 500, 1000, 5000, 10000};
inline constexpr std::size_t kTableColumns = 9;
using TableGrid = std::array<std::array<std::array<double, kTableColumns>, 6>, 4>;

inline constexpr std::array<std::string_view, kTableColumns> kForColumns = {
    "0.2a", "0.2b", "0.1a", "0.1b", "0.05a", "0.05b", "0.01a", "0.01b", "F0"};
inline constexpr std::array<std::string_view, kTableColumns> kAgainstColumns = {
    "F0", "0.01a", "0.01b", "0.05a", "0.05b", "0.1a", "0.1b", "0.2a", "0.2b"};

namespace detail {

// clang-format off
inline constexpr TableGrid kTable1 = {{
    {{{0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0},
      {0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0}}},
    {{{0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0},
      {0,0,0,0,0,0,0.016,0.071,0.183}, {0,0,0,0,0,0.008,0.924,0.939,0.995},
      {0,0,0,0,0,0.021,0.999,1.000,1.000}}},
    {{{0,0,0,0,0,0,0,0,0}, {0,0,0,0,0,0,0,0,0},
      {0,0,0,0.001,0.010,0.152,0.532,0.589,0.698}, {0,0,0,0.011,0.155,0.491,0.946,0.952,0.979},
      {0,0,0,0.025,0.996,1,1,1,1}, {0,0,0,0.036,1,1,1,1,1}}},
    {{{0,0,0,0.004,0.006,0.024,0.045,0.048,0.075}, {0,0.002,0.010,0.087,0.151,0.296,0.480,0.499,0.559},
      {0,0.021,0.706,0.880,0.997,0.996,1,1,1}, {0,0.022,0.985,0.994,1,1,1,1,1},
      {0,0.047,1,1,1,1,1,1,1}, {0,0.041,1,1,1,1,1,1,1}}},
}};

inline constexpr TableGrid kTable2 = {{
    {{{0,0,0,0,0,0.003,0.007,0.015,0.017}, {0,0,0,0,0,0,0,0.005,0.016}, {0,0,0,0,0,0,0,0.001,0.007},
      {0,0,0,0,0,0,0,0.003,0.016}, {0,0,0,0,0,0,0,0.012,0.051}, {0,0,0,0,0,0,0,0.023,0.117}}},
    {{{0,0,0,0.001,0,0.003,0.005,0.011,0.017}, {0,0,0,0.001,0,0.007,0.020,0.036,0.039},
      {0,0,0,0,0,0.015,0.100,0.105,0.147}, {0,0,0,0,0,0.022,0.206,0.231,0.360},
      {0,0,0,0,0,0.023,0.948,0.973,0.998}, {0,0,0,0,0,0.025,1,1,1}}},
    {{{0,0,0,0.011,0.010,0.042,0.063,0.064,0.080}, {0,0,0,0.011,0.019,0.033,0.123,0.124,0.137},
      {0,0,0,0.017,0.151,0.216,0.606,0.693,0.761}, {0,0,0,0.025,0.337,0.523,0.961,0.957,0.979},
      {0,0,0,0.028,0.993,0.999,1,1,1}, {0,0,0,0.033,1,1,1,1,1}}},
    {{{0,0.015,0.048,0.101,0.151,0.171,0.273,0.295,0.288}, {0,0.013,0.118,0.175,0.369,0.406,0.580,0.614,0.643},
      {0,0.020,0.770,0.880,0.993,0.993,1,0.999,1}, {0,0.033,0.988,0.995,1,1,1,1,1},
      {0,0.038,1,1,1,1,1,1,1}, {0,0.032,1,1,1,1,1,1,1}}},
}};

inline constexpr TableGrid kTable3 = {{
    {{{0,0,0,0.003,0.001,0.012,0.019,0.034,0.038}, {0,0,0,0.001,0,0.005,0.015,0.027,0.028},
      {0,0,0,0,0,0.001,0.016,0.028,0.049}, {0,0,0,0,0,0,0.013,0.030,0.063},
      {0,0,0,0,0,0,0.019,0.038,0.136}, {0,0,0,0,0,0,0.013,0.051,0.277}}},
    {{{0,0,0,0.009,0.015,0.042,0.062,0.067,0.093}, {0,0,0,0.006,0.008,0.038,0.065,0.098,0.106},
      {0,0,0,0.003,0.007,0.058,0.208,0.220,0.332}, {0,0,0,0.001,0.009,0.039,0.415,0.426,0.566},
      {0,0,0,0,0.003,0.057,0.978,0.987,1}, {0,0,0,0,0.006,0.050,1,1,1}}},
    {{{0,0.005,0.003,0.030,0.054,0.089,0.137,0.138,0.134}, {0,0.001,0.007,0.052,0.076,0.121,0.246,0.250,0.266},
      {0,0,0.007,0.040,0.337,0.387,0.801,0.830,0.876}, {0,0,0.005,0.056,0.589,0.661,0.976,0.985,0.997},
      {0,0,0.003,0.057,0.999,1,1,1,1}, {0,0,0.008,0.058,1,1,1,1,1}}},
    {{{0.007,0.051,0.130,0.172,0.321,0.350,0.483,0.469,0.508}, {0.003,0.068,0.280,0.339,0.541,0.600,0.758,0.761,0.798},
      {0.004,0.051,0.888,0.928,1,0.997,1,1,1}, {0.002,0.050,0.999,0.999,1,1,1,1,1},
      {0.002,0.054,1,1,1,1,1,1,1}, {0.004,0.045,1,1,1,1,1,1,1}}},
}};

inline constexpr TableGrid kTable4 = {{
    {{{0.045,0.039,0.052,0.060,0.111,0.159,0.302,0.485,0.824}, {0.022,0.031,0.040,0.066,0.107,0.199,0.450,0.848,0.986},
      {0.021,0.026,0.045,0.210,0.477,0.951,1,1,1}, {0.011,0.028,0.047,0.441,0.774,1,1,1,1},
      {0.002,0.017,0.049,1,1,1,1,1,1}, {0.001,0.005,0.047,1,1,1,1,1,1}}},
    {{{0.015,0.010,0.016,0.023,0.052,0.056,0.142,0.253,0.600}, {0.004,0.007,0.009,0.014,0.031,0.069,0.186,0.518,0.885},
      {0,0.001,0.002,0.009,0.047,0.211,0.664,1,1}, {0,0,0,0.001,0.060,0.606,0.954,1,1},
      {0,0,0,0.001,0.040,1,1,1,1}, {0,0,0,0,0.056,1,1,1,1}}},
    {{{0.001,0.002,0.005,0.004,0.007,0.009,0.027,0.079,0.274}, {0,0.003,0,0.001,0.002,0.010,0.031,0.163,0.520},
      {0,0,0,0,0.001,0.002,0.056,0.958,0.999}, {0,0,0,0,0,0.001,0.035,1,1},
      {0,0,0,0,0,0,0.056,1,1}, {0,0,0,0,0,0,0.057,1,1}}},
    {{{0,0,0,0,0,0.001,0.004,0.004,0.029}, {0,0,0,0,0,0,0,0.002,0.051},
      {0,0,0,0,0,0,0,0.001,0.044}, {0,0,0,0,0,0,0,0.001,0.052},
      {0,0,0,0,0,0,0,0,0.053}, {0,0,0,0,0,0,0,0,0.040}}},
}};
// clang-format on

}  // namespace detail

inline std::string_view to_string(TableId id) {
    switch (id) {
        case TableId::T1: return "T1";
        case TableId::T2: return "T2";
        case TableId::T3: return "T3";
        case TableId::T4: return "T4";
    }
    return "?";
}

inline TableId parse_table_id(std::string_view s) {
    if (s == "T1") return TableId::T1;
    if (s == "T2") return TableId::T2;
    if (s == "T3") return TableId::T3;
    if (s == "T4") return TableId::T4;
    throw ConfigError("unknown table '" + std::string(s) + "' (expected T1..T4)");
}

inline const TableGrid& reference_table(TableId id) {
    switch (id) {
        case TableId::T1: return detail::kTable1;
        case TableId::T2: return detail::kTable2;
        case TableId::T3: return detail::kTable3;
        case TableId::T4: return detail::kTable4;
    }
    throw ConfigError("unknown table");
}

inline const std::array<std::string_view, kTableColumns>& table_columns(TableId id) {
    return id == TableId::T4 ? kAgainstColumns : kForColumns;
}

inline TestKind table_test(TableId id) {
    switch (id) {
        case TableId::T1: return TestKind::for_conservative;
        case TableId::T2: return TestKind::for_plugin;
        case TableId::T3: return TestKind::for_boot;
        case TableId::T4: return TestKind::against;
    }
    throw ConfigError("unknown table");
}

/// Registry name of the X-law behind a table column. In the against table,
/// the column marked "b" has the level-alpha boundary behaviour of
/// U(pi, 1 + pi) and the "a" column that of the two-piece mixture, so the
/// letters are mapped accordingly.
inline std::string column_scenario(TableId id, std::string_view column) {
    if (column == "F0") return "F0";
    const std::string level(column.substr(0, column.size() - 1));
    const char letter = column.back();
    if (id == TableId::T4) return (letter == 'a' ? "Ftilde_b:" : "Ftilde_a:") + level;
    return (letter == 'a' ? "Fpi_a:" : "Fpi_b:") + level;
}

/// Acceptance half-width for comparing a cell with a published 1000-rep value.
inline double table_tolerance(double p, std::size_t reps) {
    const double v = p * (1.0 - p);
    return std::max(0.02, 3.0 * std::sqrt(v / static_cast<double>(reps)) + 3.0 * std::sqrt(v / 1000.0));
}

struct TableScale {
    std::size_t reps = 1000;
    std::size_t bootstrap = kDefaultBootstrap;
    std::vector<double> pi0;          // empty: all rows
    std::vector<std::size_t> n;       // empty: all rows
    std::vector<std::string> columns; // empty: all columns
    std::uint64_t seed = 1;
};

struct TableCell {
    double pi0;
    std::size_t n;
    std::string column;
    ReplicationReport report;
    double reference;
    double tolerance;
    bool within;
};

struct TableReport {
    TableId id;
    TableScale scale;
    std::vector<TableCell> cells;
};

/// Seed of one cell, fixed by its position in the full grid so that subsets
/// reproduce the corresponding cells of a full run.
inline std::uint64_t table_cell_seed(std::uint64_t base, TableId id, std::size_t row, std::size_t n_index,
                                     std::size_t col) {
    const std::uint64_t key = (static_cast<std::uint64_t>(id) << 24) | (row << 16) | (n_index << 8) | col;
    return mix64(base, key);
}

inline TableReport reproduce_table(TableId id, const TableScale& scale) {
    if (scale.reps < 1 || scale.bootstrap < 1) throw ConfigError("table scale parameters must be positive");
    const auto& grid = reference_table(id);
    const auto& cols = table_columns(id);
    auto wanted = [](const auto& subset, const auto& v) {
        return subset.empty() || std::find(subset.begin(), subset.end(), v) != subset.end();
    };
    for (const auto& c : scale.columns)
        if (std::find(cols.begin(), cols.end(), c) == cols.end())
            throw ConfigError("table " + std::string(to_string(id)) + " has no column '" + c + "'");
    TableReport out{id, scale, {}};
    for (std::size_t r = 0; r < kTablePi0.size(); ++r) {
        if (!wanted(scale.pi0, kTablePi0[r])) continue;
        for (std::size_t k = 0; k < kTableN.size(); ++k) {
            if (!wanted(scale.n, kTableN[k])) continue;
            for (std::size_t c = 0; c < kTableColumns; ++c) {
                if (!wanted(scale.columns, std::string(cols[c]))) continue;
                const Scenario sc = make_scenario(column_scenario(id, cols[c]));
                TestSpec spec{table_test(id), kTablePi0[r], 0.05, scale.bootstrap};
                auto rep = run_scenario(sc, kTableN[k], kTableN[k], scale.reps, spec,
                                        table_cell_seed(scale.seed, id, r, k, c));
                const double ref = grid[r][k][c];
                const double tol = table_tolerance(ref, scale.reps);
                out.cells.push_back({kTablePi0[r], kTableN[k], std::string(cols[c]), rep, ref, tol,
                                     std::fabs(rep.frequency - ref) <= tol});
            }
        }
    }
    return out;
}

/// Grid CSV in the published layout (pi0, n, one column per scenario) with
/// '#' metadata lines. Cells not run are left empty.
inline void write_table_csv(std::ostream& os, const TableReport& t) {
    const auto& cols = table_columns(t.id);
    os.imbue(std::locale::classic());
    os << "# table=" << to_string(t.id) << "\n# test=" << to_string(table_test(t.id)) << "\n# alpha=0.05\n# reps="
       << t.scale.reps << "\n";
    if (t.id == TableId::T3) os << "# bootstrap=" << t.scale.bootstrap << "\n";
    os << "# seed=" << t.scale.seed << "\n";
    for (const auto& c : cols) os << "# column " << c << " -> " << column_scenario(t.id, c) << "\n";
    os << "pi0,n";
    for (const auto& c : cols) os << ',' << c;
    os << '\n';
    for (double pi0 : kTablePi0) {
        for (std::size_t n : kTableN) {
            std::array<const TableCell*, kTableColumns> row{};
            bool any = false;
            for (const auto& cell : t.cells) {
                if (cell.pi0 != pi0 || cell.n != n) continue;
                const auto it = std::find(cols.begin(), cols.end(), cell.column);
                row[static_cast<std::size_t>(it - cols.begin())] = &cell;
                any = true;
            }
            if (!any) continue;
            os << pi0 << ',' << n;
            for (const auto* cell : row) {
                os << ',';
                if (cell) os << std::fixed << std::setprecision(3) << cell->report.frequency << std::defaultfloat;
            }
            os << '\n';
        }
    }
}

/// Long-format comparison against the published values.
inline void write_comparison_csv(std::ostream& os, const TableReport& t) {
    os.imbue(std::locale::classic());
    os << "pi0,n,column,scenario,frequency,reference,tolerance,within\n";
    for (const auto& c : t.cells) {
        os << c.pi0 << ',' << c.n << ',' << c.column << ',' << c.report.scenario << ',' << std::fixed
           << std::setprecision(3) << c.report.frequency << ',' << c.reference << ',' << std::setprecision(4)
           << c.tolerance << std::defaultfloat << ',' << (c.within ? "yes" : "no") << '\n';
    }
}

}  // namespace stocorder
