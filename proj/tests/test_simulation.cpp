#include <stocorder/contamination.hpp>
#include <stocorder/simulation.hpp>

#include <gtest/gtest.h>

#include <sstream>
#include <string>

using namespace stocorder;

TEST(Scenario, RegistryMatchesAnalyticPi) {
    for (const char* name : {"F0", "Fpi_a:0.1", "Fpi_b:0.2", "Ftilde_a:0.05", "Ftilde_b:0.2", "Fpi_b:0.01"}) {
        const auto sc = make_scenario(name);
        ASSERT_TRUE(sc.true_pi.has_value());
        EXPECT_NEAR(pi_index(sc.f, sc.g).value, *sc.true_pi, 1e-9) << name;
    }
}

TEST(Scenario, UnknownNames) {
    EXPECT_THROW(make_scenario("G1"), ConfigError);
    EXPECT_THROW(make_scenario("Fpi_c:0.1"), ConfigError);
    EXPECT_THROW(make_scenario("Fpi_a:1.5"), ConfigError);
    EXPECT_THROW(make_scenario("Fpi_a:abc"), ConfigError);
}

TEST(RunScenario, ConservativeNeverRejectsEqualLaws) {
    const auto r = run_scenario(make_scenario("F0"), 100, 100, 1000, {TestKind::for_conservative, 0.05}, 7);
    EXPECT_EQ(r.rejections, 0u);
    EXPECT_EQ(r.frequency, 0.0);
}

TEST(RunScenario, Deterministic) {
    const TestSpec spec{TestKind::for_boot, 0.1, 0.05, 50};
    const auto a = run_scenario(make_scenario("Fpi_b:0.05"), 80, 80, 1, spec, 3);
    const auto b = run_scenario(make_scenario("Fpi_b:0.05"), 80, 80, 1, spec, 3);
    EXPECT_EQ(a.rejections, b.rejections);
    const auto c = run_scenario(make_scenario("Fpi_a:0.05"), 300, 300, 200, {TestKind::for_plugin, 0.1}, 11);
    const auto d = run_scenario(make_scenario("Fpi_a:0.05"), 300, 300, 200, {TestKind::for_plugin, 0.1}, 11);
    EXPECT_EQ(c.rejections, d.rejections);
}

TEST(RunScenario, AgainstAtUniformShiftIsNearLevel) {
    const auto r = run_scenario(make_scenario("Ftilde_a:0.2"), 1000, 1000, 1000, {TestKind::against, 0.2}, 5);
    EXPECT_NEAR(r.frequency, 0.05, 0.02);
}

TEST(RunScenario, UnbalancedDesignRuns) {
    const auto r = run_scenario(make_scenario("Fpi_b:0.1", 300.0 / 500.0), 300, 200, 50, {TestKind::against, 0.1}, 2);
    EXPECT_LE(r.frequency, 1.0);
    EXPECT_EQ(r.n, 300u);
    EXPECT_EQ(r.m, 200u);
}

TEST(RunScenario, InvalidSpec) {
    const auto sc = make_scenario("F0");
    EXPECT_THROW(run_scenario(sc, 10, 10, 0, {}, 1), ConfigError);
    EXPECT_THROW(run_scenario(sc, 10, 10, 5, {TestKind::for_plugin, 0.1, 0.7}, 1), ConfigError);
    EXPECT_THROW(run_scenario(sc, 10, 10, 5, {TestKind::against, 1.0}, 1), ConfigError);
}

TEST(Tables, ColumnMapping) {
    EXPECT_EQ(column_scenario(TableId::T1, "0.1a"), "Fpi_a:0.1");
    EXPECT_EQ(column_scenario(TableId::T2, "0.05b"), "Fpi_b:0.05");
    EXPECT_EQ(column_scenario(TableId::T4, "0.2a"), "Ftilde_b:0.2");
    EXPECT_EQ(column_scenario(TableId::T4, "0.2b"), "Ftilde_a:0.2");
    EXPECT_EQ(column_scenario(TableId::T4, "F0"), "F0");
    EXPECT_THROW(parse_table_id("T5"), ConfigError);
}

TEST(Tables, ReferenceSpotValues) {
    EXPECT_EQ(reference_table(TableId::T1)[3][2][2], 0.706);
    EXPECT_EQ(reference_table(TableId::T3)[2][2][7], 0.830);
    EXPECT_EQ(reference_table(TableId::T4)[1][2][4], 0.047);
    EXPECT_EQ(reference_table(TableId::T4)[2][1][8], 0.520);
}

TEST(Tables, Tolerance) {
    EXPECT_EQ(table_tolerance(0.0, 1000), 0.02);
    EXPECT_NEAR(table_tolerance(0.5, 1000), 6.0 * std::sqrt(0.25 / 1000.0), 1e-12);
}

TEST(Tables, SubsetCellAndCsv) {
    TableScale s;
    s.reps = 1000;
    s.pi0 = {0.2};
    s.n = {1000};
    s.columns = {"0.2a"};
    s.seed = 7;
    const auto t = reproduce_table(TableId::T4, s);
    ASSERT_EQ(t.cells.size(), 1u);
    EXPECT_EQ(t.cells[0].report.scenario, "Ftilde_b:0.2");
    EXPECT_TRUE(t.cells[0].within) << t.cells[0].report.frequency;

    std::ostringstream os;
    write_table_csv(os, t);
    const std::string csv = os.str();
    EXPECT_NE(csv.find("# table=T4"), std::string::npos);
    EXPECT_NE(csv.find("pi0,n,F0,0.01a,0.01b,0.05a,0.05b,0.1a,0.1b,0.2a,0.2b\n"), std::string::npos);
    EXPECT_NE(csv.find("0.2,1000,,,,,,,,"), std::string::npos);
}

TEST(Tables, SubsetSeedsMatchFullGrid) {
    TableScale one;
    one.reps = 20;
    one.pi0 = {0.1};
    one.n = {50};
    one.columns = {"0.05a"};
    TableScale two = one;
    two.columns = {"0.05a", "F0"};
    const auto a = reproduce_table(TableId::T2, one);
    const auto b = reproduce_table(TableId::T2, two);
    EXPECT_EQ(a.cells[0].report.rejections, b.cells[0].report.rejections);
    EXPECT_EQ(a.cells[0].report.base_seed, b.cells[0].report.base_seed);
}

TEST(Tables, UnknownColumn) {
    TableScale s;
    s.columns = {"0.3a"};
    EXPECT_THROW(reproduce_table(TableId::T1, s), ConfigError);
}
