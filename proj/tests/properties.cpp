// Randomized property suites. Slow-ish; run with `ctest -L property` or
// directly via the stocorder_properties binary.

#include <stocorder/stocorder.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

using namespace stocorder;

namespace {

Sample draw(const Distribution& d, SeededGenerator& g, std::size_t k) { return sample(d, g, k); }

// A sample with integer multiplicities, i.e. a discrete law on few atoms.
Sample discrete_law(SeededGenerator& g, std::size_t atoms) {
    std::vector<double> v;
    for (std::size_t i = 0; i < atoms; ++i) {
        const auto copies = 1 + g.index(6);
        for (std::uint64_t c = 0; c < copies; ++c) v.push_back(static_cast<double>(i));
    }
    // Drop a random subset of atoms so the two laws have different supports.
    std::vector<double> kept;
    for (double x : v)
        if (static_cast<std::uint64_t>(x) % 3 != g.index(3) || kept.empty()) kept.push_back(x);
    return Sample(kept);
}

MonotoneMap random_map(SeededGenerator& g) {
    std::vector<double> knots = {-5.0};
    for (int i = 0; i < 6; ++i) knots.push_back(knots.back() + 0.2 + 2.0 * g.uniform());
    std::vector<double> slopes;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) slopes.push_back(0.05 + 5.0 * g.uniform());
    return MonotoneMap::from_slopes(knots, 10.0 * g.uniform() - 5.0, slopes);
}

Sample mapped(const Sample& s, const MonotoneMap& map) {
    std::vector<double> v;
    for (double x : s.values()) v.push_back(map(x));
    return Sample(v);
}

}  // namespace

// Every pi-trimming of F lies between the two extreme trimmings in the stochastic order.
TEST(Trimming, Extremality) {
    SeededGenerator g(101);
    const auto f = Distribution::uniform(0.0, 1.0);
    constexpr int cells = 40;
    for (int trial = 0; trial < 200; ++trial) {
        const double pi = 0.02 + 0.9 * g.uniform();
        const double cap = 1.0 / (1.0 - pi);
        // Random density h on a 40-cell partition with 0 <= h <= cap and mean 1:
        // start from random levels, then rescale toward the bounds until the mean is one.
        std::vector<double> h(cells);
        for (auto& v : h) v = cap * g.uniform();
        for (int it = 0; it < 200; ++it) {
            const double mean = std::accumulate(h.begin(), h.end(), 0.0) / cells;
            if (std::abs(mean - 1.0) < 1e-14) break;
            if (mean > 1.0) {
                for (auto& v : h) v /= mean;
            } else {
                const double t = (1.0 - mean) / (cap - mean);
                for (auto& v : h) v += t * (cap - v);
            }
        }
        std::vector<MixtureComponent> parts;
        for (int i = 0; i < cells; ++i)
            if (h[i] > 0.0) parts.push_back({h[i] / cells, double(i) / cells, double(i + 1) / cells});
        double total = 0.0;
        for (const auto& p : parts) total += p.weight;
        for (auto& p : parts) p.weight /= total;
        const auto trimmed = Distribution::uniform_mixture(parts);
        const auto [lower, upper] = trim_extremes(f, pi);
        for (int i = 0; i <= 2000; ++i) {
            const double x = i / 2000.0;
            ASSERT_LE(upper.cdf(x), trimmed.cdf(x) + 1e-12) << trial << ' ' << x;
            ASSERT_GE(lower.cdf(x), trimmed.cdf(x) - 1e-12) << trial << ' ' << x;
        }
    }
}

// The minimal contamination level equals the smallest pi for which the extreme
// trimming of F is a trimming atom by atom and is stochastically below F0.
TEST(Trimming, MinimalContaminationBruteForce) {
    SeededGenerator g(202);
    for (int trial = 0; trial < 300; ++trial) {
        const Sample fs = discrete_law(g, 2 + g.index(19));
        const Sample f0s = discrete_law(g, 2 + g.index(19));
        const auto fm = DiscreteMeasure::from_sample(fs);
        const auto f0m = DiscreteMeasure::from_sample(f0s);
        std::vector<double> atoms;
        for (const auto& a : fm.atoms()) atoms.push_back(a.location);
        for (const auto& a : f0m.atoms()) atoms.push_back(a.location);
        std::sort(atoms.begin(), atoms.end());
        atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

        auto feasible = [&](double pi) {
            if (pi >= 1.0) return true;
            double prev = 0.0;
            for (double x : atoms) {
                const double fpi = std::min(fm.cdf(x) / (1.0 - pi), 1.0);
                const double mass = fpi - prev;
                if (mass < -1e-12 || (1.0 - pi) * mass > fm.mass_at(x) + 1e-12) return false;
                if (fpi < f0m.cdf(x) - 1e-12) return false;
                prev = fpi;
            }
            return true;
        };
        std::vector<double> candidates = {0.0, 1.0};
        for (double x : atoms)
            if (f0m.cdf(x) > 0.0) candidates.push_back((f0m.cdf(x) - fm.cdf(x)) / f0m.cdf(x));
        std::sort(candidates.begin(), candidates.end());
        double brute = 1.0;
        for (double c : candidates)
            if (c >= 0.0 && feasible(c)) {
                brute = c;
                break;
            }
        if (brute > 1e-6) {
            ASSERT_FALSE(feasible(brute - 1e-6)) << trial;
        }
        const double formula =
            min_contamination_below(Distribution::empirical(fs), Distribution::empirical(f0s)).value;
        ASSERT_NEAR(formula, brute, 1e-9) << trial;
    }
}

TEST(Contamination, KolmogorovDecomposition) {
    SeededGenerator g(303);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = g.uniform(), b = a + 0.1 + g.uniform();
        const double c = g.uniform(), d = c + 0.1 + g.uniform();
        const auto f1 = Distribution::uniform(a, b);
        const auto f2 = trial % 2 ? Distribution::uniform(c, d) : Distribution::normal(c, d - c);
        double ks = 0.0;
        std::vector<double> pts = {a, b, c, d};
        for (int i = 0; i <= 200000; ++i) pts.push_back(-3.0 + 8.0 * i / 200000.0);
        for (double x : pts) ks = std::max(ks, std::abs(f1.cdf(x) - f2.cdf(x)));
        const double both = std::max(pi_index(f1, f2).value, pi_index(f2, f1).value);
        ASSERT_NEAR(both, ks, 1e-7) << trial;
        ASSERT_GE(both, ks - 1e-15);
    }
}

TEST(Contamination, EmpiricalKolmogorovDecomposition) {
    SeededGenerator g(304);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = draw(Distribution::normal(0.3 * g.uniform(), 1), g, 1 + g.index(60));
        const auto y = draw(Distribution::normal(0, 1), g, 1 + g.index(60));
        double ks = 0.0;
        for (double t : x.values()) ks = std::max(ks, std::abs(x.ecdf(t) - y.ecdf(t)));
        for (double t : y.values()) ks = std::max(ks, std::abs(x.ecdf(t) - y.ecdf(t)));
        ASSERT_NEAR(std::max(empirical_pi(x, y).value, empirical_pi(y, x).value), ks, 1e-15) << trial;
    }
}

TEST(Contamination, InvariantUnderCommonTransform) {
    SeededGenerator g(305);
    const std::vector<std::pair<Distribution, Distribution>> pairs = {
        {Distribution::uniform(0, 1), Distribution::sqrt_law()},
        {Distribution::normal(0.5, 1), Distribution::normal(0, 1.5)},
        {Distribution::uniform(-1, 2), Distribution::normal(0, 1)},
    };
    for (int trial = 0; trial < 10; ++trial) {
        const auto map = random_map(g);
        for (const auto& [f1, f2] : pairs) {
            EXPECT_EQ(pi_index(f1, f1).value, 0.0);
            EXPECT_NEAR(pi_index(pushforward(f1, map), pushforward(f2, map)).value, pi_index(f1, f2).value, 1e-8);
        }
    }
}

TEST(Empirical, ExactAgainstBruteForce) {
    SeededGenerator g(404);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + g.index(50), m = 1 + g.index(50);
        std::vector<double> xv(n), yv(m);
        // Coarse values force ties.
        for (auto& v : xv) v = static_cast<double>(g.index(30));
        for (auto& v : yv) v = static_cast<double>(g.index(30));
        const Sample x(xv), y(yv);
        std::int64_t best = 0;
        std::vector<double> pooled = xv;
        pooled.insert(pooled.end(), yv.begin(), yv.end());
        for (double t : pooled) {
            std::int64_t j = 0, k = 0;
            for (double v : xv) j += v <= t;
            for (double v : yv) k += v <= t;
            best = std::max<std::int64_t>(best, k * static_cast<std::int64_t>(n) - j * static_cast<std::int64_t>(m));
        }
        const auto s = empirical_pi(x, y);
        ASSERT_EQ(s.pi_hat, (Rational{best, static_cast<std::int64_t>(n * m)})) << trial;
    }
}

TEST(Empirical, RankInvariance) {
    SeededGenerator g(505);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = draw(make_scenario("Fpi_b:0.1").f, g, 150 + g.index(100));
        const auto y = draw(Distribution::uniform(0, 1), g, 150 + g.index(100));
        const auto map = random_map(g);
        const auto mx = mapped(x, map), my = mapped(y, map);
        const auto a = empirical_pi(x, y), b = empirical_pi(mx, my);
        ASSERT_EQ(a.pi_hat.num, b.pi_hat.num);
        ASSERT_EQ(a.pi_hat.den, b.pi_hat.den);
        ASSERT_EQ(a.t_values.size(), b.t_values.size());
        ASSERT_EQ(sigma_hat(a), sigma_hat(b));
        for (double pi0 : {0.05, 0.1, 0.2}) {
            ASSERT_EQ(test_for(x, y, pi0, 0.05, ForMethod::conservative).decision,
                      test_for(mx, my, pi0, 0.05, ForMethod::conservative).decision);
            ASSERT_EQ(test_for(x, y, pi0, 0.05, ForMethod::plugin).decision,
                      test_for(mx, my, pi0, 0.05, ForMethod::plugin).decision);
            ASSERT_EQ(test_against(x, y, pi0, 0.05).decision, test_against(mx, my, pi0, 0.05).decision);
        }
        ASSERT_EQ(contact_sets(x, y, 2.5).t_hat.size(), contact_sets(mx, my, 2.5).t_hat.size());
        ASSERT_EQ(bootstrap_bias_correct(x, y, 100, trial).bias_hat, bootstrap_bias_correct(mx, my, 100, trial).bias_hat);
    }
}

TEST(Empirical, MonotoneDecisions) {
    SeededGenerator g(606);
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = draw(make_scenario("Fpi_a:0.1").f, g, 300);
        const auto y = draw(Distribution::uniform(0, 1), g, 300);
        bool for_rejected = false, against_retained = false;
        for (int i = 1; i < 100; ++i) {
            const double pi0 = i / 100.0;
            const bool f = test_for(x, y, pi0, 0.05, ForMethod::conservative).decision == Decision::reject;
            const bool a = test_against(x, y, pi0, 0.05).decision == Decision::reject;
            ASSERT_TRUE(f || !for_rejected) << trial << ' ' << pi0;
            ASSERT_TRUE(!a || !against_retained) << trial << ' ' << pi0;
            for_rejected = for_rejected || f;
            against_retained = against_retained || !a;
        }
    }
}

TEST(Bootstrap, BiasPositivity) {
    int positive = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        SeededGenerator g(mix64(707, t));
        const auto x = draw(Distribution::uniform(0, 1), g, 200);
        const auto y = draw(Distribution::uniform(0, 1), g, 200);
        positive += bootstrap_bias_correct(x, y, 200, t).bias_hat > 0.0;
    }
    EXPECT_GE(positive, 95);
}

TEST(Bootstrap, ScaledBiasDecay) {
    const auto sc = make_scenario("Fpi_b:0.2");
    std::vector<double> medians;
    for (std::size_t n : {500u, 2000u, 8000u}) {
        std::vector<double> scaled(50);
        parallel_for(50, [&](std::size_t t) {
            SeededGenerator g(mix64(808 + n, t));
            const auto x = draw(sc.f, g, n);
            const auto y = draw(sc.g, g, n);
            scaled[t] = std::sqrt(n / 2.0) * bootstrap_bias_correct(x, y, 200, t).bias_hat;
        });
        std::nth_element(scaled.begin(), scaled.begin() + 25, scaled.end());
        medians.push_back(scaled[25]);
    }
    EXPECT_GT(medians[0], medians[1]);
    EXPECT_GT(medians[1], medians[2]);
    EXPECT_LT(medians[2], 0.1);
}

TEST(Simulation, IndependentOfWorkerCount) {
    const auto sc = make_scenario("Fpi_a:0.1");
    const TestSpec spec{TestKind::for_boot, 0.2, 0.05, 100};
    const auto many = run_scenario(sc, 200, 200, 64, spec, 5);
    setenv("STOCORDER_THREADS", "1", 1);
    const auto one = run_scenario(sc, 200, 200, 64, spec, 5);
    unsetenv("STOCORDER_THREADS");
    EXPECT_EQ(many.rejections, one.rejections);
}

TEST(Simulation, ConservativeErrorDecay) {
    // pi(F, G) = 0.2 = pi0 + 0.1: the error bound exp(-2 * 1000 * 0.01) is far below 1/1000.
    const auto r = run_scenario(make_scenario("Fpi_b:0.2"), 2000, 2000, 1000,
                                {TestKind::for_conservative, 0.1, 0.05, 0}, 11);
    EXPECT_EQ(r.rejections, 0u);
}

TEST(Simulation, AgainstBoundaryCalibration) {
    const auto r = run_scenario(make_scenario("Ftilde_a:0.1"), 5000, 5000, 1000, {TestKind::against, 0.1, 0.05, 0}, 13);
    EXPECT_NEAR(r.frequency, 0.05, 0.02);
}
