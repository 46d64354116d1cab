#include <stocorder/contamination.hpp>
#include <stocorder/normal.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace stocorder;

namespace {
const Distribution kUniform = Distribution::uniform(0.0, 1.0);
const Distribution kSqrt = Distribution::sqrt_law();
}  // namespace

TEST(MinContaminationBelow, SqrtLawUnderUniform) {
    const auto r = min_contamination_below(kSqrt, kUniform);
    EXPECT_EQ(r.kind, IndexKind::pi0_below);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(MinContaminationBelow, NormalShiftNeedsTotalContamination) {
    const auto r = min_contamination_below(Distribution::normal(1, 1), Distribution::normal(0, 1));
    EXPECT_EQ(r.value, 1.0);
}

TEST(MinContaminationBelow, SelfIsZero) {
    for (const auto& d : {kUniform, kSqrt, Distribution::normal(2, 3)})
        EXPECT_EQ(min_contamination_below(d, d).value, 0.0) << d.describe();
}

TEST(MinContaminationAbove, Examples) {
    EXPECT_NEAR(min_contamination_above(kSqrt, kUniform).value, 0.5, 1e-6);
    EXPECT_EQ(min_contamination_above(kUniform, kSqrt).value, 0.0);
    EXPECT_EQ(min_contamination_above(kSqrt, kSqrt).value, 0.0);
    EXPECT_EQ(min_contamination_above(kSqrt, kUniform).kind, IndexKind::pi0prime_above);
}

TEST(MinContaminationAbove, NormalShiftNeedsTotalContamination) {
    // sup of (F - F0)/(1 - F0) for F = N(-1, 1), F0 = N(0, 1) tends to 1 in the right tail.
    EXPECT_EQ(min_contamination_above(Distribution::normal(-1, 1), Distribution::normal(0, 1)).value, 1.0);
}

TEST(PiIndex, Examples) {
    EXPECT_NEAR(pi_index(kSqrt, kUniform).value, 0.0, 1e-12);
    EXPECT_NEAR(pi_index(kUniform, kSqrt).value, 0.25, 1e-9);
    EXPECT_NEAR(pi_index(Distribution::normal(1, 1), Distribution::normal(0, 1)).value, 0.382924922548026, 1e-9);
}

TEST(PiIndex, NormalShiftFormula) {
    for (double mu : {0.1, 0.25, 0.5, 1.0, 2.0}) {
        const double expected = 2.0 * normal::cdf(mu / 2.0) - 1.0;
        EXPECT_NEAR(pi_index(Distribution::normal(mu, 1), Distribution::normal(0, 1)).value, expected, 1e-9) << mu;
    }
}

TEST(PiIndex, SelfIsZeroAndReversedKind) {
    EXPECT_EQ(pi_index(kSqrt, kSqrt).value, 0.0);
    const auto r = pi_index_reversed(kSqrt, kUniform);
    EXPECT_EQ(r.kind, IndexKind::pi_two_sample_reversed);
    EXPECT_NEAR(r.value, 0.25, 1e-9);
}

TEST(PiIndex, EmpiricalInputsAreExact) {
    const auto x = Distribution::empirical(Sample({0.2, 0.8}));
    const auto y = Distribution::empirical(Sample({0.4, 0.6}));
    EXPECT_EQ(pi_index(x, y).value, 0.5);
    EXPECT_EQ(pi_index(Distribution::empirical(Sample({0.6, 0.8})), Distribution::empirical(Sample({0.2, 0.4}))).value,
              1.0);
}

TEST(PiIndex, JumpsAreSeenFromTheLeft) {
    // G jumps to 1 at 0.5 while F is continuous: the sup 0.5 sits at the atom.
    const auto g = Distribution::empirical(Sample({0.5}));
    EXPECT_NEAR(pi_index(kUniform, g).value, 0.5, 1e-12);
    // F jumps at 0.5: G - F approaches 0.5 from the left only.
    EXPECT_NEAR(pi_index(g, kUniform).value, 0.5, 1e-12);
}

TEST(PiIndex, RejectsTinyGrid) { EXPECT_THROW(pi_index(kUniform, kSqrt, 1), DomainError); }

TEST(IsTrimming, Examples) {
    const DiscreteMeasure point({{0.0, 1.0}});
    const DiscreteMeasure coin({{0.0, 0.5}, {1.0, 0.5}});
    EXPECT_TRUE(is_trimming(coin, coin, 0.0));
    EXPECT_TRUE(is_trimming(point, coin, 0.5));
    EXPECT_FALSE(is_trimming(point, coin, 0.4));
}

TEST(DiscreteMeasure, Validation) {
    EXPECT_THROW(DiscreteMeasure({{0.0, 0.5}, {0.0, 0.5}}), DomainError);
    EXPECT_THROW(DiscreteMeasure({{0.0, 0.5}, {1.0, 0.6}}), DomainError);
    EXPECT_THROW(DiscreteMeasure({{0.0, 1.2}, {1.0, -0.2}}), DomainError);
    const auto m = DiscreteMeasure::from_sample(Sample({1.0, 1.0, 3.0, 2.0}));
    EXPECT_DOUBLE_EQ(m.mass_at(1.0), 0.5);
    EXPECT_DOUBLE_EQ(m.mass_at(4.0), 0.0);
}

TEST(PrecedenceIndex, Examples) {
    EXPECT_NEAR(precedence_index(kUniform, kUniform), 0.5, 1e-9);
    EXPECT_DOUBLE_EQ(precedence_index(Distribution::empirical(Sample({1, 3})), Distribution::empirical(Sample({2, 4}))),
                     0.75);
    // SqrtLaw <=_st Uniform; theta = integral over u of (1 - u^2) = 2/3.
    EXPECT_NEAR(precedence_index(kSqrt, kUniform), 2.0 / 3.0, 1e-9);
    EXPECT_EQ(pi_index(kSqrt, kUniform).value, 0.0);
    EXPECT_GE(precedence_index(kSqrt, kUniform), 0.5);
}

TEST(PrecedenceIndex, MixedEmpiricalAndAnalytic) {
    const auto e = Distribution::empirical(Sample({0.25, 0.75}));
    EXPECT_DOUBLE_EQ(precedence_index(kUniform, e), 0.5);
    EXPECT_DOUBLE_EQ(precedence_index(e, kUniform), 0.5);
    // Normal shift: P(X <= Y) with X ~ N(0,1), Y ~ N(1,1) is Phi(1/sqrt 2).
    EXPECT_NEAR(precedence_index(Distribution::normal(0, 1), Distribution::normal(1, 1)),
                normal::cdf(1.0 / std::sqrt(2.0)), 1e-8);
}
