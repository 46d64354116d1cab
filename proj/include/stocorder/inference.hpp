#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "limit_law.hpp"
#include "normal.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sample.hpp"
#include "two_sample.hpp"

namespace stocorder {

inline constexpr double kDefaultK = 2.5;
inline constexpr std::size_t kDefaultBootstrap = 1000;

/// pi(F_n, G_m) with its contact structure.
struct TwoSampleStat {
    Rational pi_hat;                    // numerator over n*m
    double value = 0.0;
    std::size_t n = 0, m = 0;
    double lambda_nm = 0.5;             // n / (n + m)
    std::vector<double> argmax_points;  // pooled points attaining pi_hat
    std::vector<Rational> t_values;     // G_m at those points, over m

    /// sqrt(nm / (n + m))
    double scale() const noexcept {
        const double nn = static_cast<double>(n), mm = static_cast<double>(m);
        return std::sqrt(nn * mm / (nn + mm));
    }
};

inline TwoSampleStat empirical_pi(const Sample& x, const Sample& y) {
    const PooledLayout layout(x, y);
    std::vector<std::int64_t> num;
    layout.numerators(layout.x_counts(), layout.y_counts(), num);
    // The last pooled location always carries numerator 0, so the
    // pre-sample level is covered by the scan.
    const std::int64_t best = *std::max_element(num.begin(), num.end());
    TwoSampleStat s;
    s.n = layout.n();
    s.m = layout.m();
    s.pi_hat = Rational{best, layout.denominator()};
    s.value = s.pi_hat.value();
    s.lambda_nm = static_cast<double>(s.n) / static_cast<double>(s.n + s.m);
    std::int64_t k = 0;
    const auto y_at = layout.y_counts();
    for (std::size_t l = 0; l < layout.size(); ++l) {
        k += y_at[l];
        if (num[l] == best) {
            s.argmax_points.push_back(layout.locations()[l]);
            s.t_values.push_back(Rational{k, static_cast<std::int64_t>(s.m)});
        }
    }
    return s;
}

struct ContactSets {
    std::vector<double> gamma_n;
    std::vector<std::uint32_t> gamma_ids;  // pooled location ids of gamma_n
    double delta_nm = 0.0;
    std::vector<Rational> t_hat;
};

/// K sqrt(((n+m)/(nm)) log log(nm/(n+m))).
inline double contact_delta(std::size_t n, std::size_t m, double k_const) {
    if (!(k_const > 2.0)) throw DomainError("contact-set constant K must exceed 2");
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    const double eff = nn * mm / (nn + mm);
    if (!(eff > std::numbers::e))
        throw DomainError("contact sets need nm/(n+m) > e; for balanced designs use n = m >= 6");
    return k_const * std::sqrt(std::log(std::log(eff)) / eff);
}

inline ContactSets contact_sets(const Sample& x, const Sample& y, double k_const = kDefaultK) {
    const double delta = contact_delta(x.size(), y.size(), k_const);
    const PooledLayout layout(x, y);
    std::vector<std::int64_t> num;
    layout.numerators(layout.x_counts(), layout.y_counts(), num);
    const std::int64_t best = *std::max_element(num.begin(), num.end());
    const double cut = static_cast<double>(best) - delta * static_cast<double>(layout.denominator());
    ContactSets c;
    c.delta_nm = delta;
    std::int64_t k = 0;
    for (std::size_t l = 0; l < layout.size(); ++l) {
        k += layout.y_counts()[l];
        if (static_cast<double>(num[l]) >= cut) {
            c.gamma_n.push_back(layout.locations()[l]);
            c.gamma_ids.push_back(static_cast<std::uint32_t>(l));
        }
        if (num[l] == best) c.t_hat.push_back(Rational{k, static_cast<std::int64_t>(y.size())});
    }
    return c;
}

/// Minimum of sigma_t over the empirical contact levels.
inline double sigma_hat(const TwoSampleStat& s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : s.t_values) best = std::min(best, sigma_t(t.value(), s.value, s.lambda_nm));
    return std::isinf(best) ? 0.0 : best;
}

inline double sigma_hat(const Sample& x, const Sample& y) { return sigma_hat(empirical_pi(x, y)); }

namespace detail {

/// Per-location counts of a with-replacement resample of k observations.
inline void resample_counts(std::span<const std::uint32_t> ids, std::size_t k, SeededGenerator& rng,
                            std::vector<std::int64_t>& counts) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < k; ++i) ++counts[ids[rng.index(ids.size())]];
}

inline void require_bootstrap(std::size_t b) {
    if (b < 1) throw ConfigError("bootstrap needs at least one replicate");
}

}  // namespace detail

struct BootstrapBias {
    double pi_hat;
    double bias_hat;
    double pi_boot;  // pi_hat - bias_hat, clamped to [0, 1]
};

/// Replicate b resamples x then y with the generator seeded by mix64(seed, b).
inline BootstrapBias bootstrap_bias_correct(const Sample& x, const Sample& y, std::size_t b_reps,
                                            std::uint64_t seed) {
    detail::require_bootstrap(b_reps);
    const PooledLayout layout(x, y);
    const std::int64_t best = layout.sup_numerator(layout.x_counts(), layout.y_counts());
    std::vector<std::int64_t> reps(b_reps);
    parallel_for(b_reps, [&](std::size_t b) {
        SeededGenerator rng(mix64(seed, b));
        std::vector<std::int64_t> xs(layout.size()), ys(layout.size());
        detail::resample_counts(layout.x_location_ids(), layout.n(), rng, xs);
        detail::resample_counts(layout.y_location_ids(), layout.m(), rng, ys);
        reps[b] = layout.sup_numerator(xs, ys);
    });
    const double den = static_cast<double>(layout.denominator());
    double total = 0.0;
    for (auto r : reps) total += static_cast<double>(r) / den;
    const double pi_hat = static_cast<double>(best) / den;
    const double bias = total / static_cast<double>(b_reps) - pi_hat;
    return {pi_hat, bias, std::clamp(pi_hat - bias, 0.0, 1.0)};
}

/// Order statistic ceil(alpha B) of the scaled bootstrap sup over the
/// enlarged contact set.
inline double bootstrap_sup_quantile(const Sample& x, const Sample& y, double k_const, std::size_t b_reps,
                                     double alpha, std::uint64_t seed) {
    if (b_reps < 50) throw ConfigError("bootstrap quantile needs at least 50 replicates");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const ContactSets contact = contact_sets(x, y, k_const);
    const PooledLayout layout(x, y);
    std::vector<std::int64_t> base;
    layout.numerators(layout.x_counts(), layout.y_counts(), base);
    const double scale = std::sqrt(static_cast<double>(layout.n()) * static_cast<double>(layout.m()) /
                                   static_cast<double>(layout.n() + layout.m())) /
                         static_cast<double>(layout.denominator());
    std::vector<double> reps(b_reps);
    parallel_for(b_reps, [&](std::size_t b) {
        SeededGenerator rng(mix64(seed, b));
        std::vector<std::int64_t> xs(layout.size()), ys(layout.size()), num;
        detail::resample_counts(layout.x_location_ids(), layout.n(), rng, xs);
        detail::resample_counts(layout.y_location_ids(), layout.m(), rng, ys);
        layout.numerators(xs, ys, num);
        std::int64_t best = std::numeric_limits<std::int64_t>::min();
        for (auto id : contact.gamma_ids) best = std::max(best, num[id] - base[id]);
        reps[b] = scale * static_cast<double>(best);
    });
    std::sort(reps.begin(), reps.end());
    const auto rank = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(b_reps) - 1e-9));
    return reps[std::clamp<std::size_t>(rank, 1, b_reps) - 1];
}

enum class ForMethod { conservative, plugin, boot };
enum class BoundMethod { upper_boot, upper_direct, lower };
enum class Decision { retain, reject };

inline std::string_view to_string(ForMethod m) {
    switch (m) {
        case ForMethod::conservative: return "conservative";
        case ForMethod::plugin: return "plugin";
        case ForMethod::boot: return "boot";
    }
    return "?";
}

inline std::string_view to_string(BoundMethod m) {
    switch (m) {
        case BoundMethod::upper_boot: return "upper-boot";
        case BoundMethod::upper_direct: return "upper-direct";
        case BoundMethod::lower: return "lower";
    }
    return "?";
}

inline std::string_view to_string(Decision d) { return d == Decision::reject ? "reject" : "retain"; }

/// Every constant that went into a decision.
struct TestConstants {
    double alpha = 0.05;
    double pi0 = 0.0;
    double lambda_nm = 0.5;
    double pi_hat = 0.0;
    std::optional<double> pi_boot;
    std::optional<double> sigma_bar;
    std::optional<double> sigma_hat;
    std::optional<double> k_quantile;
    std::optional<std::size_t> bootstrap;
    std::optional<std::uint64_t> seed;
    bool sigma_fallback = false;  // sigma_hat was 0 and sigma_bar replaced it
};

struct TestResult {
    double statistic = 0.0;
    double threshold = 0.0;
    Decision decision = Decision::retain;
    std::string_view method;
    TestConstants constants;
};

/// Testing-for decision: reject H0: pi >= pi0 when
/// sqrt(nm/(n+m)) (estimate - pi0) < sigma Phi^{-1}(alpha).
inline TestResult decide_for(double estimate, std::size_t n, std::size_t m, double pi0, double alpha, double sigma) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    TestResult r;
    r.statistic = std::sqrt(nn * mm / (nn + mm)) * (estimate - pi0);
    r.threshold = sigma * normal::quantile(alpha);
    r.decision = r.statistic < r.threshold ? Decision::reject : Decision::retain;
    return r;
}

/// Testing-against decision: reject H0: pi <= pi0 when
/// sqrt(nm/(n+m)) (pi_hat - pi0) > k_quantile.
inline TestResult decide_against(double pi_hat, std::size_t n, std::size_t m, double pi0, double k_quantile) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    TestResult r;
    r.statistic = std::sqrt(nn * mm / (nn + mm)) * (pi_hat - pi0);
    r.threshold = k_quantile;
    r.decision = r.statistic > r.threshold ? Decision::reject : Decision::retain;
    return r;
}

namespace detail {
inline void require_for_params(double pi0, double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
    if (!(pi0 > 0.0 && pi0 < 1.0)) throw ConfigError("pi0 must lie in (0, 1)");
}
}  // namespace detail

/// Test of H0: pi(F, G) >= pi0; rejection supports essential stochastic order.
inline TestResult test_for(const Sample& x, const Sample& y, double pi0, double alpha, ForMethod method,
                           std::optional<std::size_t> b_reps = std::nullopt, std::uint64_t seed = 0) {
    detail::require_for_params(pi0, alpha);
    if (method == ForMethod::boot && !b_reps) throw ConfigError("the bootstrap test needs a replicate count");
    const TwoSampleStat s = empirical_pi(x, y);
    TestConstants c;
    c.alpha = alpha;
    c.pi0 = pi0;
    c.lambda_nm = s.lambda_nm;
    c.pi_hat = s.value;
    const double bar = sigma_envelope(pi0, s.lambda_nm).sigma_upper;
    c.sigma_bar = bar;
    double sigma = bar;
    double estimate = s.value;
    if (method != ForMethod::conservative) {
        const double hat = sigma_hat(s);
        c.sigma_hat = hat;
        if (hat > 0.0) sigma = hat;
        else c.sigma_fallback = true;
    }
    if (method == ForMethod::boot) {
        const auto boot = bootstrap_bias_correct(x, y, *b_reps, seed);
        estimate = boot.pi_boot;
        c.pi_boot = boot.pi_boot;
        c.bootstrap = *b_reps;
        c.seed = seed;
    }
    TestResult r = decide_for(estimate, s.n, s.m, pi0, alpha, sigma);
    r.method = to_string(method);
    r.constants = c;
    return r;
}

/// K_{1-alpha}(pi0, lambda) for a testing-against threshold.
inline double against_threshold(double pi0, double lambda, double alpha) {
    if (!(pi0 >= 0.0 && pi0 < 1.0)) throw ConfigError("pi0 must lie in [0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    return quantile(LimitLawParams{pi0, lambda}, 1.0 - alpha);
}

/// Test of H0: pi(F, G) <= pi0. A precomputed K_{1-alpha}(pi0, lambda_nm)
/// may be supplied to skip the quadrature.
inline TestResult test_against(const Sample& x, const Sample& y, double pi0, double alpha,
                               std::optional<double> k_quantile = std::nullopt) {
    if (!(pi0 >= 0.0 && pi0 < 1.0)) throw ConfigError("pi0 must lie in [0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const TwoSampleStat s = empirical_pi(x, y);
    const double k = k_quantile ? *k_quantile : against_threshold(pi0, s.lambda_nm, alpha);
    TestResult r = decide_against(s.value, s.n, s.m, pi0, k);
    r.method = "against";
    r.constants.alpha = alpha;
    r.constants.pi0 = pi0;
    r.constants.lambda_nm = s.lambda_nm;
    r.constants.pi_hat = s.value;
    r.constants.k_quantile = k;
    return r;
}

/// pi_boot - sqrt((n+m)/(nm)) sigma Phi^{-1}(alpha), clamped to [0, 1].
inline double upper_direct_bound(double pi_boot, double sigma, std::size_t n, std::size_t m, double alpha) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return std::clamp(pi_boot - std::sqrt((nn + mm) / (nn * mm)) * sigma * normal::quantile(alpha), 0.0, 1.0);
}

struct BoundResult {
    double bound;
    BoundMethod method;
    TestConstants constants;
    std::optional<double> delta_nm;
};

/// Confidence bound for pi(F, G) at level 1 - alpha. The upper-boot variant
/// tends to undercover at practical sample sizes; prefer upper-direct.
inline BoundResult confidence_bounds(const Sample& x, const Sample& y, double alpha, BoundMethod method,
                                     std::optional<std::size_t> b_reps = std::nullopt, double k_const = kDefaultK,
                                     std::uint64_t seed = 0) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (method == BoundMethod::upper_direct && !(alpha < 0.5))
        throw ConfigError("the direct upper bound needs alpha < 1/2");
    if (method != BoundMethod::lower && !b_reps) throw ConfigError("upper bounds need a bootstrap replicate count");
    const TwoSampleStat s = empirical_pi(x, y);
    const double nn = static_cast<double>(s.n), mm = static_cast<double>(s.m);
    const double root = std::sqrt((nn + mm) / (nn * mm));
    BoundResult out{0.0, method, {}, std::nullopt};
    auto& c = out.constants;
    c.alpha = alpha;
    c.lambda_nm = s.lambda_nm;
    c.pi_hat = s.value;
    switch (method) {
        case BoundMethod::upper_boot: {
            const double k = bootstrap_sup_quantile(x, y, k_const, *b_reps, alpha, seed);
            c.k_quantile = k;
            c.bootstrap = *b_reps;
            c.seed = seed;
            out.delta_nm = contact_delta(s.n, s.m, k_const);
            out.bound = std::clamp(s.value - root * k, 0.0, 1.0);
            break;
        }
        case BoundMethod::upper_direct: {
            const auto boot = bootstrap_bias_correct(x, y, *b_reps, seed);
            double sigma = sigma_hat(s);
            c.sigma_hat = sigma;
            c.pi_boot = boot.pi_boot;
            c.bootstrap = *b_reps;
            c.seed = seed;
            if (!(sigma > 0.0) && s.value < 1.0) {
                sigma = sigma_envelope(s.value, s.lambda_nm).sigma_upper;
                c.sigma_bar = sigma;
                c.sigma_fallback = true;
            }
            out.bound = upper_direct_bound(boot.pi_boot, sigma, s.n, s.m, alpha);
            break;
        }
        case BoundMethod::lower: {
            const double k = quantile(LimitLawParams{s.value, s.lambda_nm}, 1.0 - alpha);
            c.k_quantile = k;
            out.bound = std::clamp(s.value - root * k, 0.0, 1.0);
            break;
        }
    }
    return out;
}

}  // namespace stocorder
