#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "normal.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace stocorder {

/// Index (a, lambda) of the limit law Bbar(a, lambda) plus numerical settings.
struct LimitLawParams {
    double a = 0.0;
    double lambda = 0.5;
    double quad_tol = 1e-10;
    double root_tol = 1e-8;

    void validate() const {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("limit law parameter a must lie in [0, 1]");
        if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
        if (!(quad_tol > 0.0) || !(root_tol > 0.0)) throw DomainError("tolerances must be positive");
    }
};

struct SigmaEnvelope {
    double sigma_lower;
    double sigma_upper;
};

struct LimitMoments {
    double mean;
    double variance;
};

namespace detail {
inline constexpr double kDegenerateA = 1e-12;
}

/// P(Bbar(a, lambda) > v).
inline double tail_prob(const LimitLawParams& p, double v) {
    p.validate();
    if (!std::isfinite(v)) throw DomainError("tail_prob needs a finite argument");
    if (p.a < detail::kDegenerateA) return v <= 0.0 ? 1.0 : std::min(1.0, std::exp(-2.0 * v * v));
    if (p.a > 1.0 - detail::kDegenerateA) return v < 0.0 ? 1.0 : 0.0;

    const double a = p.a;
    const double lam = p.lambda;
    const double u = v / std::sqrt(1.0 - a);
    const double sa = std::sqrt(lam * a);
    const double sb = std::sqrt((1.0 - lam) * a);
    const double prec = 1.0 - 4.0 * lam * (1.0 - lam) * a * a;
    const double c = 1.0 - 2.0 * (1.0 - lam) * a;
    const double centre = 2.0 * u * sa * c / prec;
    const double spread = 1.0 / std::sqrt(prec);
    const double cross = 2.0 * std::sqrt(lam * (1.0 - lam)) * a;
    const double shift = u * c / sb;

    const double lo = centre - 10.0 * spread;
    const double hi = std::min(centre + 10.0 * spread, u / sa);
    auto integrand = [&](double x) {
        const double d = x - centre;
        return std::exp(-0.5 * prec * d * d) / std::sqrt(2.0 * std::numbers::pi) * normal::cdf(shift + cross * x);
    };
    const double integral = integrate_simpson(integrand, lo, hi, p.quad_tol);
    const double value =
        1.0 - normal::cdf(u / sa) * normal::cdf(u / sb) + std::exp(-2.0 * (1.0 - a) * u * u / prec) * integral;
    return std::clamp(value, 0.0, 1.0);
}

/// Mean and variance. Neither depends on lambda.
inline LimitMoments moments(const LimitLawParams& p) {
    p.validate();
    const double a = p.a;
    if (a >= 1.0) return {0.0, 0.0};
    const double bracket = std::sqrt(a * (1.0 - a)) + std::numbers::pi / 2.0 - std::atan(std::sqrt(a / (1.0 - a)));
    const double mean = bracket / std::sqrt(2.0 * std::numbers::pi);
    return {mean, std::max(0.0, (1.0 - a * a) / 2.0 - mean * mean)};
}

/// K_prob(a, lambda): the prob-quantile, by bisection on [-12, 12].
inline double quantile(const LimitLawParams& p, double prob) {
    p.validate();
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    const double target = 1.0 - prob;
    double lo = -12.0, hi = 12.0;
    if (!(tail_prob(p, lo) >= target && tail_prob(p, hi) <= target))
        throw DomainError("limit law tail does not bracket the requested level");
    while (hi - lo > p.root_tol) {
        const double mid = 0.5 * (lo + hi);
        if (tail_prob(p, mid) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Extreme standard deviations of the normal quantile bounds at level pi.
inline SigmaEnvelope sigma_envelope(double pi, double lambda) {
    if (!(pi >= 0.0 && pi < 1.0)) throw DomainError("contamination level must lie in [0, 1)");
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
    double upper2;
    if (lambda * pi > 0.5) upper2 = lambda * pi * (1.0 - pi);
    else if ((1.0 - lambda) * pi > 0.5) upper2 = (1.0 - lambda) * pi * (1.0 - pi);
    else upper2 = 0.25 - pi * pi * lambda * (1.0 - lambda);
    const double lower2 = std::min(lambda, 1.0 - lambda) * pi * (1.0 - pi);
    return {std::sqrt(lower2), std::sqrt(upper2)};
}

/// sqrt(lambda t(1-t) + (1-lambda)(t-pi)(1-t+pi)) for t in [pi, 1].
inline double sigma_t(double t, double pi, double lambda) {
    if (!(t >= pi && t <= 1.0)) throw DomainError("sigma_t needs pi <= t <= 1");
    const double s2 = lambda * t * (1.0 - t) + (1.0 - lambda) * (t - pi) * (1.0 - t + pi);
    return std::sqrt(std::max(0.0, s2));
}

enum class OracleMode {
    interval_max,  // exact bridge maximum sampled inside every grid cell
    grid_max       // maximum over grid nodes only (biased low)
};

namespace detail {

/// One Brownian bridge path on `points` equally spaced nodes of [0, 1]
/// plus the two drift normals. Cell maxima are drawn lazily from `rng`.
struct BridgePath {
    std::vector<double> bridge;
    std::vector<double> cell_uniform;
    double x = 0.0;
    double y = 0.0;

    void draw(std::size_t points, SeededGenerator& rng, bool cells) {
        bridge.resize(points);
        const double dt = 1.0 / static_cast<double>(points - 1);
        const double sd = std::sqrt(dt);
        double w = 0.0;
        bridge[0] = 0.0;
        for (std::size_t i = 1; i < points; ++i) {
            w += sd * rng.normal();
            bridge[i] = w;
        }
        for (std::size_t i = 1; i < points; ++i) bridge[i] -= static_cast<double>(i) * dt * w;
        bridge[points - 1] = 0.0;
        x = rng.normal();
        y = rng.normal();
        cell_uniform.resize(cells ? points - 1 : 0);
        for (auto& c : cell_uniform) c = rng.uniform();
    }

    /// sup of B(s) + cx (1-s) X + cy s Y, before the sqrt(1-a) factor.
    double supremum(double cx, double cy, OracleMode mode) const {
        const std::size_t points = bridge.size();
        const double dt = 1.0 / static_cast<double>(points - 1);
        const double ax = cx * x;
        const double ay = cy * y;
        auto value = [&](std::size_t i) {
            const double s = static_cast<double>(i) * dt;
            return bridge[i] + ax * (1.0 - s) + ay * s;
        };
        double best = value(0);
        for (std::size_t i = 1; i < points; ++i) best = std::max(best, value(i));
        if (mode == OracleMode::grid_max) return best;
        // The path between nodes is a Brownian bridge of length dt, whose
        // maximum exceeds m with probability exp(-2(m-b0)(m-b1)/dt).
        const double grid_best = best;
        double b0 = value(0);
        for (std::size_t i = 1; i < points; ++i) {
            const double b1 = value(i);
            const double threshold = 2.0 * (grid_best - b0) * (grid_best - b1) / dt;
            if (threshold < 60.0) {
                const double e = -std::log(cell_uniform[i - 1]);
                const double d = b1 - b0;
                best = std::max(best, 0.5 * (b0 + b1 + std::sqrt(d * d + 2.0 * dt * e)));
            }
            b0 = b1;
        }
        return best;
    }
};

}  // namespace detail

/// One draw of Bbar(a, lambda) from its single-bridge representation.
inline double oracle_sample(const LimitLawParams& p, std::size_t grid_points, SeededGenerator& rng,
                            OracleMode mode = OracleMode::interval_max) {
    p.validate();
    if (grid_points < 2) throw DomainError("oracle needs at least 2 grid points");
    detail::BridgePath path;
    path.draw(grid_points, rng, mode == OracleMode::interval_max);
    if (p.a >= 1.0) return 0.0;
    const double sup = path.supremum(std::sqrt(p.lambda * p.a), std::sqrt((1.0 - p.lambda) * p.a), mode);
    return std::sqrt(1.0 - p.a) * sup;
}

/// `paths` draws for each parameter set, sharing the underlying paths across
/// sets. Path k uses the generator seeded by mix64(seed, k), so the output
/// does not depend on the worker count. Result[i][k] belongs to params[i].
inline std::vector<std::vector<double>> oracle_batch(std::span<const LimitLawParams> params, std::size_t grid_points,
                                                     std::size_t paths, std::uint64_t seed,
                                                     OracleMode mode = OracleMode::interval_max) {
    if (grid_points < 2) throw DomainError("oracle needs at least 2 grid points");
    for (const auto& p : params) p.validate();
    std::vector<std::vector<double>> out(params.size(), std::vector<double>(paths));
    constexpr std::size_t block = 256;
    const std::size_t blocks = (paths + block - 1) / block;
    parallel_for(blocks, [&](std::size_t b) {
        detail::BridgePath path;
        const std::size_t end = std::min(paths, (b + 1) * block);
        for (std::size_t k = b * block; k < end; ++k) {
            SeededGenerator rng(mix64(seed, k));
            path.draw(grid_points, rng, mode == OracleMode::interval_max);
            for (std::size_t i = 0; i < params.size(); ++i) {
                const auto& p = params[i];
                out[i][k] = p.a >= 1.0 ? 0.0
                                       : std::sqrt(1.0 - p.a) *
                                             path.supremum(std::sqrt(p.lambda * p.a),
                                                           std::sqrt((1.0 - p.lambda) * p.a), mode);
            }
        }
    });
    return out;
}

}  // namespace stocorder
