#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "distribution.hpp"
#include "error.hpp"
#include "two_sample.hpp"

namespace stocorder {

enum class IndexKind {
    pi0_below,              // F is a pi-contaminated stochastic minorant of F0
    pi0prime_above,         // F is a pi-contaminated stochastic majorant of F0
    pi_two_sample,          // sup(F2 - F1)
    pi_two_sample_reversed  // sup(F1 - F2)
};

inline std::string_view to_string(IndexKind kind) {
    switch (kind) {
        case IndexKind::pi0_below: return "PI0_BELOW";
        case IndexKind::pi0prime_above: return "PI0PRIME_ABOVE";
        case IndexKind::pi_two_sample: return "PI_TWO_SAMPLE";
        case IndexKind::pi_two_sample_reversed: return "PI_TWO_SAMPLE_REVERSED";
    }
    return "?";
}

/// Minimal contamination level in [0, 1]. A value of exactly 1 means no
/// level below total contamination makes the relation hold.
struct ContaminationIndex {
    double value;
    IndexKind kind;
    /// Location where the supremum was found (NaN when not tracked).
    double argmax = std::numeric_limits<double>::quiet_NaN();
};

/// Finitely supported probability with strictly increasing atom locations.
class DiscreteMeasure {
public:
    struct Atom {
        double location;
        double mass;
    };

    explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw DomainError("discrete measure needs at least one atom");
        double total = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (!(atoms_[i].mass > 0.0)) throw DomainError("atom masses must be positive");
            if (i > 0 && !(atoms_[i].location > atoms_[i - 1].location))
                throw DomainError("atom locations must be strictly increasing");
            total += atoms_[i].mass;
        }
        if (std::fabs(total - 1.0) > 1e-12) throw DomainError("atom masses must sum to 1");
    }

    static DiscreteMeasure from_sample(const Sample& s) {
        std::vector<Atom> atoms;
        const double w = 1.0 / static_cast<double>(s.size());
        for (double v : s.values()) {
            if (!atoms.empty() && atoms.back().location == v) atoms.back().mass += w;
            else atoms.push_back({v, w});
        }
        return DiscreteMeasure(std::move(atoms));
    }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    /// P({s})
    double mass_at(double s) const noexcept {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), s,
                                   [](const Atom& a, double v) { return a.location < v; });
        return it != atoms_.end() && it->location == s ? it->mass : 0.0;
    }

    double cdf(double x) const noexcept {
        double total = 0.0;
        for (const auto& a : atoms_) {
            if (a.location > x) break;
            total += a.mass;
        }
        return std::min(total, 1.0);
    }

private:
    std::vector<Atom> atoms_;
};

namespace detail {

inline constexpr int kRefineRounds = 3;
inline constexpr int kRefineFactor = 8;
inline constexpr double kTotalContamination = 1.0 - 1e-12;

struct SupResult {
    double value = -std::numeric_limits<double>::infinity();
    double argmax = std::numeric_limits<double>::quiet_NaN();
};

/// Supremum of `right(x)` over a uniform grid on [lo, hi] plus the knots,
/// followed by refinement rounds around the incumbent. `left(x)` supplies
/// left limits at knots. Either may return NaN to skip a point.
template <class Right, class Left>
SupResult adaptive_sup(const Right& right, const Left& left, double lo, double hi, std::size_t grid,
                       const std::vector<double>& knots) {
    std::vector<double> xs;
    xs.reserve(grid + knots.size());
    if (hi > lo) {
        for (std::size_t i = 0; i < grid; ++i)
            xs.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1));
    } else {
        xs.push_back(lo);
    }
    for (double k : knots) {
        if (k >= lo && k <= hi) xs.push_back(k);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    SupResult best;
    std::size_t best_index = 0;
    auto consider = [&](double v, double x) {
        if (!std::isnan(v) && v > best.value) {
            best.value = v;
            best.argmax = x;
            return true;
        }
        return false;
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (consider(right(xs[i]), xs[i])) best_index = i;
    }
    for (double k : knots) consider(left(k), k);
    if (std::isnan(best.argmax) || xs.size() < 2) return best;

    double a = xs[best_index == 0 ? 0 : best_index - 1];
    double b = xs[std::min(best_index + 1, xs.size() - 1)];
    for (int round = 0; round < kRefineRounds; ++round) {
        const int steps = 2 * kRefineFactor;
        const double h = (b - a) / steps;
        if (!(h > 0.0)) break;
        double centre = best.argmax;
        for (int s = 0; s <= steps; ++s) {
            const double x = a + h * s;
            if (consider(right(x), x)) centre = x;
        }
        a = std::max(lo, centre - h);
        b = std::min(hi, centre + h);
    }
    return best;
}

inline std::pair<double, double> joint_range(const Distribution& a, const Distribution& b) {
    const auto [alo, ahi] = a.grid_range();
    const auto [blo, bhi] = b.grid_range();
    return {std::min(alo, blo), std::max(ahi, bhi)};
}

inline std::vector<double> joint_knots(const Distribution& a, const Distribution& b) {
    std::vector<double> k = a.knots();
    const auto kb = b.knots();
    k.insert(k.end(), kb.begin(), kb.end());
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

inline ContaminationIndex finish_index(SupResult r, IndexKind kind) {
    double v = std::isnan(r.argmax) ? 0.0 : r.value;
    if (v >= kTotalContamination) v = 1.0;
    return ContaminationIndex{std::clamp(v, 0.0, 1.0) + 0.0, kind, r.argmax};  // + 0.0 drops a signed zero
}

inline void require_grid(std::size_t grid) {
    if (grid < 2) throw DomainError("evaluation grid needs at least 2 points");
}

}  // namespace detail

inline constexpr std::size_t kDefaultGrid = 4096;

/// The extreme pi-trimmings (F_pi, F^pi): the stochastically smallest and
/// largest members of the trimming set of F.
inline std::pair<Distribution, Distribution> trim_extremes(const Distribution& f, double pi) {
    if (!(pi >= 0.0 && pi < 1.0)) throw DomainError("trimming level must lie in [0, 1)");
    if (pi == 0.0) return {f, f};
    return {Distribution::trimmed(f, pi, TrimSide::lower), Distribution::trimmed(f, pi, TrimSide::upper)};
}

/// sup over {F0 > 0} of (F0 - F) / F0: the least pi with F a pi-contaminated
/// stochastic minorant of F0. Ratios are formed in log space so the normal
/// left tail stays resolved.
inline ContaminationIndex min_contamination_below(const Distribution& f, const Distribution& f0,
                                                  std::size_t grid = kDefaultGrid) {
    detail::require_grid(grid);
    const auto [lo, hi] = detail::joint_range(f, f0);
    auto right = [&](double x) {
        const double l0 = f0.log_cdf(x);
        if (std::isinf(l0)) return std::numeric_limits<double>::quiet_NaN();
        return -std::expm1(f.log_cdf(x) - l0);
    };
    auto left = [&](double x) {
        const double g0 = f0.cdf_left(x);
        if (!(g0 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        return (g0 - f.cdf_left(x)) / g0;
    };
    return detail::finish_index(detail::adaptive_sup(right, left, lo, hi, grid, detail::joint_knots(f, f0)),
                                IndexKind::pi0_below);
}

/// sup over {F0 < 1} of (F - F0) / (1 - F0): the least pi with F a
/// pi-contaminated stochastic majorant of F0.
inline ContaminationIndex min_contamination_above(const Distribution& f, const Distribution& f0,
                                                  std::size_t grid = kDefaultGrid) {
    detail::require_grid(grid);
    const auto [lo, hi] = detail::joint_range(f, f0);
    auto right = [&](double x) {
        const double s0 = f0.log_sf(x);
        if (std::isinf(s0)) return std::numeric_limits<double>::quiet_NaN();
        return -std::expm1(f.log_sf(x) - s0);
    };
    auto left = [&](double x) {
        const double g0 = f0.cdf_left(x);
        if (!(g0 < 1.0)) return std::numeric_limits<double>::quiet_NaN();
        return (f.cdf_left(x) - g0) / (1.0 - g0);
    };
    return detail::finish_index(detail::adaptive_sup(right, left, lo, hi, grid, detail::joint_knots(f, f0)),
                                IndexKind::pi0prime_above);
}

/// Exact sup(G_m - F_n) for samples x ~ F, y ~ G.
inline Rational exact_two_sample_pi(const Sample& x, const Sample& y) {
    const PooledLayout layout(x, y);
    return Rational{layout.sup_numerator(layout.x_counts(), layout.y_counts()), layout.denominator()};
}

/// pi(F1, F2) = sup(F2 - F1): the least pi with F1 stochastically smaller
/// than F2 at contamination level pi.
inline ContaminationIndex pi_index(const Distribution& f1, const Distribution& f2, std::size_t grid = kDefaultGrid) {
    detail::require_grid(grid);
    const auto* e1 = f1.as<EmpiricalLaw>();
    const auto* e2 = f2.as<EmpiricalLaw>();
    if (e1 && e2) {
        const double v = exact_two_sample_pi(e1->sample, e2->sample).value();
        return ContaminationIndex{v, IndexKind::pi_two_sample};
    }
    const auto [lo, hi] = detail::joint_range(f1, f2);
    auto right = [&](double x) { return f2.cdf(x) - f1.cdf(x); };
    auto left = [&](double x) { return f2.cdf_left(x) - f1.cdf_left(x); };
    auto r = detail::adaptive_sup(right, left, lo, hi, grid, detail::joint_knots(f1, f2));
    if (r.value < 0.0) r.value = 0.0;  // limits at -inf and +inf are 0
    return detail::finish_index(r, IndexKind::pi_two_sample);
}

/// sup(F1 - F2) = pi(F2, F1).
inline ContaminationIndex pi_index_reversed(const Distribution& f1, const Distribution& f2,
                                            std::size_t grid = kDefaultGrid) {
    auto r = pi_index(f2, f1, grid);
    r.kind = IndexKind::pi_two_sample_reversed;
    return r;
}

/// Atom-wise check of (1 - pi) P0({s}) <= P({s}), i.e. P0 is a pi-trimming of P.
inline bool is_trimming(const DiscreteMeasure& p0, const DiscreteMeasure& p, double pi) {
    if (!(pi >= 0.0 && pi < 1.0)) throw DomainError("trimming level must lie in [0, 1)");
    for (const auto& atom : p0.atoms()) {
        if ((1.0 - pi) * atom.mass > p.mass_at(atom.location) + 1e-12) return false;
    }
    return true;
}

/// theta(F, G) = P(X <= Y) for independent X ~ F, Y ~ G.
inline double precedence_index(const Distribution& f, const Distribution& g) {
    const auto* ef = f.as<EmpiricalLaw>();
    const auto* eg = g.as<EmpiricalLaw>();
    if (eg) {
        // (1/m) sum_j F(Y_j); exact pair counting when F is empirical too.
        if (ef) {
            std::size_t pairs = 0;
            for (double yv : eg->sample.values()) pairs += ef->sample.count_le(yv);
            return static_cast<double>(pairs) /
                   (static_cast<double>(ef->sample.size()) * static_cast<double>(eg->sample.size()));
        }
        double total = 0.0;
        for (double yv : eg->sample.values()) total += f.cdf(yv);
        return total / static_cast<double>(eg->sample.size());
    }
    if (ef) {
        double total = 0.0;
        for (double xv : ef->sample.values()) total += 1.0 - g.cdf_left(xv);
        return total / static_cast<double>(ef->sample.size());
    }
    // Midpoint rule in the quantile scale: integral over u of 1 - G(F^{-1}(u)-).
    constexpr std::size_t cells = 1u << 16;
    double total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
        total += 1.0 - g.cdf_left(f.quantile(u));
    }
    return std::clamp(total / static_cast<double>(cells), 0.0, 1.0);
}

}  // namespace stocorder
