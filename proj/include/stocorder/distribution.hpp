#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "monotone_map.hpp"
#include "normal.hpp"
#include "random.hpp"
#include "sample.hpp"

namespace stocorder {

class Distribution;
using DistributionPtr = std::shared_ptr<const Distribution>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct UniformLaw {
    double lo, hi;
};

struct NormalLaw {
    double mu, sigma;
};

struct MixtureComponent {
    double weight, lo, hi;
};

struct UniformMixtureLaw {
    std::vector<MixtureComponent> components;  // sorted by lo
    bool disjoint;                             // pieces abut or are separated
};

/// F(x) = sqrt(x) on [0, 1].
struct SqrtLaw {};

struct EmpiricalLaw {
    Sample sample;
};

struct PushforwardLaw {
    DistributionPtr base;
    MonotoneMap map;
};

enum class TrimSide { lower, upper };

/// Extreme trimmings of a base law. `lower` is the stochastically smallest
/// pi-trimming (lower tail inflated), `upper` the largest (lower pi removed).
struct TrimmedLaw {
    DistributionPtr base;
    double pi;
    TrimSide side;
    double cut;  // base quantile at 1 - pi (lower) or pi (upper)
};

using Law = std::variant<UniformLaw, NormalLaw, UniformMixtureLaw, SqrtLaw, EmpiricalLaw, PushforwardLaw, TrimmedLaw>;

/// Immutable one-dimensional distribution. Cheap to copy; composite kinds
/// share their base through shared_ptr.
class Distribution {
public:
    static Distribution uniform(double lo, double hi) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw DomainError("uniform law needs finite lo < hi");
        return Distribution(UniformLaw{lo, hi});
    }

    static Distribution normal(double mu, double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
            throw DomainError("normal law needs finite mu and sigma > 0");
        return Distribution(NormalLaw{mu, sigma});
    }

    static Distribution uniform_mixture(std::vector<MixtureComponent> components) {
        if (components.empty()) throw DomainError("mixture needs at least one component");
        double total = 0.0;
        for (const auto& c : components) {
            if (!(c.weight > 0.0 && c.weight <= 1.0)) throw DomainError("mixture weights must lie in (0, 1]");
            if (!(c.lo < c.hi)) throw DomainError("mixture pieces need lo < hi");
            total += c.weight;
        }
        if (std::fabs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
        std::sort(components.begin(), components.end(),
                  [](const auto& a, const auto& b) { return a.lo < b.lo; });
        bool disjoint = true;
        for (std::size_t i = 1; i < components.size(); ++i) disjoint = disjoint && components[i].lo >= components[i - 1].hi;
        return Distribution(UniformMixtureLaw{std::move(components), disjoint});
    }

    static Distribution sqrt_law() { return Distribution(SqrtLaw{}); }

    static Distribution empirical(Sample sample) { return Distribution(EmpiricalLaw{std::move(sample)}); }

    static Distribution pushforward(const Distribution& base, MonotoneMap map) {
        return Distribution(PushforwardLaw{std::make_shared<const Distribution>(base), std::move(map)});
    }

    static Distribution trimmed(const Distribution& base, double pi, TrimSide side) {
        const double cut = side == TrimSide::lower ? base.quantile_or_bound(1.0 - pi) : base.quantile_or_bound(pi);
        return Distribution(TrimmedLaw{std::make_shared<const Distribution>(base), pi, side, cut});
    }

    const Law& law() const noexcept { return law_; }

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&law_);
    }

    /// F(x)
    double cdf(double x) const;
    /// F(x-)
    double cdf_left(double x) const;
    /// log F(x); accurate in normal tails.
    double log_cdf(double x) const;
    /// log(1 - F(x)); accurate in normal tails.
    double log_sf(double x) const;
    /// Generalized inverse inf{x : t <= F(x)}.
    double quantile(double t) const;
    /// Closed support hull [lo, hi]; infinite ends for unbounded laws.
    std::pair<double, double> support() const;
    /// Finite interval that carries all but a negligible mass (normal: +-40 sd).
    std::pair<double, double> grid_range() const;
    /// Points where the CDF jumps or loses smoothness.
    std::vector<double> knots() const;
    bool continuous() const;
    std::string describe() const;

    bool bounded() const {
        const auto [lo, hi] = support();
        return std::isfinite(lo) && std::isfinite(hi);
    }

private:
    explicit Distribution(Law law) : law_(std::move(law)) {}

    /// Quantile that falls back to the support bound at t = 0 or 1.
    double quantile_or_bound(double t) const {
        if (t <= 0.0) return support().first;
        if (t >= 1.0) return support().second;
        return quantile(t);
    }

    Law law_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double safe_log(double v) { return v > 0.0 ? std::log(v) : -kInf; }

inline double mixture_cdf(const UniformMixtureLaw& m, double x) {
    double total = 0.0;
    for (const auto& c : m.components) {
        if (x >= c.hi) total += c.weight;
        else if (x > c.lo) total += c.weight * (x - c.lo) / (c.hi - c.lo);
    }
    return clamp01(total);
}

inline std::size_t empirical_quantile_rank(std::size_t n, double t) {
    const double dn = static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(t * dn));
    k = std::clamp<std::size_t>(k, 1, n);
    while (k > 1 && static_cast<double>(k - 1) / dn >= t) --k;
    while (k < n && static_cast<double>(k) / dn < t) ++k;
    return k;
}

}  // namespace detail

inline double Distribution::cdf(double x) const {
    using detail::clamp01;
    return std::visit(
        detail::overloaded{
            [&](const UniformLaw& u) { return clamp01((x - u.lo) / (u.hi - u.lo)); },
            [&](const NormalLaw& n) { return normal::cdf((x - n.mu) / n.sigma); },
            [&](const UniformMixtureLaw& m) { return detail::mixture_cdf(m, x); },
            [&](const SqrtLaw&) { return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : std::sqrt(x)); },
            [&](const EmpiricalLaw& e) { return e.sample.ecdf(x); },
            [&](const PushforwardLaw& p) { return p.base->cdf(p.map.inverse(x)); },
            [&](const TrimmedLaw& t) {
                const double f = t.base->cdf(x);
                if (t.side == TrimSide::lower) return x >= t.cut ? 1.0 : std::min(f / (1.0 - t.pi), 1.0);
                return x < t.cut ? 0.0 : std::max((f - t.pi) / (1.0 - t.pi), 0.0);
            },
        },
        law_);
}

inline double Distribution::cdf_left(double x) const {
    return std::visit(
        detail::overloaded{
            [&](const EmpiricalLaw& e) {
                return static_cast<double>(e.sample.count_lt(x)) / static_cast<double>(e.sample.size());
            },
            [&](const PushforwardLaw& p) { return p.base->cdf_left(p.map.inverse(x)); },
            [&](const TrimmedLaw& t) {
                const double f = t.base->cdf_left(x);
                if (t.side == TrimSide::lower) return x > t.cut ? 1.0 : std::min(f / (1.0 - t.pi), 1.0);
                return x <= t.cut ? 0.0 : std::max((f - t.pi) / (1.0 - t.pi), 0.0);
            },
            [&](const auto&) { return cdf(x); },
        },
        law_);
}

inline double Distribution::log_cdf(double x) const {
    return std::visit(
        detail::overloaded{
            [&](const NormalLaw& n) { return normal::log_cdf((x - n.mu) / n.sigma); },
            [&](const PushforwardLaw& p) { return p.base->log_cdf(p.map.inverse(x)); },
            [&](const TrimmedLaw& t) {
                if (t.side == TrimSide::lower) {
                    if (x >= t.cut) return 0.0;
                    return std::min(t.base->log_cdf(x) - std::log1p(-t.pi), 0.0);
                }
                return detail::safe_log(cdf(x));
            },
            [&](const auto&) { return detail::safe_log(cdf(x)); },
        },
        law_);
}

inline double Distribution::log_sf(double x) const {
    return std::visit(
        detail::overloaded{
            [&](const NormalLaw& n) { return normal::log_sf((x - n.mu) / n.sigma); },
            [&](const PushforwardLaw& p) { return p.base->log_sf(p.map.inverse(x)); },
            [&](const TrimmedLaw& t) {
                if (t.side == TrimSide::upper) {
                    if (x < t.cut) return 0.0;
                    return std::min(t.base->log_sf(x) - std::log1p(-t.pi), 0.0);
                }
                return detail::safe_log(1.0 - cdf(x));
            },
            [&](const auto&) { return detail::safe_log(1.0 - cdf(x)); },
        },
        law_);
}

inline std::pair<double, double> Distribution::support() const {
    return std::visit(
        detail::overloaded{
            [](const UniformLaw& u) { return std::pair{u.lo, u.hi}; },
            [](const NormalLaw&) { return std::pair{-kInf, kInf}; },
            [](const UniformMixtureLaw& m) {
                double lo = kInf, hi = -kInf;
                for (const auto& c : m.components) {
                    lo = std::min(lo, c.lo);
                    hi = std::max(hi, c.hi);
                }
                return std::pair{lo, hi};
            },
            [](const SqrtLaw&) { return std::pair{0.0, 1.0}; },
            [](const EmpiricalLaw& e) { return std::pair{e.sample.min(), e.sample.max()}; },
            [](const PushforwardLaw& p) {
                const auto [lo, hi] = p.base->support();
                return std::pair{std::isfinite(lo) ? p.map(lo) : lo, std::isfinite(hi) ? p.map(hi) : hi};
            },
            [](const TrimmedLaw& t) {
                const auto [lo, hi] = t.base->support();
                return t.side == TrimSide::lower ? std::pair{lo, t.cut} : std::pair{t.cut, hi};
            },
        },
        law_);
}

inline std::pair<double, double> Distribution::grid_range() const {
    return std::visit(
        detail::overloaded{
            [](const NormalLaw& n) { return std::pair{n.mu - 40.0 * n.sigma, n.mu + 40.0 * n.sigma}; },
            [](const PushforwardLaw& p) {
                const auto [lo, hi] = p.base->grid_range();
                return std::pair{p.map(lo), p.map(hi)};
            },
            [](const TrimmedLaw& t) {
                const auto [lo, hi] = t.base->grid_range();
                return t.side == TrimSide::lower ? std::pair{lo, t.cut} : std::pair{t.cut, hi};
            },
            [this](const auto&) { return support(); },
        },
        law_);
}

inline std::vector<double> Distribution::knots() const {
    std::vector<double> out = std::visit(
        detail::overloaded{
            [](const UniformLaw& u) { return std::vector<double>{u.lo, u.hi}; },
            [](const NormalLaw&) { return std::vector<double>{}; },
            [](const UniformMixtureLaw& m) {
                std::vector<double> k;
                for (const auto& c : m.components) {
                    k.push_back(c.lo);
                    k.push_back(c.hi);
                }
                return k;
            },
            [](const SqrtLaw&) { return std::vector<double>{0.0, 1.0}; },
            [](const EmpiricalLaw& e) {
                return std::vector<double>(e.sample.values().begin(), e.sample.values().end());
            },
            [](const PushforwardLaw& p) {
                std::vector<double> k;
                for (double v : p.base->knots()) k.push_back(p.map(v));
                for (double v : p.map.knots_out()) k.push_back(v);
                return k;
            },
            [](const TrimmedLaw& t) {
                std::vector<double> k = t.base->knots();
                k.push_back(t.cut);
                return k;
            },
        },
        law_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline bool Distribution::continuous() const {
    return std::visit(
        detail::overloaded{
            [](const EmpiricalLaw&) { return false; },
            [](const PushforwardLaw& p) { return p.base->continuous(); },
            [](const TrimmedLaw& t) { return t.base->continuous(); },
            [](const auto&) { return true; },
        },
        law_);
}

inline double Distribution::quantile(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    const bool interior = t > 0.0 && t < 1.0;
    if (!interior) {
        const auto [lo, hi] = support();
        const double bound = t == 0.0 ? lo : hi;
        if (!std::isfinite(bound)) throw DomainError("quantile at 0 or 1 requires compact support");
    }
    return std::visit(
        detail::overloaded{
            [&](const UniformLaw& u) { return std::min(u.lo + t * (u.hi - u.lo), u.hi); },
            [&](const NormalLaw& n) { return n.mu + n.sigma * normal::quantile(t); },
            [&](const UniformMixtureLaw& m) {
                if (t == 0.0) return m.components.front().lo;
                if (m.disjoint) {
                    double cum = 0.0;
                    for (std::size_t i = 0; i < m.components.size(); ++i) {
                        const auto& c = m.components[i];
                        const double next = cum + c.weight;
                        if (t <= next || i + 1 == m.components.size()) {
                            const double frac = std::clamp((t - cum) / c.weight, 0.0, 1.0);
                            return c.lo + frac * (c.hi - c.lo);
                        }
                        cum = next;
                    }
                }
                auto [lo, hi] = support();
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (detail::mixture_cdf(m, mid) >= t) hi = mid;
                    else lo = mid;
                }
                return hi;
            },
            [&](const SqrtLaw&) { return t * t; },
            [&](const EmpiricalLaw& e) {
                if (t == 0.0) return e.sample.min();
                return e.sample.order_statistic(detail::empirical_quantile_rank(e.sample.size(), t));
            },
            [&](const PushforwardLaw& p) { return p.map(p.base->quantile(t)); },
            [&](const TrimmedLaw& tr) {
                const double level = tr.side == TrimSide::lower ? t * (1.0 - tr.pi) : tr.pi + t * (1.0 - tr.pi);
                if (level <= 0.0 || level >= 1.0) return level <= 0.0 ? support().first : support().second;
                return tr.base->quantile(level);
            },
        },
        law_);
}

inline std::string Distribution::describe() const {
    std::ostringstream os;
    os.precision(12);
    std::visit(detail::overloaded{
                   [&](const UniformLaw& u) { os << "Uniform(" << u.lo << "," << u.hi << ")"; },
                   [&](const NormalLaw& n) { os << "Normal(" << n.mu << "," << n.sigma << ")"; },
                   [&](const UniformMixtureLaw& m) {
                       os << "UniformMixture[";
                       for (std::size_t i = 0; i < m.components.size(); ++i) {
                           const auto& c = m.components[i];
                           os << (i ? "," : "") << "(" << c.weight << "," << c.lo << "," << c.hi << ")";
                       }
                       os << "]";
                   },
                   [&](const SqrtLaw&) { os << "SqrtLaw"; },
                   [&](const EmpiricalLaw& e) { os << "Empirical(n=" << e.sample.size() << ")"; },
                   [&](const PushforwardLaw& p) { os << "Pushforward(" << p.base->describe() << ")"; },
                   [&](const TrimmedLaw& t) {
                       os << (t.side == TrimSide::lower ? "TrimLower(" : "TrimUpper(") << t.base->describe() << ","
                          << t.pi << ")";
                   },
               },
               law_);
    return os.str();
}

// ---------------------------------------------------------------------------
// Free-function interface.

inline double cdf_eval(const Distribution& dist, double x) { return dist.cdf(x); }

inline double quantile_eval(const Distribution& dist, double t) { return dist.quantile(t); }

/// k i.i.d. draws by the quantile transform of the generator's uniform stream.
inline Sample sample(const Distribution& dist, SeededGenerator& rng, std::size_t k) {
    if (k < 1) throw DomainError("sample size must be at least 1");
    std::vector<double> out(k);
    if (const auto* e = dist.as<EmpiricalLaw>()) {
        const auto values = e->sample.values();
        for (auto& v : out) v = values[rng.index(values.size())];
    } else {
        for (auto& v : out) v = dist.quantile(rng.uniform());
    }
    return Sample(std::move(out));
}

/// Law of T(X) for X ~ dist. Empirical inputs map their atoms directly.
inline Distribution pushforward(const Distribution& dist, const MonotoneMap& map) {
    if (const auto* e = dist.as<EmpiricalLaw>()) {
        std::vector<double> mapped;
        mapped.reserve(e->sample.size());
        for (double v : e->sample.values()) mapped.push_back(map(v));
        return Distribution::empirical(Sample(std::move(mapped)));
    }
    return Distribution::pushforward(dist, map);
}

enum class LeastFavorable {
    for_boundary,            // F_{pi,b}: two-piece mixture, singleton contact point
    for_power,               // F_{pi,a} = U(pi, 1 + pi)
    against_boundary,        // U(pi, 1 + pi)
    against_power,           // two-piece mixture with contact at (1 + pi) / 2
    for_boundary_bigpi_left, // U(pi, 1), when lambda * pi > 1/2
    for_boundary_bigpi_right // (1 - pi) U(0, 1) + pi U(1, 1 + pi (1 - pi)), when (1 - lambda) pi > 1/2
};

/// Least-favorable laws against G = U(0, 1); each has pi(D, G) = pi.
inline Distribution make_least_favorable(LeastFavorable family, double pi, double lambda) {
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("least-favorable family needs pi in (0, 1)");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("least-favorable family needs lambda in (0, 1)");
    switch (family) {
        case LeastFavorable::for_power:
        case LeastFavorable::against_boundary:
            return Distribution::uniform(pi, 1.0 + pi);
        case LeastFavorable::for_boundary: {
            if (lambda * pi > 0.5 || (1.0 - lambda) * pi > 0.5)
                throw ConfigError("FOR_BOUNDARY requires lambda*pi <= 1/2 and (1-lambda)*pi <= 1/2; use a BIGPI variant");
            const double w = 0.5 - pi * lambda;
            const double split = 0.5 + pi * (1.0 - lambda);
            const double top = 1.0 + 0.5 * pi - lambda * pi * pi;
            if (!(w > 0.0) || !(top > split)) throw ConfigError("FOR_BOUNDARY parameters give a degenerate piece");
            return Distribution::uniform_mixture({{w, 0.0, split}, {1.0 - w, split, top}});
        }
        case LeastFavorable::against_power: {
            const double w = 0.5 * (1.0 - pi);
            const double split = 0.5 * (1.0 + pi);
            return Distribution::uniform_mixture({{w, 0.0, split}, {1.0 - w, split, 1.0 + 0.5 * pi * (1.0 - pi)}});
        }
        case LeastFavorable::for_boundary_bigpi_left:
            if (!(lambda * pi > 0.5)) throw ConfigError("FOR_BOUNDARY_BIGPI_LEFT requires lambda*pi > 1/2");
            return Distribution::uniform(pi, 1.0);
        case LeastFavorable::for_boundary_bigpi_right:
            if (!((1.0 - lambda) * pi > 0.5))
                throw ConfigError("FOR_BOUNDARY_BIGPI_RIGHT requires (1-lambda)*pi > 1/2");
            return Distribution::uniform_mixture({{1.0 - pi, 0.0, 1.0}, {pi, 1.0, 1.0 + pi * (1.0 - pi)}});
    }
    throw ConfigError("unknown least-favorable family");
}

}  // namespace stocorder
