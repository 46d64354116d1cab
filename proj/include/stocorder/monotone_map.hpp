#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace stocorder {

/// Strictly increasing, continuous, piecewise-linear map of the real line.
/// Defined by its knots; beyond the outer knots the outer segments extend
/// linearly.
class MonotoneMap {
public:
    MonotoneMap(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (xs_.size() < 2 || xs_.size() != ys_.size())
            throw DomainError("monotone map needs at least two matching knots");
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            if (!(xs_[i] > xs_[i - 1]) || !(ys_[i] > ys_[i - 1]))
                throw DomainError("monotone map knots must be strictly increasing (positive slopes)");
        }
    }

    static MonotoneMap identity() { return MonotoneMap({0.0, 1.0}, {0.0, 1.0}); }
    static MonotoneMap affine(double scale, double shift) {
        return MonotoneMap({0.0, 1.0}, {shift, shift + scale});
    }
    /// Map through (breakpoint, value) pairs given as a start value and segment slopes.
    static MonotoneMap from_slopes(std::vector<double> breakpoints, double value_at_first,
                                   const std::vector<double>& slopes) {
        if (slopes.size() + 1 != breakpoints.size())
            throw DomainError("monotone map needs one slope per segment");
        std::vector<double> ys{value_at_first};
        for (std::size_t i = 0; i < slopes.size(); ++i) {
            if (!(slopes[i] > 0.0)) throw DomainError("monotone map slopes must be positive");
            ys.push_back(ys.back() + slopes[i] * (breakpoints[i + 1] - breakpoints[i]));
        }
        return MonotoneMap(std::move(breakpoints), std::move(ys));
    }

    double operator()(double x) const noexcept { return interpolate(xs_, ys_, x); }
    double inverse(double y) const noexcept { return interpolate(ys_, xs_, y); }

    std::span<const double> knots_in() const noexcept { return xs_; }
    std::span<const double> knots_out() const noexcept { return ys_; }

private:
    static double interpolate(const std::vector<double>& from, const std::vector<double>& to, double v) noexcept {
        std::size_t i = static_cast<std::size_t>(std::upper_bound(from.begin(), from.end(), v) - from.begin());
        i = std::clamp<std::size_t>(i, 1, from.size() - 1);
        const double x0 = from[i - 1], x1 = from[i];
        const double y0 = to[i - 1], y1 = to[i];
        if (v == x0) return y0;
        if (v == x1) return y1;
        return y0 + (v - x0) * (y1 - y0) / (x1 - x0);
    }

    std::vector<double> xs_;
    std::vector<double> ys_;
};

}  // namespace stocorder
