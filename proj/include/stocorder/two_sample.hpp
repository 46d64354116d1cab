#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sample.hpp"

namespace stocorder {

/// Exact fraction num / den with den > 0.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

    Rational reduced() const noexcept {
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        return g == 0 ? *this : Rational{num / g, den / g};
    }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) noexcept {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
};

/// Distinct pooled locations of two samples with the number of X and Y
/// observations sitting at each. The right-continuous value of G_m - F_n at
/// location l is (K_l * n - J_l * m) / (n m), where K_l and J_l are the
/// cumulative Y and X counts up to and including l.
class PooledLayout {
public:
    PooledLayout(const Sample& x, const Sample& y) : n_(x.size()), m_(y.size()) {
        const auto xs = x.values();
        const auto ys = y.values();
        x_loc_.resize(n_);
        y_loc_.resize(m_);
        std::size_t i = 0, j = 0;
        while (i < n_ || j < m_) {
            const double next = j == m_ ? xs[i] : (i == n_ ? ys[j] : std::min(xs[i], ys[j]));
            const auto id = static_cast<std::uint32_t>(locations_.size());
            locations_.push_back(next);
            std::int64_t cx = 0, cy = 0;
            while (j < m_ && ys[j] == next) {
                y_loc_[j++] = id;
                ++cy;
            }
            while (i < n_ && xs[i] == next) {
                x_loc_[i++] = id;
                ++cx;
            }
            x_at_.push_back(cx);
            y_at_.push_back(cy);
        }
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    std::size_t size() const noexcept { return locations_.size(); }
    std::span<const double> locations() const noexcept { return locations_; }
    std::span<const std::uint32_t> x_location_ids() const noexcept { return x_loc_; }
    std::span<const std::uint32_t> y_location_ids() const noexcept { return y_loc_; }
    std::span<const std::int64_t> x_counts() const noexcept { return x_at_; }
    std::span<const std::int64_t> y_counts() const noexcept { return y_at_; }
    std::int64_t denominator() const noexcept { return static_cast<std::int64_t>(n_) * static_cast<std::int64_t>(m_); }

    /// Numerators (K_l n - J_l m) for the given per-location counts.
    void numerators(std::span<const std::int64_t> x_at, std::span<const std::int64_t> y_at,
                    std::vector<std::int64_t>& out) const {
        out.resize(size());
        const auto n = static_cast<std::int64_t>(n_);
        const auto m = static_cast<std::int64_t>(m_);
        std::int64_t k = 0, jx = 0;
        for (std::size_t l = 0; l < size(); ++l) {
            k += y_at[l];
            jx += x_at[l];
            out[l] = k * n - jx * m;
        }
    }

    /// max(0, max_l numerator_l): the exact numerator of sup(G_m - F_n).
    std::int64_t sup_numerator(std::span<const std::int64_t> x_at, std::span<const std::int64_t> y_at) const {
        const auto n = static_cast<std::int64_t>(n_);
        const auto m = static_cast<std::int64_t>(m_);
        std::int64_t k = 0, jx = 0, best = 0;
        for (std::size_t l = 0; l < size(); ++l) {
            k += y_at[l];
            jx += x_at[l];
            best = std::max(best, k * n - jx * m);
        }
        return best;
    }

private:
    std::size_t n_, m_;
    std::vector<double> locations_;
    std::vector<std::uint32_t> x_loc_, y_loc_;
    std::vector<std::int64_t> x_at_, y_at_;
};

}  // namespace stocorder
