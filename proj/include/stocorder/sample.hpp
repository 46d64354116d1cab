#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace stocorder {

/// A sorted, non-empty sequence of finite observations.
class Sample {
public:
    explicit Sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw DomainError("sample must contain at least one observation");
        for (double v : values_) {
            if (!std::isfinite(v)) throw DomainError("sample values must be finite");
        }
        std::sort(values_.begin(), values_.end());
    }

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double min() const noexcept { return values_.front(); }
    double max() const noexcept { return values_.back(); }

    /// #{values <= x}
    std::size_t count_le(double x) const noexcept {
        return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), x) - values_.begin());
    }
    /// #{values < x}
    std::size_t count_lt(double x) const noexcept {
        return static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), x) - values_.begin());
    }

    double ecdf(double x) const noexcept { return static_cast<double>(count_le(x)) / static_cast<double>(size()); }

    /// k-th order statistic, 1-based.
    double order_statistic(std::size_t k) const {
        if (k < 1 || k > size()) throw DomainError("order statistic index out of range");
        return values_[k - 1];
    }

    friend bool operator==(const Sample&, const Sample&) = default;

private:
    std::vector<double> values_;
};

}  // namespace stocorder
