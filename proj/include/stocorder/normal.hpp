#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"

namespace stocorder::normal {

inline double pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF through the complementary error function.
inline double cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// log Phi(x), accurate deep into the left tail where Phi underflows.
inline double log_cdf(double x) noexcept {
    if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
    // Mills-ratio asymptotic series; truncation error below 1e-12 for x <= -30.
    const double z = 1.0 / (x * x);
    const double series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - 105.0 * z)));
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

/// log(1 - Phi(x)).
inline double log_sf(double x) noexcept { return log_cdf(-x); }

/// Inverse of the standard normal CDF: Wichura's AS241 (PPND16) rational
/// approximations followed by one Newton step on the erfc-based CDF.
inline double quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("normal quantile: probability must lie in [0, 1]");
    }
    const double q = p - 0.5;
    double x;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                 45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
              133.14166789178437745) * r + 3.387132872796366608);
        const double den =
            (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                 21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
              42.313330701600911252) * r + 1.0);
        x = q * num / den;
    } else {
        double r = q < 0.0 ? p : 1.0 - p;
        r = std::sqrt(-std::log(r));
        double num, den;
        if (r <= 5.0) {
            r -= 1.6;
            num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                       1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                    4.6303378461565452959) * r + 1.42343711074968357734);
            den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                       0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                    2.05319162663775882187) * r + 1.0);
        } else {
            r -= 5.0;
            num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                       0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                    5.4637849111641143699) * r + 6.6579046435011037772);
            den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                       7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                    0.59983220655588793769) * r + 1.0);
        }
        x = num / den;
        if (q < 0.0) x = -x;
    }
    // Newton refinement; skipped where the density underflows.
    const double density = pdf(x);
    if (density > 1e-300) {
        const double err = q < 0.0 ? cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
        x -= err / density;
    }
    return x;
}

}  // namespace stocorder::normal
