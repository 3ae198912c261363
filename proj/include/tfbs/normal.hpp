#pragma once

#include <cmath>
#include <numbers>

namespace tfbs {

// Standard normal CDF through the complementary error function:
//   Phi(x) = erfc(-x / sqrt(2)) / 2
// libm's erfc is accurate to a few ulps over the whole real line, so the
// absolute error of Phi stays below 1e-15 and the lower tail keeps full
// relative precision (no 1 - erf(x) cancellation).
inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

inline double normal_pdf(double x) noexcept {
    constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace tfbs
