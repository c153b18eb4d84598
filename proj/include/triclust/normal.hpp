#pragma once

#include <cmath>
#include <numbers>

namespace triclust {

namespace detail {

// log of the upper tail Q(z) for large z via the asymptotic expansion
// Q(z) = phi(z)/z (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - ...).
inline double log_norm_sf_tail(double z) {
  const double z2 = z * z;
  const double series = -1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) +
                        105.0 / (z2 * z2 * z2 * z2);
  return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(series);
}

}  // namespace detail

// Upper tail Q(x) = P(Z > x) of the standard normal.
inline double norm_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// log Q(x), accurate far into the upper tail where erfc underflows.
inline double log_norm_sf(double x) {
  if (x > 35.0) return detail::log_norm_sf_tail(x);
  if (x < -8.0) {
    // Q(x) = 1 - Q(-x) with Q(-x) tiny; log1p keeps the digits.
    const double q_neg = -x > 35.0 ? std::exp(detail::log_norm_sf_tail(-x)) : norm_sf(-x);
    return std::log1p(-q_neg);
  }
  return std::log(norm_sf(x));
}

// log Phi(x), avoiding the cancellation of log(1 - Q) in both tails.
inline double log_norm_cdf(double x) {
  if (x >= -1.0) return std::log1p(-norm_sf(x));
  return log_norm_sf(-x);
}

}  // namespace triclust
