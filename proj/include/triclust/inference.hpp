#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "triclust/combinat.hpp"
#include "triclust/error.hpp"
#include "triclust/kernel.hpp"
#include "triclust/normal.hpp"
#include "triclust/partition.hpp"
#include "triclust/ustat.hpp"
#include "triclust/variance.hpp"

namespace triclust {

// One-sided test result: reject group homogeneity for large standardized Bn.
struct TestOutcome {
  double bn = 0.0;
  double variance = 0.0;
  double std_bn = 0.0;
  double p_value = 1.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  bool reject = false;
  BigInt n_star = 1;  // multiplicity behind the p-value
};

namespace detail {

// n* at or above which the exact power form gives way to the Gumbel limit.
inline const BigInt kGumbelSwitch = BigInt(1) << 28;

// Clamp to [0, 1], flushing subnormals to zero. NaN maps to 1 (never reject
// on garbage).
inline double clamp_pvalue(double p) {
  if (std::isnan(p)) return 1.0;
  if (p < std::numeric_limits<double>::min()) return 0.0;
  return p > 1.0 ? 1.0 : p;
}

}  // namespace detail

// p = 1 - Phi(x)^nstar evaluated in log space. Valid while nstar is exactly
// representable as a double (the caller switches to the Gumbel form long
// before that stops being true).
inline double max_pvalue_exact(double x, double nstar) {
  const double t = nstar * log_norm_cdf(x);
  return detail::clamp_pvalue(-std::expm1(t));
}

// Gumbel limit of the maximum of nstar standard normals, with the classical
// norming constants
//   a = sqrt(2 ln n*) - (ln ln n* + ln 4 pi) / (2 sqrt(2 ln n*)),  b = 1/sqrt(2 ln n*).
inline double max_pvalue_gumbel(double x, double ln_nstar) {
  const double root = std::sqrt(2.0 * ln_nstar);
  const double a = root - (std::log(ln_nstar) + std::log(4.0 * std::numbers::pi)) / (2.0 * root);
  const double b = 1.0 / root;
  const double z = (x - a) / b;
  // 1 - exp(-exp(-z)); exp(-z) may overflow to inf, expm1(-inf) = -1 is fine.
  return detail::clamp_pvalue(-std::expm1(-std::exp(-z)));
}

// p-value of the maximum standardized Bn over all gamma3(n) three-group
// configurations, exact power form below the 2^28 switch point and the
// Gumbel regime at or above it.
inline double max_test_pvalue(double std_bn, int n) {
  const PartitionCount counts = total_count(n);
  if (counts.gamma3 < detail::kGumbelSwitch)
    return max_pvalue_exact(std_bn, counts.gamma3.convert_to<double>());
  return max_pvalue_gumbel(std_bn, counts.log_gamma3);
}

// Smallest standardized Bn that is significant at level alpha under the max
// test, by bisection (max_test_pvalue is monotone decreasing in x).
inline double max_test_critical(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0, 1)");
  double lo = -40.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (max_test_pvalue(mid, n) < alpha)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// Homogeneity test for three pre-specified groups: one-sided p = 1 - Phi(std Bn)
// with no multiplicity (n* = 1).
inline TestOutcome utest3(const KernelMatrix& k, const Partition3& p, const VarianceModel& model,
                          double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0, 1)");
  if (model.n != k.n)
    throw std::invalid_argument("variance model was built for n = " + std::to_string(model.n) +
                                ", kernel has n = " + std::to_string(k.n));
  if (model.degenerate)
    throw DegenerateVarianceError(
        "degenerate variance: resampled Var(Bn) is zero (constant kernel?)");
  TestOutcome out;
  out.bn = bn_statistic(k, p).bn;
  out.variance = var_for(model, p.sizes());
  out.std_bn = out.bn / std::sqrt(out.variance);
  out.p_value = detail::clamp_pvalue(norm_sf(out.std_bn));
  out.alpha = alpha;
  out.reject = out.p_value < alpha;
  out.n_star = 1;
  return out;
}

}  // namespace triclust
