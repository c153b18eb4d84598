#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "triclust/error.hpp"
#include "triclust/kernel.hpp"
#include "triclust/parallel.hpp"
#include "triclust/partition.hpp"
#include "triclust/rng.hpp"
#include "triclust/ustat.hpp"

namespace triclust {

// Pair weights of Bn's second-order representation: 1 between groups,
// -(n - n_g)/(n_g - 1) inside group g. Defined only when every group has at
// least two elements. sum_squares() is the direct route used to cross-check
// the closed form c_n.
struct EtaWeights {
  int n = 0;
  std::array<int, 3> sizes{};

  EtaWeights(int total, std::array<int, 3> group_sizes) : n(total), sizes(group_sizes) {
    if (sizes[0] + sizes[1] + sizes[2] != n)
      throw std::invalid_argument("eta weights: sizes must sum to n");
    for (int g = 0; g < 3; ++g)
      if (sizes[g] < 2) throw std::invalid_argument("eta weights need all group sizes >= 2");
  }

  static constexpr double between = 1.0;

  double within(int g) const { return -double(n - sizes[g]) / double(sizes[g] - 1); }

  double sum_squares() const {
    double total = 0.0;
    int within_pairs = 0;
    for (int g = 0; g < 3; ++g) {
      const int pairs = sizes[g] * (sizes[g] - 1) / 2;
      within_pairs += pairs;
      total += pairs * within(g) * within(g);
    }
    const int between_pairs = n * (n - 1) / 2 - within_pairs;
    return total + between_pairs;
  }
};

// C_n(n1, n2) = sum of squared eta over pairs, in closed form:
// 2 C(n,2) { 1 + (1/n) sum_g (n - n_g) / (2 (n_g - 1)) }.
inline double c_n(int n, int n1, int n2) {
  const int n3 = n - n1 - n2;
  if (n1 < 2 || n2 < 2 || n3 < 2)
    throw std::invalid_argument("c_n needs all group sizes >= 2, got (" + std::to_string(n1) +
                                "," + std::to_string(n2) + "," + std::to_string(n3) + ")");
  const std::array<int, 3> sizes{n1, n2, n3};
  double inner = 0.0;
  for (int g = 0; g < 3; ++g) inner += double(n - sizes[g]) / (2.0 * double(sizes[g] - 1));
  return double(n) * double(n - 1) * (1.0 + inner / double(n));
}

// First-order coefficient of the extended (singleton) variance.
inline double zeta1(int n) {
  if (n < 5) throw std::invalid_argument("zeta1 needs n >= 5");
  return 4.0 / (double(n) * double(n - 1));
}

// Second-order coefficient of the extended variance, n1 = 1, n3 = n - n2 - 1.
// Symmetric under n2 <-> n3.
inline double zeta2(int n, int n2) {
  const int n3 = n - n2 - 1;
  if (n < 5 || n2 < 2 || n3 < 2)
    throw std::invalid_argument("zeta2 needs n >= 5 and 2 <= n2 <= n-3, got n2 = " +
                                std::to_string(n2));
  const double dn = n;
  const double dm = n - 1;
  return 4.0 / (dn * dn * dm) + 4.0 * n2 * n3 / (dn * dn * dm * dm) +
         2.0 * n2 * (2.0 + n3) * (2.0 + n3) / (dn * dn * (n2 - 1.0) * dm * dm) +
         2.0 * n3 * (2.0 + n2) * (2.0 + n2) / (dn * dn * (n3 - 1.0) * dm * dm);
}

// Resampled reference variances plus the coefficients that reweight them to
// any other group-size configuration.
struct VarianceModel {
  int n = 0;
  double v_ref = 0.0;                  // Var(Bn) at ref_sizes, all >= 2
  std::array<int, 3> ref_sizes{};
  double tau2_hat = 0.0;               // v_ref / (C_n(ref) (2/(n(n-1)))^2)
  double v_singleton_ref = 0.0;        // Var(extended Bn) at (1, singleton_ref_n2, rest)
  int singleton_ref_n2 = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;             // constant-kernel warning: variances ~ 0
};

namespace detail {

// Permutation draw: assign the n observed indices into groups of the given
// sizes uniformly at random, then evaluate Bn. Replicate r draws from its own
// (seed, tag, r) stream, so runs are identical for any thread count.
inline std::vector<double> resample_bn(const KernelMatrix& k, const std::array<int, 3>& sizes,
                                       int reps, std::uint64_t seed, std::uint64_t tag,
                                       int threads) {
  std::vector<double> values(reps);
  std::vector<int> base(k.n);
  for (int i = 0; i < k.n; ++i) base[i] = i;
  parallel_for(reps, threads, [&](std::int64_t r) {
    Rng rng = Rng::stream(seed, tag, static_cast<std::uint64_t>(r));
    std::vector<int> order = base;
    rng.shuffle(order);
    std::vector<int> groups0(k.n);
    int pos = 0;
    for (int g = 0; g < 3; ++g)
      for (int c = 0; c < sizes[g]; ++c) groups0[order[pos++]] = g;
    values[r] = bn_from_groups0(k, groups0).bn;
  });
  return values;
}

inline double sample_variance(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / double(xs.size() - 1);
}

inline double kernel_scale(const KernelMatrix& k) {
  double m = 0.0;
  for (double v : k.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

// Estimates Var(Bn) under the permutation null at two reference
// configurations: balanced sizes (n1 = n2 = floor(n/3)) for the all->=2 case
// and (1, floor((n-1)/2), rest) for the singleton case. Everything else is
// reweighted analytically from these two runs.
inline VarianceModel estimate_reference(const KernelMatrix& k, int reps, std::uint64_t seed,
                                        int threads = 1) {
  if (reps < 100) throw std::invalid_argument("variance estimation needs reps >= 100, got " +
                                              std::to_string(reps));
  if (k.n < 6)
    throw std::invalid_argument("variance estimation needs n >= 6, got n = " +
                                std::to_string(k.n));
  VarianceModel model;
  model.n = k.n;
  model.reps = reps;
  model.seed = seed;

  const int third = k.n / 3;
  model.ref_sizes = {third, third, k.n - 2 * third};
  const auto ref_draws =
      detail::resample_bn(k, model.ref_sizes, reps, seed, stream_tag::kVarianceRef, threads);
  model.v_ref = detail::sample_variance(ref_draws);

  const double coeff = 2.0 / (double(k.n) * double(k.n - 1));
  model.tau2_hat =
      model.v_ref / (c_n(k.n, model.ref_sizes[0], model.ref_sizes[1]) * coeff * coeff);

  model.singleton_ref_n2 = (k.n - 1) / 2;
  const std::array<int, 3> singleton_sizes{1, model.singleton_ref_n2,
                                           k.n - 1 - model.singleton_ref_n2};
  const auto singleton_draws = detail::resample_bn(k, singleton_sizes, reps, seed,
                                                   stream_tag::kVarianceSingleton, threads);
  model.v_singleton_ref = detail::sample_variance(singleton_draws);

  // Constant kernels produce Bn identically zero up to roundoff.
  const double scale = detail::kernel_scale(k);
  const double floor = 1e-24 * scale * scale;
  model.degenerate = !(model.v_ref > floor) || !(model.v_singleton_ref > floor);
  return model;
}

// Var(Bn) for an arbitrary legal configuration: the C_n ratio against v_ref
// when all sizes are >= 2, the zeta2 shift against v_singleton_ref when one
// size is 1.
inline double var_for(const VarianceModel& model, const GroupSizes& sizes) {
  if (sizes.total() != model.n)
    throw std::invalid_argument("var_for: sizes sum to " + std::to_string(sizes.total()) +
                                " but model has n = " + std::to_string(model.n));
  if (!sizes.legal()) throw std::invalid_argument("var_for: illegal group sizes");
  if (sizes.singleton_count() == 0) {
    return model.v_ref * c_n(model.n, sizes.n1, sizes.n2) /
           c_n(model.n, model.ref_sizes[0], model.ref_sizes[1]);
  }
  const auto sorted = sizes.sorted();  // singleton first; zeta2 is n2<->n3 symmetric
  return model.v_singleton_ref +
         (zeta2(model.n, sorted[1]) - zeta2(model.n, model.singleton_ref_n2)) * model.tau2_hat;
}

}  // namespace triclust
