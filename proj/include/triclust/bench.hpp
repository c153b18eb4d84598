#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "triclust/kernel.hpp"
#include "triclust/matrix.hpp"
#include "triclust/parallel.hpp"
#include "triclust/rng.hpp"
#include "triclust/search.hpp"
#include "triclust/variance.hpp"

namespace triclust {

// Simulation scenario: three groups of i.i.d. normal rows with per-coordinate
// means (m1, m2, m3) and standard deviation one.
struct Scenario {
  int n = 0;
  int L = 0;
  std::array<int, 3> sizes{};
  std::array<double, 3> means{};
  int reps = 1;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

inline void validate(const Scenario& s) {
  if (s.sizes[0] + s.sizes[1] + s.sizes[2] != s.n)
    throw std::invalid_argument("scenario sizes (" + std::to_string(s.sizes[0]) + "," +
                                std::to_string(s.sizes[1]) + "," + std::to_string(s.sizes[2]) +
                                ") do not sum to n = " + std::to_string(s.n));
  if (s.sizes[0] < 1 || s.sizes[1] < 1 || s.sizes[2] < 1)
    throw std::invalid_argument("scenario needs three non-empty groups");
  if (s.L < 1) throw std::invalid_argument("scenario needs L >= 1");
  if (s.reps < 1) throw std::invalid_argument("scenario needs reps >= 1");
}

// Data matrix plus true labels for one replicate; rows are grouped in label
// order. Deterministic given (seed, replicate).
inline std::pair<Matrix, std::vector<int>> simulate_dataset(const Scenario& s, int replicate) {
  validate(s);
  Matrix data(static_cast<std::size_t>(s.n), static_cast<std::size_t>(s.L));
  std::vector<int> labels(s.n);
  Rng rng = Rng::stream(s.seed, stream_tag::kSimulate, static_cast<std::uint64_t>(replicate));
  std::size_t row = 0;
  for (int g = 0; g < 3; ++g) {
    for (int c = 0; c < s.sizes[g]; ++c, ++row) {
      labels[row] = g + 1;
      double* x = data.row(row);
      for (int l = 0; l < s.L; ++l) x[l] = s.means[g] + rng.normal();
    }
  }
  return {std::move(data), std::move(labels)};
}

// Hubert-Arabie adjusted Rand index; 1 for identical partitions, invariant to
// label permutation.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("ARI needs equal label vector lengths, got " +
                                std::to_string(a.size()) + " and " + std::to_string(b.size()));
  if (a.size() < 2) throw std::invalid_argument("ARI needs at least two items");
  std::map<std::pair<int, int>, long long> cells;
  std::map<int, long long> row_sums, col_sums;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++row_sums[a[i]];
    ++col_sums[b[i]];
  }
  const auto choose2 = [](long long m) { return 0.5 * double(m) * double(m - 1); };
  double index = 0.0, row_pairs = 0.0, col_pairs = 0.0;
  for (const auto& [key, count] : cells) index += choose2(count);
  for (const auto& [label, count] : row_sums) row_pairs += choose2(count);
  for (const auto& [label, count] : col_sums) col_pairs += choose2(count);
  const double total_pairs = choose2(static_cast<long long>(a.size()));
  const double expected = row_pairs * col_pairs / total_pairs;
  const double max_index = 0.5 * (row_pairs + col_pairs);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

namespace detail {

inline double sq_dist(const double* x, const double* y, std::size_t dim) {
  double s = 0.0;
  for (std::size_t l = 0; l < dim; ++l) {
    const double d = x[l] - y[l];
    s += d * d;
  }
  return s;
}

}  // namespace detail

// Lloyd's algorithm with distance-weighted greedy seeding, best of `restarts`
// by within-cluster sum of squares. Empty clusters are refilled with the
// point farthest from its assigned centroid. Returns labels 1..k.
inline std::vector<int> kmeans(const Matrix& data, int k, std::uint64_t seed, int restarts = 10) {
  const int n = static_cast<int>(data.rows);
  const std::size_t dim = data.cols;
  if (k < 1 || k > n)
    throw std::invalid_argument("kmeans needs 1 <= k <= n, got k = " + std::to_string(k) +
                                ", n = " + std::to_string(n));
  if (restarts < 1) throw std::invalid_argument("kmeans needs restarts >= 1");

  std::vector<int> best_labels(n, 1);
  double best_wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(seed, stream_tag::kKmeans, static_cast<std::uint64_t>(r));

    // Seeding: first center uniform, then sample proportionally to the
    // squared distance from the nearest chosen center.
    std::vector<std::size_t> centers;
    centers.push_back(rng.below(static_cast<std::uint64_t>(n)));
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const std::size_t c : centers)
          nearest = std::min(nearest, detail::sq_dist(data.row(i), data.row(c), dim));
        d2[i] = nearest;
        total += nearest;
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        const double u = rng.uniform01() * total;
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
          cum += d2[i];
          if (u < cum) {
            pick = static_cast<std::size_t>(i);
            break;
          }
        }
        if (d2[pick] == 0.0) {  // u landed past the last positive mass
          for (int i = n - 1; i >= 0; --i)
            if (d2[i] > 0.0) {
              pick = static_cast<std::size_t>(i);
              break;
            }
        }
      } else {  // duplicates everywhere: take the first unchosen point
        std::vector<char> used(n, 0);
        for (const std::size_t c : centers) used[c] = 1;
        for (int i = 0; i < n; ++i)
          if (!used[i]) {
            pick = static_cast<std::size_t>(i);
            break;
          }
      }
      centers.push_back(pick);
    }

    Matrix centroids(static_cast<std::size_t>(k), dim);
    for (int c = 0; c < k; ++c)
      for (std::size_t l = 0; l < dim; ++l) centroids(c, l) = data(centers[c], l);

    std::vector<int> assign(n, 0);
    std::vector<int> counts(k, 0);
    for (int iter = 0; iter < 200; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int nearest = 0;
        double nd = detail::sq_dist(data.row(i), centroids.row(0), dim);
        for (int c = 1; c < k; ++c) {
          const double d = detail::sq_dist(data.row(i), centroids.row(c), dim);
          if (d < nd) {
            nd = d;
            nearest = c;
          }
        }
        if (assign[i] != nearest) {
          assign[i] = nearest;
          changed = true;
        }
      }
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n; ++i) ++counts[assign[i]];
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        // Refill an empty cluster with the point farthest from its centroid.
        int far = 0;
        double fd = -1.0;
        for (int i = 0; i < n; ++i) {
          if (counts[assign[i]] <= 1) continue;
          const double d = detail::sq_dist(data.row(i), centroids.row(assign[i]), dim);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        --counts[assign[far]];
        assign[far] = c;
        ++counts[c];
        changed = true;
      }
      for (int c = 0; c < k; ++c)
        for (std::size_t l = 0; l < dim; ++l) centroids(c, l) = 0.0;
      for (int i = 0; i < n; ++i)
        for (std::size_t l = 0; l < dim; ++l) centroids(assign[i], l) += data(i, l);
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0)
          for (std::size_t l = 0; l < dim; ++l) centroids(c, l) /= double(counts[c]);
      if (!changed && iter > 0) break;
    }

    double wcss = 0.0;
    for (int i = 0; i < n; ++i) wcss += detail::sq_dist(data.row(i), centroids.row(assign[i]), dim);
    if (wcss < best_wcss) {
      best_wcss = wcss;
      for (int i = 0; i < n; ++i) best_labels[i] = assign[i] + 1;
    }
  }
  return best_labels;
}

enum class ClusterMethod { kUclust3, kKmeans };

inline const char* to_string(ClusterMethod m) {
  return m == ClusterMethod::kUclust3 ? "uclust3" : "kmeans";
}

struct StudyOptions {
  int threads = 1;         // across replicates; inner work stays serial
  int variance_reps = 2000;
  int restarts = 20;
  int kmeans_restarts = 20;
};

struct StudyRow {
  Scenario scenario;
  std::string method;
  double power = std::numeric_limits<double>::quiet_NaN();
  double mean_ari = std::numeric_limits<double>::quiet_NaN();
  double sd_ari = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return Rng::stream(seed, tag, index).next_u64();
}

}  // namespace detail

// Empirical power of the stage-1 homogeneity test: the fraction of replicates
// whose maximum standardized Bn rejects at scenario.alpha.
inline StudyRow power_study(const Scenario& s, const StudyOptions& opt = {}) {
  validate(s);
  std::vector<char> rejected(s.reps, 0);
  parallel_for(s.reps, opt.threads, [&](std::int64_t r) {
    const auto sim = simulate_dataset(s, static_cast<int>(r));
    const KernelMatrix k = kernel_matrix(sim.first, KernelKind::kMeanSquaredDifference);
    const VarianceModel model = estimate_reference(
        k, opt.variance_reps, detail::derive_seed(s.seed, stream_tag::kStudyVariance, r));
    SearchConfig cfg;
    cfg.restarts = opt.restarts;
    cfg.seed = detail::derive_seed(s.seed, stream_tag::kStudySearch, r);
    const auto found = maximize_std_bn(k, model, cfg, s.alpha);
    rejected[r] = found.second.p_value < s.alpha;
  });
  StudyRow row;
  row.scenario = s;
  row.method = "homogeneity";
  long long count = 0;
  for (char c : rejected) count += c;
  row.power = double(count) / double(s.reps);
  return row;
}

// Mean adjusted Rand index of a clustering method against the simulated
// truth. A homogeneous uclust3 verdict scores against the all-one-group
// labeling.
inline StudyRow ari_study(const Scenario& s, ClusterMethod method, const StudyOptions& opt = {}) {
  validate(s);
  std::vector<double> ari(s.reps, 0.0);
  parallel_for(s.reps, opt.threads, [&](std::int64_t r) {
    const auto [data, truth] = simulate_dataset(s, static_cast<int>(r));
    std::vector<int> labels;
    if (method == ClusterMethod::kKmeans) {
      labels = kmeans(data, 3, detail::derive_seed(s.seed, stream_tag::kStudyKmeans, r),
                      opt.kmeans_restarts);
    } else {
      const KernelMatrix k = kernel_matrix(data, KernelKind::kMeanSquaredDifference);
      const VarianceModel model = estimate_reference(
          k, opt.variance_reps, detail::derive_seed(s.seed, stream_tag::kStudyVariance, r));
      SearchConfig cfg;
      cfg.restarts = opt.restarts;
      cfg.seed = detail::derive_seed(s.seed, stream_tag::kStudySearch, r);
      const ClusterResult res = uclust3(k, s.alpha, model, cfg);
      if (res.homogeneous)
        labels.assign(static_cast<std::size_t>(s.n), 1);
      else
        labels = res.partition->labels();
    }
    ari[r] = adjusted_rand_index(labels, truth);
  });
  StudyRow row;
  row.scenario = s;
  row.method = to_string(method);
  double mean = 0.0;
  for (double a : ari) mean += a;
  mean /= double(s.reps);
  double ss = 0.0;
  for (double a : ari) ss += (a - mean) * (a - mean);
  row.mean_ari = mean;
  row.sd_ari = s.reps > 1 ? std::sqrt(ss / double(s.reps - 1)) : 0.0;
  return row;
}

}  // namespace triclust
