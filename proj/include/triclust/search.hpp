#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "triclust/combinat.hpp"
#include "triclust/inference.hpp"
#include "triclust/kernel.hpp"
#include "triclust/parallel.hpp"
#include "triclust/partition.hpp"
#include "triclust/rng.hpp"
#include "triclust/ustat.hpp"
#include "triclust/variance.hpp"

namespace triclust {

struct SearchConfig {
  int restarts = 20;
  int max_iters = 0;  // moves per restart; 0 means 200 * n
  std::uint64_t seed = 0;
  bool allow_singleton = true;
  int exhaustive_threshold = 9;  // n at or below which enumeration replaces the heuristic
  int threads = 1;
};

struct ClusterResult {
  bool homogeneous = true;
  std::optional<Partition3> partition;  // max-Bn significant partition; absent when homogeneous
  double bn = 0.0;
  double std_bn = 0.0;
  double p_value = 1.0;
  double alpha = 0.0;
  std::optional<Partition3> stage1_partition;  // argmax standardized Bn (always set)
  double stage1_bn = 0.0;
  double stage1_std_bn = 0.0;
  double stage1_p_value = 1.0;
  long long visited = 0;
  // Size configurations examined by the stage-2 restricted searches, in
  // order; within each track the variance is non-increasing.
  std::vector<std::array<int, 3>> stage2_shapes;
};

namespace detail {

enum class ShapeConstraint { kAny, kNoSingleton, kSingletonOnly, kFixed };

inline std::array<int, 3> sort3(std::array<int, 3> s) {
  std::sort(s.begin(), s.end());
  return s;
}

// All legal size configurations as sorted triples.
inline std::vector<std::array<int, 3>> legal_shapes(int n, bool include_singleton) {
  std::vector<std::array<int, 3>> out;
  if (include_singleton)
    for (int n2 = 2; n2 <= (n - 1) / 2; ++n2) out.push_back({1, n2, n - 1 - n2});
  for (int n1 = 2; 3 * n1 <= n; ++n1)
    for (int n2 = n1; n2 <= (n - n1) / 2; ++n2) out.push_back({n1, n2, n - n1 - n2});
  return out;
}

inline std::array<int, 3> balanced_shape(int n) { return {n / 3, (n + 1) / 3, (n + 2) / 3}; }

inline std::array<int, 3> balanced_singleton_shape(int n) {
  const int n2 = (n - 1) / 2;
  return {1, n2, n - 1 - n2};
}

// Immutable per-shape table of Var(Bn) and the Bn significance threshold
// (critical std times sqrt(var)). Built once per run so concurrent restarts
// can share it.
class ShapeStats {
 public:
  ShapeStats(const VarianceModel& model, int n, double critical_std) : crit_(critical_std) {
    for (const auto& s : legal_shapes(n, true)) {
      const double v = var_for(model, GroupSizes{s[0], s[1], s[2]});
      table_.emplace(s, v);
    }
  }

  double var(const std::array<int, 3>& sizes) const { return table_.at(sort3(sizes)); }
  double bn_threshold(const std::array<int, 3>& sizes) const {
    return crit_ * std::sqrt(var(sizes));
  }
  double critical_std() const { return crit_; }

 private:
  std::map<std::array<int, 3>, double> table_;
  double crit_;
};

// Best significant partition seen so far (by raw Bn, thresholded per shape).
class SignificanceTracker {
 public:
  explicit SignificanceTracker(const ShapeStats& shapes) : shapes_(&shapes) {}

  void observe(const std::vector<int>& groups0, const std::array<int, 3>& sizes, double bn) {
    if (bn > best_bn_ && bn > shapes_->bn_threshold(sizes)) {
      best_bn_ = bn;
      best_ = groups0;
    }
  }

  void observe(const PartitionState& state) {
    observe(state.groups0(), state.sizes(), detail::bn_from_sums(state.sums()).bn);
  }

  void merge(const SignificanceTracker& other) {
    if (other.best_ && other.best_bn_ > best_bn_) {
      best_bn_ = other.best_bn_;
      best_ = other.best_;
    }
  }

  const std::optional<std::vector<int>>& best() const { return best_; }
  double best_bn() const { return best_bn_; }

 private:
  const ShapeStats* shapes_;
  double best_bn_ = -std::numeric_limits<double>::infinity();
  std::optional<std::vector<int>> best_;
};

// Steepest-ascent hill climb over {relocate one element, swap two elements}
// with deterministic scan order; among equally good moves the first found
// wins. The move set is filtered by a shape constraint.
class Searcher {
 public:
  Searcher(const KernelMatrix& k, const ShapeStats& shapes, bool standardize,
           ShapeConstraint constraint, bool allow_singleton,
           std::array<int, 3> fixed_shape = {0, 0, 0})
      : k_(&k),
        shapes_(&shapes),
        standardize_(standardize),
        constraint_(constraint),
        allow_singleton_(allow_singleton),
        fixed_shape_(sort3(fixed_shape)) {}

  double objective(const GroupSums& s) const {
    const double b = bn_from_sums(s).bn;
    return standardize_ ? b / std::sqrt(shapes_->var(s.sizes)) : b;
  }

  bool shape_ok(const std::array<int, 3>& sizes) const {
    const GroupSizes gs{sizes[0], sizes[1], sizes[2]};
    switch (constraint_) {
      case ShapeConstraint::kAny:
        return gs.legal() && (allow_singleton_ || gs.singleton_count() == 0);
      case ShapeConstraint::kNoSingleton:
        return sizes[0] >= 2 && sizes[1] >= 2 && sizes[2] >= 2;
      case ShapeConstraint::kSingletonOnly:
        return gs.legal() && gs.singleton_count() == 1;
      case ShapeConstraint::kFixed:
        return sort3(sizes) == fixed_shape_;
    }
    return false;
  }

  struct ClimbResult {
    double objective = 0.0;
    long long accepted = 0;
  };

  ClimbResult climb(PartitionState& state, int max_iters, SignificanceTracker& tracker) const {
    double current = objective(state.sums());
    long long accepted = 0;
    const int n = state.n();
    for (int iter = 0; iter < max_iters; ++iter) {
      double best = current;
      int kind = -1, arg0 = 0, arg1 = 0;
      for (int i = 0; i < n; ++i) {
        const int from = state.group_of(i);
        for (int to = 0; to < 3; ++to) {
          if (to == from) continue;
          const GroupSums s = state.sums_after_relocate(i, to);
          if (!shape_ok(s.sizes)) continue;
          const double obj = objective(s);
          if (obj > best) {
            best = obj;
            kind = 0;
            arg0 = i;
            arg1 = to;
          }
        }
      }
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (state.group_of(i) == state.group_of(j)) continue;
          const GroupSums s = state.sums_after_swap(i, j);
          const double obj = objective(s);
          if (obj > best) {
            best = obj;
            kind = 1;
            arg0 = i;
            arg1 = j;
          }
        }
      }
      if (kind < 0) break;
      if (kind == 0)
        state.relocate(arg0, arg1);
      else
        state.swap(arg0, arg1);
      current = objective(state.sums());
      tracker.observe(state);
      ++accepted;
    }
    return {current, accepted};
  }

 private:
  const KernelMatrix* k_;
  const ShapeStats* shapes_;
  bool standardize_;
  ShapeConstraint constraint_;
  bool allow_singleton_;
  std::array<int, 3> fixed_shape_;
};

inline std::vector<int> random_start(Rng rng, int n, const std::array<int, 3>& shape) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<int> groups0(n);
  int pos = 0;
  for (int g = 0; g < 3; ++g)
    for (int c = 0; c < shape[g]; ++c) groups0[order[pos++]] = g;
  return groups0;
}

// Deterministic data-driven start: seed three centers far apart (the most
// distant pair, then the point maximizing the minimum distance to both),
// assign everything to its nearest center, then repair the group sizes to the
// target shape by moving the closest spare elements.
inline std::vector<int> heuristic_start(const KernelMatrix& k, std::array<int, 3> target) {
  const int n = k.n;
  target = sort3(target);
  int a = 0, b = 1;
  double far = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (k(i, j) > far) {
        far = k(i, j);
        a = i;
        b = j;
      }
  int c = -1;
  double spread = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (i == a || i == b) continue;
    const double d = std::min(k(i, a), k(i, b));
    if (d > spread) {
      spread = d;
      c = i;
    }
  }
  const std::array<int, 3> centers{a, b, c};
  std::vector<int> cluster(n);
  for (int i = 0; i < n; ++i) {
    int nearest = 0;
    for (int g = 1; g < 3; ++g)
      if (k(i, centers[g]) < k(i, centers[nearest])) nearest = g;
    cluster[i] = nearest;
  }
  // Rank clusters by (size, smallest member) and repair toward the sorted
  // target sizes.
  std::array<int, 3> sizes{0, 0, 0};
  std::array<int, 3> smallest{n, n, n};
  for (int i = n - 1; i >= 0; --i) {
    ++sizes[cluster[i]];
    smallest[cluster[i]] = i;
  }
  std::array<int, 3> rank_of{0, 1, 2};
  std::sort(rank_of.begin(), rank_of.end(), [&](int x, int y) {
    if (sizes[x] != sizes[y]) return sizes[x] < sizes[y];
    return smallest[x] < smallest[y];
  });
  std::vector<int> groups0(n);
  std::array<int, 3> ranked_center{};
  std::array<int, 3> ranked_size{};
  std::array<int, 3> new_label{};
  for (int r = 0; r < 3; ++r) {
    new_label[rank_of[r]] = r;
    ranked_center[r] = centers[rank_of[r]];
    ranked_size[r] = sizes[rank_of[r]];
  }
  for (int i = 0; i < n; ++i) groups0[i] = new_label[cluster[i]];
  while (ranked_size != target) {
    int over = -1, under = -1;
    for (int g = 0; g < 3; ++g) {
      if (over < 0 && ranked_size[g] > target[g]) over = g;
      if (under < 0 && ranked_size[g] < target[g]) under = g;
    }
    int pick = -1;
    double closest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (groups0[i] != over || i == ranked_center[over]) continue;
      const double d = k(i, ranked_center[under]);
      if (d < closest) {
        closest = d;
        pick = i;
      }
    }
    if (pick < 0) {  // only the center is left; move it
      for (int i = 0; i < n; ++i)
        if (groups0[i] == over) pick = i;
    }
    groups0[pick] = under;
    --ranked_size[over];
    ++ranked_size[under];
  }
  return groups0;
}

struct MultistartResult {
  std::vector<int> groups0;
  double objective = -std::numeric_limits<double>::infinity();
  long long visited = 0;
};

// Restarts are independent (per-restart RNG streams derived from
// (seed, kSearch, call_id << 32 | restart)); the reduction keeps the best
// objective with lowest restart index, so the result does not depend on the
// thread count. One extra deterministic heuristic start runs alongside the
// random ones.
inline MultistartResult run_multistart(const Searcher& searcher, const KernelMatrix& k,
                                       const std::array<int, 3>& start_shape,
                                       const SearchConfig& cfg, const ShapeStats& shapes,
                                       std::uint64_t call_id, SignificanceTracker& tracker) {
  const int n = k.n;
  const int max_iters = cfg.max_iters > 0 ? cfg.max_iters : 200 * n;
  const int starts = cfg.restarts + 1;
  struct Slot {
    std::vector<int> groups0;
    double objective = 0.0;
    long long visited = 0;
    std::optional<SignificanceTracker> tracker;
  };
  std::vector<Slot> slots(starts);
  parallel_for(starts, cfg.threads, [&](std::int64_t idx) {
    std::vector<int> g0 =
        idx == cfg.restarts
            ? heuristic_start(k, start_shape)
            : random_start(Rng::stream(cfg.seed, stream_tag::kSearch,
                                       (call_id << 32) | static_cast<std::uint64_t>(idx)),
                           n, start_shape);
    PartitionState state(k, std::move(g0));
    SignificanceTracker local(shapes);
    local.observe(state);
    const auto res = searcher.climb(state, max_iters, local);
    slots[idx] = Slot{state.groups0(), res.objective, res.accepted + 1, std::move(local)};
  });
  MultistartResult best;
  for (auto& slot : slots) {
    best.visited += slot.visited;
    tracker.merge(*slot.tracker);
    if (slot.objective > best.objective) {
      best.objective = slot.objective;
      best.groups0 = std::move(slot.groups0);
    }
  }
  return best;
}

struct ExhaustiveScan {
  std::optional<Partition3> best_std;  // argmax standardized Bn
  double best_std_value = -std::numeric_limits<double>::infinity();
  std::optional<Partition3> best_sig;  // argmax Bn among significant
  double best_sig_bn = -std::numeric_limits<double>::infinity();
  long long visited = 0;
};

inline ExhaustiveScan exhaustive_scan(const KernelMatrix& k, const ShapeStats& shapes,
                                      bool allow_singleton) {
  ExhaustiveScan scan;
  for_each_partition(k.n, [&](const Partition3& p) {
    if (!allow_singleton && p.singleton_group() >= 0) return;
    ++scan.visited;
    const double b = bn_statistic(k, p).bn;
    const auto sizes = p.sizes().sorted();
    const double f = b / std::sqrt(shapes.var(sizes));
    if (f > scan.best_std_value) {
      scan.best_std_value = f;
      scan.best_std = p;
    }
    if (b > scan.best_sig_bn && b > shapes.bn_threshold(sizes)) {
      scan.best_sig_bn = b;
      scan.best_sig = p;
    }
  });
  return scan;
}

// Exact statistics of a partition, recomputed from scratch so reported values
// never depend on the search's incremental-move history.
struct ExactStats {
  double bn = 0.0;
  double variance = 0.0;
  double std_bn = 0.0;
  double p_value = 1.0;
};

inline ExactStats exact_stats(const KernelMatrix& k, const Partition3& p,
                              const VarianceModel& model) {
  ExactStats s;
  s.bn = bn_statistic(k, p).bn;
  s.variance = var_for(model, p.sizes());
  s.std_bn = s.bn / std::sqrt(s.variance);
  s.p_value = max_test_pvalue(s.std_bn, k.n);
  return s;
}

}  // namespace detail

// Finds the partition maximizing f = Bn / sqrt(Var Bn): exact enumeration at
// or below cfg.exhaustive_threshold, multistart local search above it. The
// returned p-value carries the full multiplicity n* = gamma3(n).
inline std::pair<Partition3, TestOutcome> maximize_std_bn(
    const KernelMatrix& k, const VarianceModel& model, const SearchConfig& cfg,
    double alpha = std::numeric_limits<double>::quiet_NaN()) {
  const int n = k.n;
  if (n < 5) throw std::invalid_argument("three-group search needs n >= 5");
  if (model.n != n) throw std::invalid_argument("variance model does not match kernel size");
  if (model.degenerate)
    throw DegenerateVarianceError(
        "degenerate variance: resampled Var(Bn) is zero (constant kernel?)");
  const double crit = std::isnan(alpha) ? std::numeric_limits<double>::quiet_NaN()
                                        : max_test_critical(n, alpha);
  const detail::ShapeStats shapes(model, n, crit);
  std::optional<Partition3> best;
  if (n <= cfg.exhaustive_threshold) {
    best = detail::exhaustive_scan(k, shapes, cfg.allow_singleton).best_std;
  } else {
    detail::SignificanceTracker tracker(shapes);
    const detail::Searcher searcher(k, shapes, /*standardize=*/true,
                                    detail::ShapeConstraint::kAny, cfg.allow_singleton);
    const auto res = detail::run_multistart(searcher, k, detail::balanced_shape(n), cfg, shapes,
                                            /*call_id=*/0, tracker);
    best = PartitionState(k, res.groups0).to_partition().canonical();
  }
  const auto stats = detail::exact_stats(k, *best, model);
  TestOutcome out;
  out.bn = stats.bn;
  out.variance = stats.variance;
  out.std_bn = stats.std_bn;
  out.p_value = stats.p_value;
  out.alpha = alpha;
  out.reject = !std::isnan(alpha) && stats.p_value < alpha;
  out.n_star = total_count(n).gamma3;
  return {best->canonical(), out};
}

// Two-stage significance clustering. Stage 1 tests overall homogeneity with
// the maximum standardized Bn; if rejected, stage 2 reports the maximum-Bn
// partition among significant ones, searching the raw-Bn maximizer first and
// then descending through size configurations of decreasing variance
// (singleton and non-singleton configurations as separate tracks).
inline ClusterResult uclust3(const KernelMatrix& k, double alpha, const VarianceModel& model,
                             const SearchConfig& cfg) {
  const int n = k.n;
  if (n < 5) throw std::invalid_argument("three-group clustering needs n >= 5");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  if (model.n != n) throw std::invalid_argument("variance model does not match kernel size");
  if (model.degenerate)
    throw DegenerateVarianceError(
        "degenerate variance: resampled Var(Bn) is zero (constant kernel?)");

  const double crit = max_test_critical(n, alpha);
  const detail::ShapeStats shapes(model, n, crit);

  ClusterResult result;
  result.alpha = alpha;

  if (n <= cfg.exhaustive_threshold) {
    const auto scan = detail::exhaustive_scan(k, shapes, cfg.allow_singleton);
    result.visited = scan.visited;
    const auto s1 = detail::exact_stats(k, *scan.best_std, model);
    result.stage1_partition = scan.best_std->canonical();
    result.stage1_bn = s1.bn;
    result.stage1_std_bn = s1.std_bn;
    result.stage1_p_value = s1.p_value;
    if (s1.p_value >= alpha) {
      result.homogeneous = true;
      result.bn = s1.bn;
      result.std_bn = s1.std_bn;
      result.p_value = s1.p_value;
      return result;
    }
    result.homogeneous = false;
    std::optional<Partition3> chosen = scan.best_sig;
    if (chosen) {
      const auto s2 = detail::exact_stats(k, *chosen, model);
      if (s2.p_value < alpha) {
        result.partition = chosen->canonical();
        result.bn = s2.bn;
        result.std_bn = s2.std_bn;
        result.p_value = s2.p_value;
        return result;
      }
    }
    // Threshold rounding put nothing strictly below alpha: fall back to the
    // stage-1 partition, which rejected by the exact p-value.
    result.partition = result.stage1_partition;
    result.bn = s1.bn;
    result.std_bn = s1.std_bn;
    result.p_value = s1.p_value;
    return result;
  }

  detail::SignificanceTracker tracker(shapes);
  std::uint64_t call_id = 0;

  // Stage 1: maximize the standardized Bn.
  const detail::Searcher stage1(k, shapes, /*standardize=*/true, detail::ShapeConstraint::kAny,
                                cfg.allow_singleton);
  const auto m1 = detail::run_multistart(stage1, k, detail::balanced_shape(n), cfg, shapes,
                                         call_id++, tracker);
  result.visited += m1.visited;
  const Partition3 p1 = PartitionState(k, m1.groups0).to_partition().canonical();
  const auto s1 = detail::exact_stats(k, p1, model);
  result.stage1_partition = p1;
  result.stage1_bn = s1.bn;
  result.stage1_std_bn = s1.std_bn;
  result.stage1_p_value = s1.p_value;
  if (s1.p_value >= alpha) {
    result.homogeneous = true;
    result.bn = s1.bn;
    result.std_bn = s1.std_bn;
    result.p_value = s1.p_value;
    return result;
  }
  result.homogeneous = false;
  tracker.observe(m1.groups0, p1.sizes().sorted(), s1.bn);

  // Stage 2: max-Bn searches per track, then the variance-descending
  // restricted schedule while nothing significant has been found.
  std::vector<detail::ShapeConstraint> tracks{detail::ShapeConstraint::kNoSingleton};
  if (cfg.allow_singleton) tracks.push_back(detail::ShapeConstraint::kSingletonOnly);
  for (const auto track : tracks) {
    if (track == detail::ShapeConstraint::kNoSingleton && n < 6) continue;
    const std::array<int, 3> start = track == detail::ShapeConstraint::kSingletonOnly
                                         ? detail::balanced_singleton_shape(n)
                                         : detail::balanced_shape(n);
    const detail::Searcher searcher(k, shapes, /*standardize=*/false, track,
                                    cfg.allow_singleton);
    const auto m = detail::run_multistart(searcher, k, start, cfg, shapes, call_id++, tracker);
    result.visited += m.visited;
    const Partition3 p0 = PartitionState(k, m.groups0).to_partition().canonical();
    const auto s0 = detail::exact_stats(k, p0, model);
    tracker.observe(m.groups0, p0.sizes().sorted(), s0.bn);
    if (s0.p_value < alpha) continue;  // the track maximum is itself significant

    // Shapes with variance at or above the track maximizer's cannot hold a
    // significant partition with a larger Bn; walk the rest downward.
    const double var0 = shapes.var(p0.sizes().sorted());
    std::vector<std::array<int, 3>> schedule;
    for (const auto& s : detail::legal_shapes(
             n, /*include_singleton=*/track == detail::ShapeConstraint::kSingletonOnly)) {
      const bool singleton_shape = s[0] == 1;
      if (singleton_shape != (track == detail::ShapeConstraint::kSingletonOnly)) continue;
      if (shapes.var(s) < var0) schedule.push_back(s);
    }
    std::sort(schedule.begin(), schedule.end(), [&](const auto& x, const auto& y) {
      const double vx = shapes.var(x), vy = shapes.var(y);
      if (vx != vy) return vx > vy;
      return x < y;
    });
    for (const auto& shape : schedule) {
      result.stage2_shapes.push_back(shape);
      const detail::Searcher restricted(k, shapes, /*standardize=*/false,
                                        detail::ShapeConstraint::kFixed, cfg.allow_singleton,
                                        shape);
      const auto mf =
          detail::run_multistart(restricted, k, shape, cfg, shapes, call_id++, tracker);
      result.visited += mf.visited;
      const Partition3 pf = PartitionState(k, mf.groups0).to_partition().canonical();
      const auto sf = detail::exact_stats(k, pf, model);
      tracker.observe(mf.groups0, pf.sizes().sorted(), sf.bn);
      if (sf.p_value < alpha) break;
    }
  }

  // Report the best significant partition seen anywhere; the stage-1
  // partition is the guaranteed fallback (its exact p rejected above).
  std::optional<Partition3> chosen;
  if (tracker.best()) {
    const Partition3 cand = PartitionState(k, *tracker.best()).to_partition().canonical();
    if (detail::exact_stats(k, cand, model).p_value < alpha) chosen = cand;
  }
  if (!chosen) chosen = p1;
  const auto sc = detail::exact_stats(k, *chosen, model);
  result.partition = chosen->canonical();
  result.bn = sc.bn;
  result.std_bn = sc.std_bn;
  result.p_value = sc.p_value;
  return result;
}

}  // namespace triclust
