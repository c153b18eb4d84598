#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "triclust/kernel.hpp"
#include "triclust/partition.hpp"

namespace triclust {

// Average kernel value over all unordered pairs inside one group.
inline double u_within(const KernelMatrix& k, std::span<const int> group) {
  const std::size_t m = group.size();
  if (m < 2) throw std::invalid_argument("within-group U-statistic needs a group of size >= 2");
  std::vector<char> seen(k.n, 0);
  for (int i : group) {
    if (i < 0 || i >= k.n) throw std::invalid_argument("group index out of range");
    if (seen[i]) throw std::invalid_argument("duplicate index in group");
    seen[i] = 1;
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) sum += k(group[a], group[b]);
  return sum / (0.5 * double(m) * double(m - 1));
}

// Average kernel value over the |A| * |B| cross pairs of two disjoint groups.
inline double u_between(const KernelMatrix& k, std::span<const int> a, std::span<const int> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("between-group U-statistic needs non-empty groups");
  std::vector<char> seen(k.n, 0);
  for (int i : a) {
    if (i < 0 || i >= k.n) throw std::invalid_argument("group index out of range");
    seen[i] = 1;
  }
  for (int j : b) {
    if (j < 0 || j >= k.n) throw std::invalid_argument("group index out of range");
    if (seen[j]) throw std::invalid_argument("groups overlap at index " + std::to_string(j + 1));
  }
  double sum = 0.0;
  for (int i : a)
    for (int j : b) sum += k(i, j);
  return sum / (double(a.size()) * double(b.size()));
}

// Average kernel value over all unordered pairs of the pooled sample.
inline double combined_u(const KernelMatrix& k) {
  if (k.n < 2) throw std::invalid_argument("combined U-statistic needs n >= 2");
  double sum = 0.0;
  for (int i = 0; i < k.n; ++i)
    for (int j = i + 1; j < k.n; ++j) sum += k(i, j);
  return sum / (0.5 * double(k.n) * double(k.n - 1));
}

struct BnValue {
  double bn = 0.0;
  bool singleton_case = false;
};

namespace detail {

// Per-group pair sums of the kernel: within[g] over pairs inside group g,
// cross[pair_id(g,h)] over pairs with one end in each.
struct GroupSums {
  std::array<int, 3> sizes{};
  std::array<double, 3> within{};
  std::array<double, 3> cross{};
};

inline int pair_id(int g, int h) { return g + h - 1; }  // (0,1)->0 (0,2)->1 (1,2)->2

inline GroupSums group_sums(const KernelMatrix& k, const std::vector<int>& groups0) {
  GroupSums s;
  for (int g : groups0) ++s.sizes[g];
  for (int i = 0; i < k.n; ++i) {
    const int gi = groups0[i];
    for (int j = i + 1; j < k.n; ++j) {
      const int gj = groups0[j];
      const double v = k(i, j);
      if (gi == gj)
        s.within[gi] += v;
      else
        s.cross[pair_id(std::min(gi, gj), std::max(gi, gj))] += v;
    }
  }
  return s;
}

// Bn from group pair sums; picks the matching branch (all sizes >= 2, or
// exactly one singleton group).
inline BnValue bn_from_sums(const GroupSums& s) {
  const int n = s.sizes[0] + s.sizes[1] + s.sizes[2];
  if (n < 5) throw std::invalid_argument("Bn needs n >= 5");
  int singleton = -1;
  for (int g = 0; g < 3; ++g) {
    if (s.sizes[g] < 1) throw std::invalid_argument("Bn needs three non-empty groups");
    if (s.sizes[g] == 1) {
      if (singleton >= 0) throw std::invalid_argument("Bn allows at most one singleton group");
      singleton = g;
    }
  }
  const double scale = 1.0 / (double(n) * double(n - 1));
  const auto u_w = [&](int g) {
    const double m = s.sizes[g];
    return s.within[g] / (0.5 * m * (m - 1.0));
  };
  const auto u_b = [&](int g, int h) {
    return s.cross[pair_id(std::min(g, h), std::max(g, h))] /
           (double(s.sizes[g]) * double(s.sizes[h]));
  };
  if (singleton < 0) {
    double bn = 0.0;
    for (int g = 0; g < 3; ++g)
      for (int h = g + 1; h < 3; ++h)
        bn += s.sizes[g] * s.sizes[h] * scale * (2.0 * u_b(g, h) - u_w(g) - u_w(h));
    return {bn, false};
  }
  const int a = singleton == 0 ? 1 : 0;
  const int b = singleton == 2 ? 1 : 2;
  const double na = s.sizes[a];
  const double nb = s.sizes[b];
  const double bn = 2.0 * na * scale * (u_b(singleton, a) - u_w(a)) +
                    2.0 * nb * scale * (u_b(singleton, b) - u_w(b)) +
                    na * nb * scale * (2.0 * u_b(a, b) - u_w(a) - u_w(b));
  return {bn, true};
}

}  // namespace detail

// Bn for a labels vector with entries 0..2, one full O(n^2) pass. Used by the
// resampling loops.
inline BnValue bn_from_groups0(const KernelMatrix& k, const std::vector<int>& groups0) {
  return detail::bn_from_sums(detail::group_sums(k, groups0));
}

// Bn of a partition. All group sizes >= 2 evaluates the three-pair form;
// exactly one singleton evaluates the extended form.
inline BnValue bn_statistic(const KernelMatrix& k, const Partition3& p) {
  if (p.n() != k.n)
    throw std::invalid_argument("partition length " + std::to_string(p.n()) +
                                " does not match kernel size " + std::to_string(k.n));
  std::vector<int> groups0(p.labels().size());
  for (std::size_t i = 0; i < groups0.size(); ++i) groups0[i] = p.labels()[i] - 1;
  return bn_from_groups0(k, groups0);
}

// Mutable partition over a fixed kernel with O(1) evaluation of candidate
// moves and O(n) application. Backbone of the local search: per-group pair
// sums plus, per element, the kernel sum into each group.
class PartitionState {
 public:
  PartitionState(const KernelMatrix& k, std::vector<int> groups0)
      : k_(&k), groups_(std::move(groups0)), row_group_(groups_.size()) {
    for (int i = 0; i < k_->n; ++i) {
      row_group_[i] = {0.0, 0.0, 0.0};
      for (int j = 0; j < k_->n; ++j)
        if (j != i) row_group_[i][groups_[j]] += (*k_)(i, j);
    }
    sums_ = detail::group_sums(k, groups_);
  }

  PartitionState(const KernelMatrix& k, const Partition3& p)
      : PartitionState(k, zero_based(p)) {}

  int n() const { return k_->n; }
  int group_of(int i) const { return groups_[i]; }
  const std::array<int, 3>& sizes() const { return sums_.sizes; }
  const detail::GroupSums& sums() const { return sums_; }
  const std::vector<int>& groups0() const { return groups_; }

  double bn() const { return detail::bn_from_sums(sums_).bn; }

  detail::GroupSums sums_after_relocate(int i, int to) const {
    const int from = group_of(i);
    const int other = 3 - from - to;
    detail::GroupSums s = sums_;
    const auto& r = row_group_[i];
    s.within[from] -= r[from];
    s.within[to] += r[to];
    cross_ref(s, from, to) += r[from] - r[to];
    cross_ref(s, from, other) -= r[other];
    cross_ref(s, to, other) += r[other];
    --s.sizes[from];
    ++s.sizes[to];
    return s;
  }

  detail::GroupSums sums_after_swap(int i, int j) const {
    const int a = group_of(i);
    const int b = group_of(j);
    const int c = 3 - a - b;
    detail::GroupSums s = sums_;
    const auto& ri = row_group_[i];
    const auto& rj = row_group_[j];
    const double kij = (*k_)(i, j);
    s.within[a] += rj[a] - ri[a] - kij;
    s.within[b] += ri[b] - rj[b] - kij;
    cross_ref(s, a, b) += ri[a] - ri[b] + rj[b] - rj[a] + 2.0 * kij;
    cross_ref(s, a, c) += rj[c] - ri[c];
    cross_ref(s, b, c) += ri[c] - rj[c];
    return s;
  }

  void relocate(int i, int to) {
    const int from = group_of(i);
    if (from == to) return;
    sums_ = sums_after_relocate(i, to);
    groups_[i] = to;
    for (int j = 0; j < k_->n; ++j) {
      if (j == i) continue;
      const double v = (*k_)(i, j);
      row_group_[j][from] -= v;
      row_group_[j][to] += v;
    }
  }

  void swap(int i, int j) {
    const int a = group_of(i);
    const int b = group_of(j);
    if (a == b) return;
    relocate(i, b);
    relocate(j, a);
  }

  Partition3 to_partition() const {
    std::vector<int> labels(groups_.size());
    for (std::size_t i = 0; i < groups_.size(); ++i) labels[i] = groups_[i] + 1;
    return Partition3::from_labels(std::move(labels));
  }

 private:
  static std::vector<int> zero_based(const Partition3& p) {
    std::vector<int> g(p.labels().size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = p.labels()[i] - 1;
    return g;
  }

  static double& cross_ref(detail::GroupSums& s, int g, int h) {
    return s.cross[detail::pair_id(std::min(g, h), std::max(g, h))];
  }

  const KernelMatrix* k_;
  std::vector<int> groups_;                       // 0-based group per element
  detail::GroupSums sums_;
  std::vector<std::array<double, 3>> row_group_;  // per element: kernel sum into each group
};

}  // namespace triclust
