#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "triclust/partition.hpp"

namespace triclust {

using BigInt = boost::multiprecision::cpp_int;

// Natural log of a positive big integer, exact to double precision for any
// magnitude (scales by the bit length instead of converting directly).
inline double log_big(const BigInt& value) {
  if (value <= 0) throw std::invalid_argument("log_big requires a positive integer");
  const auto bits = boost::multiprecision::msb(value);  // floor(log2)
  if (bits <= 52) return std::log(value.convert_to<double>());
  const BigInt scaled = value >> (bits - 52);
  return std::log(scaled.convert_to<double>()) +
         static_cast<double>(bits - 52) * std::numbers::ln2;
}

// Number of splits of n labeled items into two unordered groups, both >= 2:
// 2^(n-1) - n - 1. Zero below n = 4.
inline BigInt two_group_count(int n) {
  if (n < 4) return 0;
  return (BigInt(1) << (n - 1)) - n - 1;
}

// Three groups with exactly one singleton: n choices of the singleton times
// the two-group splits of the rest, (2^(n-2) - n) * n. Zero below n = 5.
inline BigInt singleton_count(int n) {
  if (n < 5) return 0;
  return ((BigInt(1) << (n - 2)) - n) * n;
}

// Three groups all of size >= 2, by the recursion
//   S3(k+1) = 3 * S3(k) + delta3(k)
// anchored at the directly counted base S3(6) = 15. The matching closed form
// is [3^(n-1) - (n+2) 2^(n-1) + n^2 + n + 1] / 2; tests cross-check the two.
inline BigInt nonunit_count(int n) {
  if (n < 6) return 0;
  BigInt s = 15;
  for (int k = 6; k < n; ++k) s = 3 * s + singleton_count(k);
  return s;
}

// Exact counts of three-group configurations with at most one singleton.
struct PartitionCount {
  int n = 0;
  BigInt s3;
  BigInt delta3;
  BigInt gamma3;
  double log_gamma3 = 0.0;  // natural log, safe where gamma3 overflows double
};

inline PartitionCount total_count(int n) {
  if (n < 5) throw std::invalid_argument("three-group configurations need n >= 5, got n = " +
                                         std::to_string(n));
  PartitionCount out;
  out.n = n;
  out.s3 = nonunit_count(n);
  out.delta3 = singleton_count(n);
  out.gamma3 = out.s3 + out.delta3;
  out.log_gamma3 = log_big(out.gamma3);
  return out;
}

// Visits every legal three-group configuration of {0..n-1} exactly once, in a
// deterministic order, emitting canonical partitions. Enumerates restricted
// growth strings (first element in group 1, a new label only after all lower
// labels appeared) so each unordered partition shows up once. Guarded to
// n <= 14 against the 3^n blowup.
inline void for_each_partition(int n, const std::function<void(const Partition3&)>& visit) {
  if (n < 5 || n > 14)
    throw std::invalid_argument("partition enumeration supports 5 <= n <= 14, got n = " +
                                std::to_string(n));
  std::vector<int> labels(static_cast<std::size_t>(n), 1);
  std::array<int, 3> counts{1, 0, 0};
  const std::function<void(int, int)> recurse = [&](int i, int max_label) {
    if (i == n) {
      const GroupSizes sizes{counts[0], counts[1], counts[2]};
      if (max_label == 3 && sizes.legal())
        visit(Partition3::from_labels(labels).canonical());
      return;
    }
    const int top = std::min(3, max_label + 1);
    for (int g = 1; g <= top; ++g) {
      labels[static_cast<std::size_t>(i)] = g;
      ++counts[g - 1];
      recurse(i + 1, std::max(max_label, g));
      --counts[g - 1];
    }
  };
  recurse(1, 1);
}

inline std::vector<Partition3> enumerate_partitions(int n) {
  std::vector<Partition3> out;
  for_each_partition(n, [&](const Partition3& p) { out.push_back(p); });
  return out;
}

}  // namespace triclust
