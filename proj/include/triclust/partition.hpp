#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace triclust {

// Size configuration (n1, n2, n3) of a three-group partition. Legal shapes
// have at most one group of size one and every other group of size >= 2.
struct GroupSizes {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;

  int total() const { return n1 + n2 + n3; }
  int operator[](int g) const { return g == 0 ? n1 : (g == 1 ? n2 : n3); }

  int singleton_count() const { return (n1 == 1) + (n2 == 1) + (n3 == 1); }

  bool legal() const {
    if (n1 < 1 || n2 < 1 || n3 < 1) return false;
    return singleton_count() <= 1;
  }

  // Sorted copy, used as a canonical key: variance depends only on the size
  // multiset.
  std::array<int, 3> sorted() const {
    std::array<int, 3> s{n1, n2, n3};
    std::sort(s.begin(), s.end());
    return s;
  }

  friend bool operator==(const GroupSizes&, const GroupSizes&) = default;
};

// Assignment of n items (0-based indices) to groups labeled 1..3.
class Partition3 {
 public:
  // Validates and constructs. Throws std::invalid_argument on: labels outside
  // {1,2,3}, an empty group, more than one singleton, or n < 5.
  static Partition3 from_labels(std::vector<int> labels) {
    std::array<int, 3> counts{0, 0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const int g = labels[i];
      if (g < 1 || g > 3)
        throw std::invalid_argument("partition label out of range {1,2,3} at index " +
                                    std::to_string(i + 1));
      ++counts[g - 1];
    }
    if (labels.size() < 5)
      throw std::invalid_argument("three-group partition needs n >= 5, got n = " +
                                  std::to_string(labels.size()));
    const GroupSizes sizes{counts[0], counts[1], counts[2]};
    if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0)
      throw std::invalid_argument("partition has an empty group");
    if (!sizes.legal())
      throw std::invalid_argument("partition has more than one singleton group");
    return Partition3(std::move(labels), sizes);
  }

  const std::vector<int>& labels() const { return labels_; }
  GroupSizes sizes() const { return sizes_; }
  int n() const { return static_cast<int>(labels_.size()); }

  // 0-based group index of the singleton group, or -1 when all sizes >= 2.
  int singleton_group() const {
    for (int g = 0; g < 3; ++g)
      if (sizes_[g] == 1) return g;
    return -1;
  }

  std::array<std::vector<int>, 3> groups() const {
    std::array<std::vector<int>, 3> out;
    for (int g = 0; g < 3; ++g) out[g].reserve(sizes_[g]);
    for (int i = 0; i < n(); ++i) out[labels_[i] - 1].push_back(i);
    return out;
  }

  // Relabels groups sorted by (size, smallest member). A singleton group, if
  // present, always becomes group 1.
  Partition3 canonical() const {
    std::array<int, 3> smallest{n(), n(), n()};
    for (int i = n() - 1; i >= 0; --i) smallest[labels_[i] - 1] = i;
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (sizes_[a] != sizes_[b]) return sizes_[a] < sizes_[b];
      return smallest[a] < smallest[b];
    });
    std::array<int, 3> new_label{};
    for (int rank = 0; rank < 3; ++rank) new_label[order[rank]] = rank + 1;
    std::vector<int> labels(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) labels[i] = new_label[labels_[i] - 1];
    return Partition3(std::move(labels),
                      GroupSizes{sizes_[order[0]], sizes_[order[1]], sizes_[order[2]]});
  }

  friend bool operator==(const Partition3& a, const Partition3& b) {
    return a.labels_ == b.labels_;
  }

 private:
  Partition3(std::vector<int> labels, GroupSizes sizes)
      : labels_(std::move(labels)), sizes_(sizes) {}

  std::vector<int> labels_;
  GroupSizes sizes_;
};

}  // namespace triclust
