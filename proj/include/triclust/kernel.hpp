#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "triclust/matrix.hpp"

namespace triclust {

enum class KernelKind {
  kMeanSquaredDifference,  // (1/L) sum_l (x_il - x_jl)^2
  kEuclidean,              // sqrt(sum_l (x_il - x_jl)^2)
  kPrecomputed,            // loaded from file
};

inline KernelKind kernel_kind_from_string(std::string_view name) {
  if (name == "msd") return KernelKind::kMeanSquaredDifference;
  if (name == "euclidean") return KernelKind::kEuclidean;
  if (name == "precomputed") return KernelKind::kPrecomputed;
  throw std::invalid_argument("unknown kernel kind '" + std::string(name) +
                              "' (expected msd, euclidean or precomputed)");
}

inline const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kMeanSquaredDifference: return "msd";
    case KernelKind::kEuclidean: return "euclidean";
    case KernelKind::kPrecomputed: return "precomputed";
  }
  return "?";
}

// Symmetric n x n matrix of pairwise kernel values phi(X_i, X_j).
struct KernelMatrix {
  int n = 0;
  KernelKind kind = KernelKind::kPrecomputed;
  std::vector<double> values;  // row-major n*n, values[i*n+j] == values[j*n+i]

  KernelMatrix() = default;
  KernelMatrix(int size, KernelKind k) : n(size), kind(k), values(static_cast<std::size_t>(size) * size, 0.0) {}

  double operator()(int i, int j) const {
    return values[static_cast<std::size_t>(i) * n + j];
  }
  void set(int i, int j, double v) {
    values[static_cast<std::size_t>(i) * n + j] = v;
    values[static_cast<std::size_t>(j) * n + i] = v;
  }
};

// Pairwise kernel matrix of the data rows. Each entry accumulates over
// coordinates in index order, so results do not depend on any parallel
// schedule across pairs.
inline KernelMatrix kernel_matrix(const Matrix& data, KernelKind kind) {
  if (kind == KernelKind::kPrecomputed)
    throw std::invalid_argument("kernel kind 'precomputed' requires load_kernel_matrix");
  if (data.rows == 0 || data.cols == 0)
    throw std::invalid_argument("kernel requires a non-empty data matrix");
  const int n = static_cast<int>(data.rows);
  const std::size_t dim = data.cols;
  KernelMatrix k(n, kind);
  for (int i = 0; i < n; ++i) {
    const double* xi = data.row(static_cast<std::size_t>(i));
    for (int j = i + 1; j < n; ++j) {
      const double* xj = data.row(static_cast<std::size_t>(j));
      double sum = 0.0;
      for (std::size_t l = 0; l < dim; ++l) {
        const double d = xi[l] - xj[l];
        sum += d * d;
      }
      const double phi = kind == KernelKind::kMeanSquaredDifference
                             ? sum / static_cast<double>(dim)
                             : std::sqrt(sum);
      k.set(i, j, phi);
    }
  }
  return k;
}

}  // namespace triclust
