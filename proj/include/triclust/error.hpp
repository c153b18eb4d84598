#pragma once

#include <stdexcept>
#include <string>

namespace triclust {

// Data or model errors (bad files, mismatched inputs). CLI maps these to exit 1.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a variance model is degenerate (e.g. constant kernel) and a
// standardized statistic would divide by zero.
class DegenerateVarianceError : public DataError {
 public:
  explicit DegenerateVarianceError(const std::string& what) : DataError(what) {}
};

}  // namespace triclust
