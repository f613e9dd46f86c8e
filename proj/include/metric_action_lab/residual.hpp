#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>

namespace mal {

/// Result of checking an inequality `lhs <= rhs` over a sample set: the worst value of lhs - rhs.
struct ResidualReport {
  double max_residual = -std::numeric_limits<double>::infinity();
  double tolerance = 1e-9;
  std::size_t samples = 0;
  std::string worst_case;  // human-readable description of the argmax sample

  bool passed() const { return max_residual <= tolerance; }

  void record(double residual, const std::string& where = {}) {
    ++samples;
    if (residual > max_residual || samples == 1) {
      max_residual = residual;
      worst_case = where;
    }
  }

  void merge(const ResidualReport& other) {
    if (other.samples == 0) return;
    if (samples == 0 || other.max_residual > max_residual) {
      max_residual = other.max_residual;
      worst_case = other.worst_case;
    }
    samples += other.samples;
  }
};

}  // namespace mal
