#pragma once

#include <cmath>
#include <string>

#include "svici/linalg.hpp"

namespace svici {

enum class Target { kZ0, kX0 };

/// Per-coordinate confidence intervals [center_j - hw_j, center_j + hw_j].
/// Coordinates with a trivial subspace component have hw_j == 0 (degenerate
/// singleton intervals). Nominal level is 1 - (alpha1 + alpha2); alpha1 is
/// zero for the exact finite-sample construction.
struct IntervalReport {
  Target target = Target::kZ0;
  Vector center;
  Vector half_widths;
  std::string selected;  // id of the selected cell / piece cone
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  Vector a0;

  double lower(std::size_t j) const { return center[j] - half_widths[j]; }
  double upper(std::size_t j) const { return center[j] + half_widths[j]; }

  /// Hit rule: interior of the interval, with degenerate (width-0) intervals
  /// hitting only on exact equality to `degenerate_tol`.
  bool covers(std::size_t j, double truth,
              double degenerate_tol = 1e-9) const {
    if (half_widths[j] == 0.0)
      return std::abs(center[j] - truth) <= degenerate_tol;
    return std::abs(center[j] - truth) <= half_widths[j];
  }
};

}  // namespace svici
