#pragma once

#include <cstddef>

#include "radarkit/statespace.hpp"

namespace radarkit {

struct LpFeasibility {
  bool feasible = false;
  Vector point;               // z >= 0 with A z <= b when feasible
  double infeasibility = 0.0; // phase-I optimum (sum of artificials)
  std::size_t iterations = 0;
};

/// Decides whether {z >= 0 : A z <= b} is nonempty with a dense phase-I
/// simplex (Dantzig pricing, Bland's rule once pivots stall).
/// Throws IndeterminateError when max_iter pivots are exceeded.
LpFeasibility find_feasible_point(const Matrix& A, const Vector& b, std::size_t max_iter = 100000);

}  // namespace radarkit
