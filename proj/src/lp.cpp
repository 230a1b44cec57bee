#include "radarkit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "radarkit/errors.hpp"

namespace radarkit {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-12;
constexpr std::size_t kStallLimit = 50;

}  // namespace

LpFeasibility find_feasible_point(const Matrix& A, const Vector& b, std::size_t max_iter) {
  if (A.rows() != b.size()) throw ConfigError("LP constraint matrix and bound differ in length");
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  LpFeasibility out;
  if (m == 0) {
    out.feasible = true;
    out.point = Vector::Zero(n);
    return out;
  }

  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) k += b(i) < 0.0;
  const Eigen::Index cols = n + m + k;
  const Eigen::Index rhs = cols;

  // Rows 0..m-1 are constraints, row m holds phase-I reduced costs and -w.
  Matrix t = Matrix::Zero(m + 1, cols + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  Eigen::Index next_art = n + m;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * A.row(i);
    t(i, n + i) = sign;
    t(i, rhs) = sign * b(i);
    if (b(i) < 0.0) {
      t(i, next_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_art++;
      t.row(m) -= t.row(i);
    } else {
      basis[static_cast<std::size_t>(i)] = n + i;
    }
  }
  for (Eigen::Index j = n + m; j < cols; ++j) t(m, j) = 0.0;

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  std::vector<bool> retired(static_cast<std::size_t>(cols), false);
  bool bland = false;
  std::size_t stalled = 0;

  while (true) {
    // Entering column.
    Eigen::Index enter = -1;
    double best = -kCostTol;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (retired[static_cast<std::size_t>(j)]) continue;
      const double d = t(m, j);
      if (d < best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) break;
    if (out.iterations >= max_iter) {
      throw IndeterminateError("simplex exceeded " + std::to_string(max_iter) + " pivots");
    }

    // Ratio test; ties go to the smallest basic index.
    Eigen::Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = t(i, enter);
      if (a <= kPivotTol) continue;
      const double r = t(i, rhs) / a;
      if (r < ratio - 1e-15 ||
          (std::abs(r - ratio) <= 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave < 0) {
      // The phase-I objective is bounded below by zero, so a negative reduced
      // cost with no positive column entry is rounding residue.
      if (t(m, enter) < -1e-7 * scale) {
        throw IndeterminateError("phase-I simplex reported an unbounded direction");
      }
      t(m, enter) = 0.0;
      continue;
    }

    if (ratio <= 0.0) {
      if (++stalled >= kStallLimit) bland = true;
    } else {
      stalled = 0;
    }

    const double pivot = t(leave, enter);
    t.row(leave) /= pivot;
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    const Eigen::Index left = basis[static_cast<std::size_t>(leave)];
    if (left >= n + m) retired[static_cast<std::size_t>(left)] = true;
    basis[static_cast<std::size_t>(leave)] = enter;
    ++out.iterations;
  }

  out.infeasibility = std::max(0.0, -t(m, rhs));
  out.feasible = out.infeasibility <= 1e-9 * scale;
  out.point = Vector::Zero(n);
  if (out.feasible) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index j = basis[static_cast<std::size_t>(i)];
      if (j < n) out.point(j) = std::max(0.0, t(i, rhs));
    }
  }
  return out;
}

}  // namespace radarkit
