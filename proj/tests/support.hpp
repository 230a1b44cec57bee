#pragma once

#include <cmath>
#include <cstdint>

#include "radarkit/rng.hpp"
#include "radarkit/statespace.hpp"

namespace testsupport {

using radarkit::CounterRng;
using radarkit::Matrix;
using radarkit::Vector;

inline Matrix random_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

inline Vector random_vector(CounterRng& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

// B B' + floor I
inline Matrix random_spd(CounterRng& rng, Eigen::Index n, double floor = 0.1) {
  const Matrix b = random_matrix(rng, n, n);
  Matrix s = b * b.transpose() + floor * Matrix::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

inline double uniform(CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

inline double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  return eig.eigenvalues().minCoeff();
}

// Random stable model of the given dimensions.
inline radarkit::LinearGaussianModel random_model(CounterRng& rng, Eigen::Index x, Eigen::Index y) {
  radarkit::LinearGaussianModel m;
  Matrix a = random_matrix(rng, x, x);
  Eigen::EigenSolver<Matrix> es(a);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  m.A = a * (0.95 / std::max(radius, 1e-3));
  m.C = random_matrix(rng, y, x);
  m.Q = random_spd(rng, x);
  m.R = random_spd(rng, y);
  m.prior_mean = random_vector(rng, x);
  m.prior_cov = random_spd(rng, x);
  return m;
}

}  // namespace testsupport
