#pragma once

#include "radarkit/statespace.hpp"

namespace radarkit {

/// Covariance part of one Kalman recursion. It does not depend on the
/// observation, so the whole sequence is fixed by the model.
struct CovarianceStep {
  Matrix predicted_cov;   // Sigma_{k+1|k}
  Matrix innovation_cov;  // S_{k+1}
  Matrix gain;            // psi_{k+1}
  Matrix posterior_cov;   // Sigma_{k+1}
};

struct KalmanStep {
  Matrix predicted_cov;
  Matrix innovation_cov;
  Matrix gain;
  Vector innovation;
  GaussianBelief posterior;
};

/// Innovation covariances with condition number at or above this are rejected.
inline constexpr double kMaxInnovationCondition = 1e12;

CovarianceStep covariance_step(const LinearGaussianModel& model, const Matrix& cov);

/// Classical predict/update step in covariance form.
KalmanStep kalman_step(const LinearGaussianModel& model, const GaussianBelief& belief,
                       const Vector& observation);

/// Same step through the information form. Requires an invertible predicted
/// covariance; used as an independent cross-check of kalman_step.
KalmanStep kalman_step_information(const LinearGaussianModel& model, const GaussianBelief& belief,
                                   const Vector& observation);

/// Steady-state one-step predicted covariance, found by iterating the Riccati
/// predictor from Sigma = Q until the Frobenius change drops below
/// tol * max(1, ‖Sigma‖_F).
Matrix predicted_covariance_fixed_point(const LinearGaussianModel& model, double tol = 1e-10,
                                        std::size_t max_iter = 100000);

/// Ratio of extreme eigenvalues of a symmetric matrix; +inf when the smallest
/// eigenvalue is not positive.
double spd_condition(const Matrix& sym);

/// Inverse of a symmetric positive definite matrix. Throws NumericalError
/// carrying the condition estimate when cond >= kMaxInnovationCondition.
Matrix checked_spd_inverse(const Matrix& sym, const char* what);

}  // namespace radarkit
