#include "radarkit/tracker.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "radarkit/errors.hpp"

namespace radarkit {

double spd_condition(const Matrix& sym) {
  if (sym.rows() == 1) {
    return sym(0, 0) > 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Matrix checked_spd_inverse(const Matrix& sym, const char* what) {
  const double cond = spd_condition(sym);
  if (!(cond < kMaxInnovationCondition)) {
    throw NumericalError(std::string(what) + " is singular or ill-conditioned (condition " +
                             std::to_string(cond) + ")",
                         cond);
  }
  if (sym.rows() == 1) return Matrix::Constant(1, 1, 1.0 / sym(0, 0));
  Eigen::LLT<Matrix> llt(sym);
  return llt.solve(Matrix::Identity(sym.rows(), sym.cols()));
}

CovarianceStep covariance_step(const LinearGaussianModel& model, const Matrix& cov) {
  CovarianceStep out;
  out.predicted_cov = symmetrize(model.A * cov * model.A.transpose() + model.Q);
  const Matrix pct = out.predicted_cov * model.C.transpose();
  out.innovation_cov = symmetrize(model.C * pct + model.R);
  out.gain = pct * checked_spd_inverse(out.innovation_cov, "innovation covariance");
  out.posterior_cov = symmetrize(out.predicted_cov - out.gain * pct.transpose());
  return out;
}

KalmanStep kalman_step(const LinearGaussianModel& model, const GaussianBelief& belief,
                       const Vector& observation) {
  CovarianceStep cs = covariance_step(model, belief.cov());
  const Vector predicted_mean = model.A * belief.mean();
  Vector innovation = observation - model.C * predicted_mean;
  Vector mean = predicted_mean + cs.gain * innovation;
  return KalmanStep{std::move(cs.predicted_cov), std::move(cs.innovation_cov), std::move(cs.gain),
                    std::move(innovation), GaussianBelief(std::move(mean), std::move(cs.posterior_cov))};
}

KalmanStep kalman_step_information(const LinearGaussianModel& model, const GaussianBelief& belief,
                                   const Vector& observation) {
  const Matrix predicted = symmetrize(model.A * belief.cov() * model.A.transpose() + model.Q);
  const Matrix predicted_inv = checked_spd_inverse(predicted, "predicted covariance");
  const Matrix r_inv = checked_spd_inverse(model.R, "observation noise covariance");
  const Matrix ct_rinv = model.C.transpose() * r_inv;
  const Matrix info = symmetrize(predicted_inv + ct_rinv * model.C);
  Matrix posterior = symmetrize(checked_spd_inverse(info, "posterior information"));
  Matrix gain = posterior * ct_rinv;

  const Vector predicted_mean = model.A * belief.mean();
  Vector innovation = observation - model.C * predicted_mean;
  Vector mean = predicted_mean + gain * innovation;
  Matrix innovation_cov = symmetrize(model.C * predicted * model.C.transpose() + model.R);
  return KalmanStep{predicted, std::move(innovation_cov), std::move(gain), std::move(innovation),
                    GaussianBelief(std::move(mean), std::move(posterior))};
}

Matrix predicted_covariance_fixed_point(const LinearGaussianModel& model, double tol,
                                        std::size_t max_iter) {
  model.validate();
  Matrix predicted = model.Q;
  for (std::size_t it = 0; it < max_iter; ++it) {
    // One Riccati predictor step: update with the measurement, then predict.
    const Matrix pct = predicted * model.C.transpose();
    const Matrix s = symmetrize(model.C * pct + model.R);
    const Matrix filtered =
        predicted - pct * checked_spd_inverse(s, "innovation covariance") * pct.transpose();
    Matrix next = symmetrize(model.A * filtered * model.A.transpose() + model.Q);
    if (!next.allFinite()) break;
    const double change = (next - predicted).norm();
    const double scale = std::max(1.0, next.norm());
    predicted = std::move(next);
    if (change < tol * scale) return predicted;
  }
  throw DivergenceError("Riccati predictor did not converge within " + std::to_string(max_iter) +
                        " iterations");
}

}  // namespace radarkit
