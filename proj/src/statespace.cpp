#include "radarkit/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "radarkit/errors.hpp"
#include "radarkit/tracker.hpp"

namespace radarkit {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenTol = 1e-12;

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_square(const Matrix& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw ConfigError(std::string(name) + " must be " + std::to_string(n) + "x" +
                      std::to_string(n) + ", got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
}

void require_symmetric(const Matrix& m, const char* name) {
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.transpose()) > kSymmetryTol * scale) {
    throw ValidationError(std::string(name) + " is not symmetric");
  }
}

double min_eigenvalue(const Matrix& sym) {
  if (sym.rows() == 1) return sym(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(sym), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

void require_psd(const Matrix& m, const char* name) {
  require_symmetric(m, name);
  if (min_eigenvalue(m) < -kEigenTol * std::max(1.0, max_abs(m))) {
    throw ValidationError(std::string(name) + " is not positive semidefinite");
  }
}

void require_pd(const Matrix& m, const char* name) {
  require_symmetric(m, name);
  if (!(min_eigenvalue(m) > 0.0)) {
    throw ValidationError(std::string(name) + " is not positive definite");
  }
}

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void LinearGaussianModel::validate() const {
  const Eigen::Index x = A.rows();
  if (x == 0) throw ConfigError("state dimension must be positive");
  require_square(A, x, "A");
  if (C.cols() != x || C.rows() == 0) {
    throw ConfigError("C must have " + std::to_string(x) + " columns and at least one row");
  }
  require_square(Q, x, "Q");
  require_square(R, C.rows(), "R");
  require_square(prior_cov, x, "prior_cov");
  if (prior_mean.size() != x) throw ConfigError("prior_mean has wrong length");
  if (!A.allFinite() || !C.allFinite() || !prior_mean.allFinite()) {
    throw ValidationError("model contains non-finite entries");
  }
  require_psd(Q, "Q");
  require_pd(R, "R");
  require_psd(prior_cov, "prior_cov");
}

LinearGaussianModel LinearGaussianModel::with_gain(const Matrix& gain) const {
  LinearGaussianModel copy = *this;
  copy.C = gain;
  return copy;
}

LinearGaussianModel LinearGaussianModel::with_gain(double gain) const {
  if (C.rows() != 1 || C.cols() != 1) {
    throw ConfigError("scalar gain requires a 1x1 observation matrix");
  }
  return with_gain(Matrix::Constant(1, 1, gain));
}

LinearGaussianModel LinearGaussianModel::scalar(double a, double c, double q, double r,
                                                double prior_mean, double prior_var) {
  LinearGaussianModel m;
  m.A = Matrix::Constant(1, 1, a);
  m.C = Matrix::Constant(1, 1, c);
  m.Q = Matrix::Constant(1, 1, q);
  m.R = Matrix::Constant(1, 1, r);
  m.prior_mean = Vector::Constant(1, prior_mean);
  m.prior_cov = Matrix::Constant(1, 1, prior_var);
  return m;
}

GaussianBelief::GaussianBelief(Vector mean, Matrix cov) : mean_(std::move(mean)) {
  if (cov.rows() != mean_.size() || cov.cols() != mean_.size()) {
    throw ConfigError("belief covariance does not match mean dimension");
  }
  require_symmetric(cov, "belief covariance");
  cov_ = symmetrize(cov);
  const double scale = std::max(1.0, max_abs(cov_));
  if (cov_.rows() == 1) {
    if (cov_(0, 0) < -kEigenTol * scale) throw ValidationError("belief covariance is negative");
    cov_(0, 0) = std::max(0.0, cov_(0, 0));
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_);
  const double lo = eig.eigenvalues().minCoeff();
  if (lo < -kEigenTol * scale) throw ValidationError("belief covariance is not PSD");
  if (lo < 0.0) {
    const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
    cov_ = symmetrize(eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose());
  }
}

Matrix ActionMap::phi(const Matrix& cov) const {
  const Eigen::Index n = cov.rows();
  switch (kind) {
    case PhiKind::Identity:
      return Matrix::Identity(n, n);
    case PhiKind::InverseTraceScaled:
      return Matrix::Identity(n, n) / (1.0 + cov.trace());
  }
  return Matrix::Identity(n, n);
}

void ActionMap::validate() const {
  if (!(action_noise_var >= 0.0) || !std::isfinite(action_noise_var)) {
    throw ValidationError("action_noise_var must be a finite nonnegative number");
  }
}

void EngagementTrace::validate() const {
  const std::size_t n = states.size();
  if (actions.size() != n || adversary_means.size() != n || adversary_covs.size() != n) {
    throw ValidationError("engagement trace sequences have different lengths");
  }
  if (!observations.empty() && observations.size() != n) {
    throw ValidationError("engagement trace observations have the wrong length");
  }
}

Matrix covariance_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(cov));
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

Vector sample_gaussian(CounterRng& rng, const Matrix& factor) {
  Vector z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return factor * z;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over (base, index)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EngagementTrace simulate_engagement(const LinearGaussianModel& model, const ActionMap& action_map,
                                    std::size_t horizon, std::uint64_t seed) {
  model.validate();
  action_map.validate();
  if (horizon == 0) throw ConfigError("horizon must be at least 1");

  const Matrix q_factor = covariance_factor(model.Q);
  const Matrix r_factor = covariance_factor(model.R);
  const Matrix prior_factor = covariance_factor(model.prior_cov);
  const double action_sd = std::sqrt(action_map.action_noise_var);

  EngagementTrace trace;
  trace.seed = seed;
  trace.states.reserve(horizon);
  trace.observations.reserve(horizon);
  trace.adversary_means.reserve(horizon);
  trace.adversary_covs.reserve(horizon);
  trace.actions.reserve(horizon);

  CounterRng init_rng(seed, streams::kInitialState, 0);
  trace.initial_state = model.prior_mean + sample_gaussian(init_rng, prior_factor);

  Vector state = trace.initial_state;
  GaussianBelief belief(model.prior_mean, model.prior_cov);
  for (std::size_t k = 1; k <= horizon; ++k) {
    CounterRng w_rng(seed, streams::kProcessNoise, k);
    CounterRng v_rng(seed, streams::kObservationNoise, k);
    CounterRng e_rng(seed, streams::kActionNoise, k);

    state = model.A * state + sample_gaussian(w_rng, q_factor);
    Vector observation = model.C * state + sample_gaussian(v_rng, r_factor);
    KalmanStep step = kalman_step(model, belief, observation);
    belief = std::move(step.posterior);

    Vector action = action_map.phi(belief.cov()) * belief.mean();
    for (Eigen::Index i = 0; i < action.size(); ++i) action(i) += action_sd * e_rng.normal();

    trace.states.push_back(state);
    trace.observations.push_back(std::move(observation));
    trace.adversary_means.push_back(belief.mean());
    trace.adversary_covs.push_back(belief.cov());
    trace.actions.push_back(std::move(action));
  }
  return trace;
}

}  // namespace radarkit
