#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "radarkit/rng.hpp"

namespace radarkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Linear Gaussian model shared by us and the adversary:
///   x_{k+1} = A x_k + w_k,  w_k ~ N(0, Q)
///   y_k     = C x_k + v_k,  v_k ~ N(0, R)
///   x_0     ~ N(prior_mean, prior_cov)
struct LinearGaussianModel {
  Matrix A;
  Matrix C;
  Matrix Q;
  Matrix R;
  Vector prior_mean;
  Matrix prior_cov;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index obs_dim() const { return C.rows(); }

  /// Throws ConfigError on dimension mismatch and ValidationError when Q or
  /// prior_cov is not symmetric PSD or R is not symmetric positive definite.
  void validate() const;

  /// Copy with the adversary's sensor gain replaced.
  LinearGaussianModel with_gain(const Matrix& gain) const;
  LinearGaussianModel with_gain(double gain) const;

  static LinearGaussianModel scalar(double a, double c, double q, double r,
                                    double prior_mean = 0.0, double prior_var = 1.0);
};

/// Mean/covariance pair. The covariance is symmetrized and tiny negative
/// eigenvalues (>= -1e-12, relative) are clamped to zero on construction.
class GaussianBelief {
 public:
  GaussianBelief() = default;
  GaussianBelief(Vector mean, Matrix cov);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

enum class PhiKind { Identity, InverseTraceScaled };

/// Maps the adversary's belief to its action: a_k = phi(Sigma_k) xhat_k + eps_k.
struct ActionMap {
  PhiKind kind = PhiKind::Identity;
  double action_noise_var = 1.0;

  Matrix phi(const Matrix& cov) const;
  void validate() const;
};

/// One coupled run of our state, the adversary's filter and its actions.
/// Every per-step sequence has length N and index i holds time k = i + 1.
struct EngagementTrace {
  Vector initial_state;                 // x_0
  std::vector<Vector> states;           // x_1..x_N
  std::vector<Vector> observations;     // y_1..y_N (adversary side)
  std::vector<Vector> adversary_means;  // xhat_1..xhat_N
  std::vector<Matrix> adversary_covs;   // Sigma_1..Sigma_N
  std::vector<Vector> actions;          // a_1..a_N
  std::uint64_t seed = 0;

  std::size_t horizon() const { return states.size(); }
  void validate() const;
};

EngagementTrace simulate_engagement(const LinearGaussianModel& model, const ActionMap& action_map,
                                    std::size_t horizon, std::uint64_t seed);

/// Square-root factor F with F F' = cov for a symmetric PSD matrix.
Matrix covariance_factor(const Matrix& cov);

/// Draws N(0, F F') using `factor` from covariance_factor.
Vector sample_gaussian(CounterRng& rng, const Matrix& factor);

/// (M + M') / 2
Matrix symmetrize(const Matrix& m);

/// Derives an independent seed for ensemble member `index`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace radarkit
