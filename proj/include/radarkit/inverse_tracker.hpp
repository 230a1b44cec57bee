#pragma once

#include <cstdint>
#include <vector>

#include "radarkit/statespace.hpp"
#include "radarkit/tracker.hpp"

namespace radarkit {

/// Linear Gaussian system seen by us, with the adversary's mean as state:
///   xhat_{k+1} = Abar_k xhat_k + Fbar_k x_{k+1} + psi_{k+1} v_{k+1}
///   a_{k+1}    = Cbar_{k+1} xhat_{k+1} + eps_{k+1}
/// Entry k of a params sequence (k = 0..N-1) drives the step k -> k+1.
struct InverseModelParams {
  Matrix transition;        // Abar_k = (I - psi_{k+1} C) A
  Matrix input_gain;        // Fbar_k = psi_{k+1} C
  Matrix action_gain;       // Cbar_{k+1} = phi(Sigma_{k+1})
  Matrix process_cov;       // Qbar_k
  Matrix action_noise_cov;  // Rbar = sigma_eps^2 I
  Matrix kalman_gain;       // psi_{k+1}
  Matrix adversary_cov;     // Sigma_{k+1}
};

struct InverseOptions {
  /// Use psi psi' for Qbar instead of psi R psi'.
  bool paper_literal_qbar = false;
};

std::vector<InverseModelParams> derive_inverse_params(const LinearGaussianModel& model,
                                                      const ActionMap& action_map,
                                                      std::size_t horizon,
                                                      const InverseOptions& options = {});

struct InverseStep {
  Matrix predicted_cov;   // Sigmabar_{k+1|k}
  Vector innovation;      // iota_{k+1}
  Matrix innovation_cov;  // Sbar_{k+1}
  GaussianBelief posterior;
};

InverseStep inverse_kalman_step_detailed(const InverseModelParams& params,
                                         const GaussianBelief& belief, const Vector& action,
                                         const Vector& our_state_next);

GaussianBelief inverse_kalman_step(const InverseModelParams& params, const GaussianBelief& belief,
                                   const Vector& action, const Vector& our_state_next);

/// Information-form update. Needs invertible Sigmabar_{k+1|k} and Rbar.
GaussianBelief inverse_kalman_step_information(const InverseModelParams& params,
                                               const GaussianBelief& belief, const Vector& action,
                                               const Vector& our_state_next);

/// Full recursion from (prior_mean, 0), one entry per trace step.
std::vector<InverseStep> inverse_kalman_filter(const LinearGaussianModel& model,
                                               const ActionMap& action_map,
                                               const EngagementTrace& trace,
                                               const InverseOptions& options = {});

std::vector<GaussianBelief> inverse_kalman_run(const LinearGaussianModel& model,
                                               const ActionMap& action_map,
                                               const EngagementTrace& trace,
                                               const InverseOptions& options = {});

/// Observation-independent part of the inverse recursion, precomputed once
/// per model so that many traces can share it.
struct InverseSchedule {
  std::vector<InverseModelParams> params;
  std::vector<Matrix> gain;                // Kbar_{k+1}
  std::vector<Matrix> innovation_cov_inv;  // Sbar_{k+1}^{-1}
  std::vector<Matrix> posterior_cov;       // Sigmabar_{k+1}
  std::vector<double> log_det;             // log |Sbar_{k+1}|
  Vector initial_mean;
};

InverseSchedule inverse_schedule(const LinearGaussianModel& model, const ActionMap& action_map,
                                 std::size_t horizon, const InverseOptions& options = {});

/// Runs the mean recursion of a schedule over a trace and returns
/// sum_k iota' Sbar^{-1} iota. Posterior means are written to `means` when
/// it is non-null.
double inverse_mean_pass(const InverseSchedule& schedule, const EngagementTrace& trace,
                         std::vector<Vector>* means = nullptr);

/// Weighted particle approximation of the adversary's mean at one time step.
struct ParticleCloud {
  Matrix particles;              // X x count, one particle per column
  std::vector<double> weights;   // normalized
  double ess = 0.0;

  std::size_t count() const { return weights.size(); }
  Vector mean() const;
  /// Bootstrap standard error of each component of the weighted mean: the
  /// (particle, weight) pairs are resampled uniformly and self-normalized.
  Vector bootstrap_standard_error(std::uint64_t seed, std::size_t replicates = 200) const;
};

struct ParticleOptions {
  double resample_threshold = 0.5;  // fraction of particle_count
};

/// One cloud per trace step, holding the weighted particles before any
/// resampling at that step.
std::vector<ParticleCloud> inverse_particle_filter(const LinearGaussianModel& model,
                                                   const ActionMap& action_map,
                                                   const EngagementTrace& trace,
                                                   std::size_t particle_count, std::uint64_t seed,
                                                   const ParticleOptions& options = {});

}  // namespace radarkit
