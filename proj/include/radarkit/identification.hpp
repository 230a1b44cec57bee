#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radarkit/inverse_tracker.hpp"
#include "radarkit/statespace.hpp"

namespace radarkit {

enum class LikelihoodMode { Classic, Inverse };

std::string to_string(LikelihoodMode mode);
LikelihoodMode likelihood_mode_from_string(const std::string& name);

/// Innovations log-likelihood of the adversary's gain from our view: actions
/// and our own states only. Includes the full Gaussian normalizer.
double loglik_inverse(const LinearGaussianModel& model, const ActionMap& action_map,
                      const EngagementTrace& trace, const InverseOptions& options = {});

/// Standard Kalman innovations log-likelihood of C from the adversary's
/// observations y_1..y_N.
double loglik_classic(const LinearGaussianModel& model, const EngagementTrace& trace);

double loglik(LikelihoodMode mode, const LinearGaussianModel& model, const ActionMap& action_map,
              const EngagementTrace& trace);

/// Log-likelihood of every trace under one model. The covariance recursion is
/// shared, so this is much cheaper than calling loglik per trace.
std::vector<double> loglik_ensemble(LikelihoodMode mode, const LinearGaussianModel& model,
                                    const ActionMap& action_map,
                                    const std::vector<EngagementTrace>& traces);

/// Uniform grid of `count` points on [lo, hi].
struct GainGrid {
  double lo = 0.01;
  double hi = 10.0;
  std::size_t count = 1000;

  std::vector<double> points() const;
  void validate() const;
};

struct LikelihoodCurve {
  std::vector<double> thetas;
  std::vector<double> loglik;
  std::optional<std::vector<double>> innovations_last;  // iota_k at theta_star
};

struct MleResult {
  double theta_star = 0.0;
  double loglik_star = 0.0;
  LikelihoodCurve curve;
  bool boundary_hit = false;
};

/// Grid scan followed by golden-section refinement inside the cells adjacent
/// to the best grid point. `model.C` is replaced by each candidate gain.
MleResult mle_gain(const LinearGaussianModel& model, const ActionMap& action_map,
                   const EngagementTrace& trace, LikelihoodMode mode, const GainGrid& grid,
                   double refine_tol = 1e-6);

/// mle_gain for every trace of an ensemble, sharing covariance work across
/// traces. Results equal per-trace mle_gain calls.
std::vector<MleResult> mle_gain_ensemble(const LinearGaussianModel& model,
                                         const ActionMap& action_map,
                                         const std::vector<EngagementTrace>& traces,
                                         LikelihoodMode mode, const GainGrid& grid,
                                         double refine_tol = 1e-6);

/// Ensemble mean of d^2 l / d theta^2 at theta by central differences.
double mean_curvature(LikelihoodMode mode, const LinearGaussianModel& model,
                      const ActionMap& action_map, const std::vector<EngagementTrace>& traces,
                      double theta, double h_theta);

struct SensitivitySteps {
  double h_theta = 0.0;  // 0 selects 1e-3 * max(1, |theta|)
  double h_q = 0.0;      // 0 selects 1e-3 * max(1, Q_11)
  double h_r = 0.0;      // 0 selects 1e-3 * max(1, R_11)
};

struct SensitivityReport {
  double eta_Q = 0.0;
  double eta_R = 0.0;
  double curvature = 0.0;  // mean d^2 l / d theta^2 at the true gain
  double h_theta = 0.0;
  double h_Q = 0.0;
  double h_R = 0.0;
  LikelihoodMode mode = LikelihoodMode::Classic;
  bool converged = true;  // halving every step moved each eta by < 10%
  double eta_Q_half = 0.0;
  double eta_R_half = 0.0;
};

/// eta_Q = d/dQ (d^2 l / d theta^2) at theta = model.C, with the traces held
/// fixed and Q perturbed as Q +- h_Q I in the likelihood model; eta_R alike.
SensitivityReport sensitivity(const LinearGaussianModel& model, const ActionMap& action_map,
                              const std::vector<EngagementTrace>& traces, LikelihoodMode mode,
                              const SensitivitySteps& steps = {});

/// 1 / mean(-d^2 l / d theta^2) at the true gain over `ensemble_size` traces
/// simulated from (model, action_map).
double crb_gain(const LinearGaussianModel& model, const ActionMap& action_map, LikelihoodMode mode,
                std::size_t ensemble_size, std::uint64_t seed, std::size_t horizon = 500,
                double h_theta = 0.0);

/// Traces for seeds derive_seed(seed, 0..count-1), simulated in parallel.
std::vector<EngagementTrace> simulate_ensemble(const LinearGaussianModel& model,
                                               const ActionMap& action_map, std::size_t horizon,
                                               std::uint64_t seed, std::size_t count);

/// Scalar benchmark used by the identification experiments:
/// A=0.9, Q=R=1, prior N(0,1), sigma_eps^2=1, phi=Identity, N=500, 50 traces.
struct Benchmark {
  double a = 0.9;
  double q = 1.0;
  double r = 1.0;
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double action_noise_var = 1.0;
  std::size_t horizon = 500;
  std::size_t ensemble = 50;

  LinearGaussianModel model(double gain) const;
  ActionMap action_map() const;
};

}  // namespace radarkit
