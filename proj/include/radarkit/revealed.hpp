#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "radarkit/statespace.hpp"

namespace radarkit {

/// Linear budget alpha' beta <= p_star.
struct LinearBudget {
  double p_star = 1.0;
};

/// Which side of the SINR surface counts as "within budget":
///   RadarThreshold: g(beta) = delta - SINR(beta)
///   RayMonotone:    g(beta) = SINR(beta) - delta
enum class SinrOrientation { RadarThreshold, RayMonotone };

using PBuilder = std::function<Matrix(const Vector& alpha)>;

/// diag(alpha) + ridge * I
PBuilder diagonal_p_builder(double ridge = 0.01);

struct SinrBudget {
  Matrix Q;
  PBuilder p_builder = diagonal_p_builder();
  double ridge = 0.01;  // recorded for serialization of the default builder
  double gamma = 1.0;
  double delta = 1.0;
  SinrOrientation orientation = SinrOrientation::RadarThreshold;
};

/// g(n, beta); must be increasing in beta.
struct CallableBudget {
  std::function<double(std::size_t, const Vector&)> g;
};

using BudgetSpec = std::variant<LinearBudget, SinrBudget, CallableBudget>;

struct RPDataset {
  std::vector<Vector> probes;     // alpha_n > 0
  std::vector<Vector> responses;  // beta_n >= 0
  BudgetSpec budget = LinearBudget{};

  std::size_t size() const { return probes.size(); }
  Eigen::Index dim() const { return probes.empty() ? 0 : probes.front().size(); }
  bool is_linear() const { return std::holds_alternative<LinearBudget>(budget); }

  /// g_n(beta) for the attached budget.
  double budget_value(std::size_t n, const Vector& beta) const;

  /// Shapes, signs and (for nonlinear budgets) |g_n(beta_n)| <= 1e-6.
  void validate() const;
};

/// Linear dataset in canonical form: probes divided by p_star, budget p_star = 1.
RPDataset make_linear_dataset(std::vector<Vector> probes, std::vector<Vector> responses,
                              double p_star = 1.0);

inline constexpr double kBoundaryTol = 1e-6;

struct GarpVerdict {
  bool pass = true;
  std::vector<std::size_t> cycle;  // 0-based, first index repeated at the end
};

/// GARP for a linear budget via Warshall closure of the weak relation.
GarpVerdict garp_check(const RPDataset& dataset);

/// GARP with the relation t R s iff g_t(beta_s) <= g_t(beta_t).
GarpVerdict nonlinear_garp(const RPDataset& dataset);

struct AfriatCertificate {
  std::vector<double> u;
  std::vector<double> lambda;
  double residual = 0.0;  // max_{s,t} u_s - u_t - lambda_t slack_t(beta_s)
};

struct AfriatVerdict {
  bool rational = false;
  std::optional<AfriatCertificate> certificate;
  std::size_t iterations = 0;
};

/// slack_t(beta) = alpha_t'(beta - beta_t) (linear) or g_t(beta) - g_t(beta_t).
double afriat_slack(const RPDataset& dataset, std::size_t t, const Vector& beta);

double certificate_residual(const RPDataset& dataset, const AfriatCertificate& cert);

/// Feasibility of Afriat's inequalities with lambda_t >= 1. Throws
/// IndeterminateError when the solver cannot decide.
AfriatVerdict afriat_feasibility(const RPDataset& dataset);

/// U(beta) = min_t [u_t + lambda_t slack_t(beta)].
class AfriatUtility {
 public:
  AfriatUtility(RPDataset dataset, AfriatCertificate cert);
  double operator()(const Vector& beta) const;
  const AfriatCertificate& certificate() const { return cert_; }

 private:
  RPDataset dataset_;
  AfriatCertificate cert_;
};

AfriatUtility construct_utility(const RPDataset& dataset, const AfriatCertificate& cert);

/// beta'Q beta / (beta'P beta + gamma)
double sinr_value(const Matrix& Q, const Matrix& P, double gamma, const Vector& beta);

struct Thm4Verdict {
  bool monotone = false;
  std::string reason;  // empty when monotone
};

/// Sufficient conditions for an increasing SINR budget: Q diagonal and every
/// entry of (c/d) P(alpha_n) - Q negative, c = lambda_min(P), d = lambda_max(Q).
/// `relaxed` accepts zero off-diagonal entries.
Thm4Verdict thm4_monotonicity_check(const Matrix& Q, const std::vector<Matrix>& p_alphas,
                                    bool relaxed = false);

/// alpha_i = trace of the inverse steady-state predicted covariance of target i.
Vector beam_probe(const std::vector<LinearGaussianModel>& targets);

struct CobbDouglas {
  Vector weights;
};

/// Leontief utility min_i beta_i / w_i.
struct MinLinear {
  Vector weights;
};

using TrueUtility = std::variant<CobbDouglas, MinLinear>;

double utility_value(const TrueUtility& utility, const Vector& beta);

/// Responses that maximize `utility` on each probe's budget boundary.
RPDataset synth_responder(const BudgetSpec& budget, const TrueUtility& utility,
                          const std::vector<Vector>& probes);

/// Closed-loop beam-allocation scenario: per epoch our maneuver scales set
/// each target's Q, alpha_n comes from beam_probe, and the responder splits
/// its dwell budget by a Cobb-Douglas rule. With dwell coupling the next
/// epoch uses R_n(i) = r0 / beta_{n-1}(i).
struct BeamScenario {
  std::vector<LinearGaussianModel> targets;
  std::size_t epochs = 20;
  double q_scale_lo = 0.5;
  double q_scale_hi = 2.0;
  bool dwell_coupling = false;
  double r0 = 1.0;
  Vector utility_weights;
  std::uint64_t seed = 0;
};

RPDataset beam_scenario(const BeamScenario& scenario);

}  // namespace radarkit
