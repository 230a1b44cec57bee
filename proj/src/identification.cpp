#include "radarkit/identification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "radarkit/errors.hpp"
#include "radarkit/parallel.hpp"
#include "radarkit/tracker.hpp"

namespace radarkit {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double log_det_spd(const Matrix& m) {
  if (m.rows() == 1) return std::log(m(0, 0));
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("log-determinant of a non-SPD matrix");
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(llt.matrixLLT()(i, i));
  return 2.0 * s;
}

struct ClassicSchedule {
  const LinearGaussianModel* model = nullptr;
  std::vector<Matrix> gain;
  std::vector<Matrix> innovation_cov_inv;
  double log_det_sum = 0.0;
};

ClassicSchedule classic_schedule(const LinearGaussianModel& model, std::size_t horizon) {
  model.validate();
  ClassicSchedule s;
  s.model = &model;
  s.gain.reserve(horizon);
  s.innovation_cov_inv.reserve(horizon);
  Matrix cov = model.prior_cov;
  for (std::size_t k = 0; k < horizon; ++k) {
    CovarianceStep cs = covariance_step(model, cov);
    s.log_det_sum += log_det_spd(cs.innovation_cov);
    s.innovation_cov_inv.push_back(checked_spd_inverse(cs.innovation_cov, "innovation covariance"));
    s.gain.push_back(std::move(cs.gain));
    cov = std::move(cs.posterior_cov);
  }
  return s;
}

/// Sum of iota' S^{-1} iota over y_1..y_N; innovations appended when asked.
double classic_mean_pass(const ClassicSchedule& s, const EngagementTrace& trace,
                         std::vector<double>* innovations = nullptr) {
  const LinearGaussianModel& m = *s.model;
  const std::size_t n = s.gain.size();
  if (trace.observations.size() != n) {
    throw ValidationError("classic likelihood needs the adversary's observations for every step");
  }
  double quad = 0.0;
  if (m.state_dim() == 1 && m.obs_dim() == 1 && !innovations) {
    const double a = m.A(0, 0);
    const double c = m.C(0, 0);
    double mean = m.prior_mean(0);
    for (std::size_t k = 0; k < n; ++k) {
      const double predicted = a * mean;
      const double iota = trace.observations[k](0) - c * predicted;
      quad += iota * iota * s.innovation_cov_inv[k](0, 0);
      mean = predicted + s.gain[k](0, 0) * iota;
    }
    return quad;
  }
  Vector mean = m.prior_mean;
  Vector predicted(mean.size());
  Vector iota(m.obs_dim());
  for (std::size_t k = 0; k < n; ++k) {
    predicted.noalias() = m.A * mean;
    iota = trace.observations[k];
    iota.noalias() -= m.C * predicted;
    quad += iota.dot(s.innovation_cov_inv[k] * iota);
    mean = predicted;
    mean.noalias() += s.gain[k] * iota;
    if (innovations) innovations->insert(innovations->end(), iota.data(), iota.data() + iota.size());
  }
  return quad;
}

double classic_loglik_from(const ClassicSchedule& s, const EngagementTrace& trace) {
  const double n = static_cast<double>(s.gain.size());
  const double y = static_cast<double>(s.model->obs_dim());
  return -0.5 * n * y * kLog2Pi - 0.5 * s.log_det_sum - 0.5 * classic_mean_pass(s, trace);
}

double inverse_loglik_from(const InverseSchedule& s, double log_det_sum,
                           const EngagementTrace& trace) {
  const double n = static_cast<double>(s.params.size());
  const double dim = s.params.empty() ? 0.0 : static_cast<double>(s.params.front().action_gain.rows());
  return -0.5 * n * dim * kLog2Pi - 0.5 * log_det_sum - 0.5 * inverse_mean_pass(s, trace);
}

void require_nonempty(const EngagementTrace& trace) {
  if (trace.horizon() == 0) throw ValidationError("empty trace: log-likelihood needs N >= 1");
}

void require_scalar(const LinearGaussianModel& model) {
  if (model.C.rows() != 1 || model.C.cols() != 1) {
    throw ConfigError("gain estimation supports scalar models only");
  }
}

std::string theta_text(double theta) {
  std::ostringstream os;
  os.precision(17);
  os << theta;
  return os.str();
}

double checked(double value, double theta) {
  if (!std::isfinite(value)) {
    throw NumericalError("non-finite log-likelihood at theta=" + theta_text(theta));
  }
  return value;
}

std::vector<double> innovations_at(LikelihoodMode mode, const LinearGaussianModel& model,
                                   const ActionMap& action_map, const EngagementTrace& trace) {
  std::vector<double> out;
  if (mode == LikelihoodMode::Classic) {
    const ClassicSchedule s = classic_schedule(model, trace.horizon());
    classic_mean_pass(s, trace, &out);
  } else {
    for (const auto& step : inverse_kalman_filter(model, action_map, trace)) {
      out.insert(out.end(), step.innovation.data(), step.innovation.data() + step.innovation.size());
    }
  }
  return out;
}

/// Golden-section maximization of f on [lo, hi].
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

MleResult finish_mle(std::vector<double> thetas, std::vector<double> values,
                     const std::function<double(double)>& eval, double refine_tol) {
  const auto best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  MleResult r;
  r.boundary_hit = best == 0 || best + 1 == thetas.size();
  r.theta_star = thetas[best];
  r.loglik_star = values[best];
  if (thetas.size() >= 2) {
    const double lo = thetas[best == 0 ? 0 : best - 1];
    const double hi = thetas[std::min(best + 1, thetas.size() - 1)];
    const auto [t, v] = golden_max(eval, lo, hi, refine_tol);
    if (v > r.loglik_star) {
      r.theta_star = t;
      r.loglik_star = v;
    }
  }
  r.curve.thetas = std::move(thetas);
  r.curve.loglik = std::move(values);
  return r;
}

}  // namespace

std::string to_string(LikelihoodMode mode) {
  return mode == LikelihoodMode::Classic ? "Classic" : "Inverse";
}

LikelihoodMode likelihood_mode_from_string(const std::string& name) {
  if (name == "Classic") return LikelihoodMode::Classic;
  if (name == "Inverse") return LikelihoodMode::Inverse;
  throw ConfigError("unknown likelihood mode '" + name + "' (expected Classic or Inverse)");
}

double loglik_inverse(const LinearGaussianModel& model, const ActionMap& action_map,
                      const EngagementTrace& trace, const InverseOptions& options) {
  require_nonempty(trace);
  const InverseSchedule s = inverse_schedule(model, action_map, trace.horizon(), options);
  const double log_det_sum = pairwise_sum(s.log_det);
  return inverse_loglik_from(s, log_det_sum, trace);
}

double loglik_classic(const LinearGaussianModel& model, const EngagementTrace& trace) {
  require_nonempty(trace);
  return classic_loglik_from(classic_schedule(model, trace.horizon()), trace);
}

double loglik(LikelihoodMode mode, const LinearGaussianModel& model, const ActionMap& action_map,
              const EngagementTrace& trace) {
  return mode == LikelihoodMode::Classic ? loglik_classic(model, trace)
                                         : loglik_inverse(model, action_map, trace);
}

std::vector<double> loglik_ensemble(LikelihoodMode mode, const LinearGaussianModel& model,
                                    const ActionMap& action_map,
                                    const std::vector<EngagementTrace>& traces) {
  std::vector<double> out(traces.size());
  if (traces.empty()) return out;
  const std::size_t horizon = traces.front().horizon();
  for (const auto& t : traces) {
    require_nonempty(t);
    if (t.horizon() != horizon) throw ValidationError("ensemble traces differ in length");
  }
  if (mode == LikelihoodMode::Classic) {
    const ClassicSchedule s = classic_schedule(model, horizon);
    for (std::size_t i = 0; i < traces.size(); ++i) out[i] = classic_loglik_from(s, traces[i]);
  } else {
    const InverseSchedule s = inverse_schedule(model, action_map, horizon);
    const double log_det_sum = pairwise_sum(s.log_det);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      out[i] = inverse_loglik_from(s, log_det_sum, traces[i]);
    }
  }
  return out;
}

std::vector<double> GainGrid::points() const {
  validate();
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return out;
}

void GainGrid::validate() const {
  if (!(lo > 0.0)) throw ConfigError("gain grid must start above zero");
  if (!(hi >= lo) || count == 0 || (count > 1 && !(hi > lo))) {
    throw ConfigError("gain grid needs hi > lo and count >= 1");
  }
}

MleResult mle_gain(const LinearGaussianModel& model, const ActionMap& action_map,
                   const EngagementTrace& trace, LikelihoodMode mode, const GainGrid& grid,
                   double refine_tol) {
  return mle_gain_ensemble(model, action_map, {trace}, mode, grid, refine_tol).front();
}

std::vector<MleResult> mle_gain_ensemble(const LinearGaussianModel& model,
                                         const ActionMap& action_map,
                                         const std::vector<EngagementTrace>& traces,
                                         LikelihoodMode mode, const GainGrid& grid,
                                         double refine_tol) {
  require_scalar(model);
  if (!(refine_tol > 0.0)) throw ConfigError("refine_tol must be positive");
  const std::vector<double> thetas = grid.points();
  const std::size_t m = traces.size();

  std::vector<std::vector<double>> table(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t j) {
    table[j] = loglik_ensemble(mode, model.with_gain(thetas[j]), action_map, traces);
    for (double v : table[j]) checked(v, thetas[j]);
  });

  std::vector<MleResult> out(m);
  parallel_for(m, [&](std::size_t i) {
    std::vector<double> values(thetas.size());
    for (std::size_t j = 0; j < thetas.size(); ++j) values[j] = table[j][i];
    auto eval = [&](double theta) {
      return checked(loglik(mode, model.with_gain(theta), action_map, traces[i]), theta);
    };
    out[i] = finish_mle(thetas, std::move(values), eval, refine_tol);
    out[i].curve.innovations_last =
        innovations_at(mode, model.with_gain(out[i].theta_star), action_map, traces[i]);
  });
  return out;
}

double mean_curvature(LikelihoodMode mode, const LinearGaussianModel& model,
                      const ActionMap& action_map, const std::vector<EngagementTrace>& traces,
                      double theta, double h_theta) {
  require_scalar(model);
  if (traces.empty()) throw ValidationError("curvature needs at least one trace");
  auto mean_ll = [&](double t) {
    const auto v = loglik_ensemble(mode, model.with_gain(t), action_map, traces);
    return checked(pairwise_sum(v) / static_cast<double>(v.size()), t);
  };
  const double plus = mean_ll(theta + h_theta);
  const double mid = mean_ll(theta);
  const double minus = mean_ll(theta - h_theta);
  return (plus - 2.0 * mid + minus) / (h_theta * h_theta);
}

namespace {

struct EtaPair {
  double eta_q;
  double eta_r;
  double curvature;
};

EtaPair eta_at(const LinearGaussianModel& model, const ActionMap& action_map,
               const std::vector<EngagementTrace>& traces, LikelihoodMode mode, double h_theta,
               double h_q, double h_r) {
  const double theta = model.C(0, 0);
  const Eigen::Index x = model.state_dim();
  const Eigen::Index y = model.obs_dim();
  auto curv = [&](const LinearGaussianModel& m) {
    return mean_curvature(mode, m, action_map, traces, theta, h_theta);
  };
  LinearGaussianModel q_plus = model, q_minus = model, r_plus = model, r_minus = model;
  q_plus.Q += h_q * Matrix::Identity(x, x);
  q_minus.Q -= h_q * Matrix::Identity(x, x);
  r_plus.R += h_r * Matrix::Identity(y, y);
  r_minus.R -= h_r * Matrix::Identity(y, y);
  return EtaPair{(curv(q_plus) - curv(q_minus)) / (2.0 * h_q),
                 (curv(r_plus) - curv(r_minus)) / (2.0 * h_r), curv(model)};
}

bool within_ten_percent(double full, double half) {
  return std::abs(full - half) <= 0.1 * std::max(std::abs(full), std::abs(half));
}

}  // namespace

SensitivityReport sensitivity(const LinearGaussianModel& model, const ActionMap& action_map,
                              const std::vector<EngagementTrace>& traces, LikelihoodMode mode,
                              const SensitivitySteps& steps) {
  require_scalar(model);
  model.validate();
  for (const auto& m : {model.Q, model.R}) {
    if (m.rows() != 1) throw ConfigError("sensitivity supports scalar Q and R only");
  }
  SensitivityReport r;
  r.mode = mode;
  r.h_theta = steps.h_theta > 0.0 ? steps.h_theta : 1e-3 * std::max(1.0, std::abs(model.C(0, 0)));
  r.h_Q = steps.h_q > 0.0 ? steps.h_q : 1e-3 * std::max(1.0, model.Q(0, 0));
  r.h_R = steps.h_r > 0.0 ? steps.h_r : 1e-3 * std::max(1.0, model.R(0, 0));
  if (model.Q(0, 0) - r.h_Q < 0.0 || model.R(0, 0) - r.h_R <= 0.0) {
    throw ConfigError("finite-difference step would make Q or R non-positive");
  }

  const EtaPair full = eta_at(model, action_map, traces, mode, r.h_theta, r.h_Q, r.h_R);
  const EtaPair half = eta_at(model, action_map, traces, mode, r.h_theta / 2, r.h_Q / 2, r.h_R / 2);
  r.eta_Q = full.eta_q;
  r.eta_R = full.eta_r;
  r.curvature = full.curvature;
  r.eta_Q_half = half.eta_q;
  r.eta_R_half = half.eta_r;
  r.converged = within_ten_percent(full.eta_q, half.eta_q) && within_ten_percent(full.eta_r, half.eta_r);
  return r;
}

std::vector<EngagementTrace> simulate_ensemble(const LinearGaussianModel& model,
                                               const ActionMap& action_map, std::size_t horizon,
                                               std::uint64_t seed, std::size_t count) {
  std::vector<EngagementTrace> out(count);
  parallel_for(count, [&](std::size_t i) {
    out[i] = simulate_engagement(model, action_map, horizon, derive_seed(seed, i));
  });
  return out;
}

double crb_gain(const LinearGaussianModel& model, const ActionMap& action_map, LikelihoodMode mode,
                std::size_t ensemble_size, std::uint64_t seed, std::size_t horizon,
                double h_theta) {
  require_scalar(model);
  if (ensemble_size < 100) throw ConfigError("crb_gain needs ensemble_size >= 100");
  const double theta = model.C(0, 0);
  const double h = h_theta > 0.0 ? h_theta : 1e-3 * std::max(1.0, std::abs(theta));
  const auto traces = simulate_ensemble(model, action_map, horizon, seed, ensemble_size);
  const double fisher = -mean_curvature(mode, model, action_map, traces, theta, h);
  if (!(fisher > 0.0) || !std::isfinite(fisher)) {
    throw NumericalError("nonpositive Fisher information estimate " + theta_text(fisher) +
                         "; enlarge the ensemble or change the step");
  }
  return 1.0 / fisher;
}

LinearGaussianModel Benchmark::model(double gain) const {
  return LinearGaussianModel::scalar(a, gain, q, r, prior_mean, prior_var);
}

ActionMap Benchmark::action_map() const {
  ActionMap m;
  m.kind = PhiKind::Identity;
  m.action_noise_var = action_noise_var;
  return m;
}

}  // namespace radarkit
