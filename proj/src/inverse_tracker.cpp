#include "radarkit/inverse_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "radarkit/errors.hpp"
#include "radarkit/parallel.hpp"

namespace radarkit {
namespace {

void check_trace(const LinearGaussianModel& model, const EngagementTrace& trace) {
  trace.validate();
  for (std::size_t k = 0; k < trace.horizon(); ++k) {
    if (trace.states[k].size() != model.state_dim() ||
        trace.actions[k].size() != model.state_dim()) {
      throw ValidationError("trace step " + std::to_string(k + 1) +
                            " does not match the model's state dimension");
    }
  }
}

double log_det_spd(const Matrix& m) {
  if (m.rows() == 1) return std::log(m(0, 0));
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("log-determinant of a non-SPD matrix");
  const Matrix& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

std::uint64_t uniform_index(CounterRng& rng, std::size_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng.next_u64()) * n) >> 64);
}

}  // namespace

std::vector<InverseModelParams> derive_inverse_params(const LinearGaussianModel& model,
                                                      const ActionMap& action_map,
                                                      std::size_t horizon,
                                                      const InverseOptions& options) {
  model.validate();
  action_map.validate();
  const Eigen::Index x = model.state_dim();
  const Matrix action_noise = action_map.action_noise_var * Matrix::Identity(x, x);

  std::vector<InverseModelParams> out;
  out.reserve(horizon);
  Matrix cov = model.prior_cov;
  for (std::size_t k = 0; k < horizon; ++k) {
    CovarianceStep cs = covariance_step(model, cov);
    InverseModelParams p;
    p.input_gain = cs.gain * model.C;
    p.transition = model.A - p.input_gain * model.A;
    p.action_gain = action_map.phi(cs.posterior_cov);
    p.process_cov = options.paper_literal_qbar
                        ? symmetrize(cs.gain * cs.gain.transpose())
                        : symmetrize(cs.gain * model.R * cs.gain.transpose());
    p.action_noise_cov = action_noise;
    p.kalman_gain = std::move(cs.gain);
    p.adversary_cov = cs.posterior_cov;
    cov = std::move(cs.posterior_cov);
    out.push_back(std::move(p));
  }
  return out;
}

InverseStep inverse_kalman_step_detailed(const InverseModelParams& params,
                                         const GaussianBelief& belief, const Vector& action,
                                         const Vector& our_state_next) {
  const Matrix& a_bar = params.transition;
  const Matrix& c_bar = params.action_gain;
  const Vector predicted_mean = a_bar * belief.mean() + params.input_gain * our_state_next;

  InverseStep out;
  out.predicted_cov = symmetrize(a_bar * belief.cov() * a_bar.transpose() + params.process_cov);
  const Matrix pct = out.predicted_cov * c_bar.transpose();
  out.innovation_cov = symmetrize(c_bar * pct + params.action_noise_cov);
  const Matrix gain = pct * checked_spd_inverse(out.innovation_cov, "inverse innovation covariance");
  out.innovation = action - c_bar * predicted_mean;
  out.posterior = GaussianBelief(predicted_mean + gain * out.innovation,
                                 symmetrize(out.predicted_cov - gain * pct.transpose()));
  return out;
}

GaussianBelief inverse_kalman_step(const InverseModelParams& params, const GaussianBelief& belief,
                                   const Vector& action, const Vector& our_state_next) {
  return inverse_kalman_step_detailed(params, belief, action, our_state_next).posterior;
}

GaussianBelief inverse_kalman_step_information(const InverseModelParams& params,
                                               const GaussianBelief& belief, const Vector& action,
                                               const Vector& our_state_next) {
  const Matrix& a_bar = params.transition;
  const Matrix& c_bar = params.action_gain;
  const Vector predicted_mean = a_bar * belief.mean() + params.input_gain * our_state_next;
  const Matrix predicted = symmetrize(a_bar * belief.cov() * a_bar.transpose() + params.process_cov);
  const Matrix r_inv = checked_spd_inverse(params.action_noise_cov, "action noise covariance");
  const Matrix ct_rinv = c_bar.transpose() * r_inv;
  const Matrix info = symmetrize(checked_spd_inverse(predicted, "inverse predicted covariance") +
                                 ct_rinv * c_bar);
  const Matrix posterior = symmetrize(checked_spd_inverse(info, "inverse posterior information"));
  const Vector mean = predicted_mean + posterior * ct_rinv * (action - c_bar * predicted_mean);
  return GaussianBelief(mean, posterior);
}

std::vector<InverseStep> inverse_kalman_filter(const LinearGaussianModel& model,
                                               const ActionMap& action_map,
                                               const EngagementTrace& trace,
                                               const InverseOptions& options) {
  check_trace(model, trace);
  const auto params = derive_inverse_params(model, action_map, trace.horizon(), options);
  std::vector<InverseStep> out;
  out.reserve(trace.horizon());
  const Eigen::Index x = model.state_dim();
  GaussianBelief belief(model.prior_mean, Matrix::Zero(x, x));
  for (std::size_t k = 0; k < trace.horizon(); ++k) {
    out.push_back(inverse_kalman_step_detailed(params[k], belief, trace.actions[k], trace.states[k]));
    belief = out.back().posterior;
  }
  return out;
}

std::vector<GaussianBelief> inverse_kalman_run(const LinearGaussianModel& model,
                                               const ActionMap& action_map,
                                               const EngagementTrace& trace,
                                               const InverseOptions& options) {
  std::vector<GaussianBelief> out;
  for (auto& step : inverse_kalman_filter(model, action_map, trace, options)) {
    out.push_back(std::move(step.posterior));
  }
  return out;
}

InverseSchedule inverse_schedule(const LinearGaussianModel& model, const ActionMap& action_map,
                                 std::size_t horizon, const InverseOptions& options) {
  InverseSchedule s;
  s.params = derive_inverse_params(model, action_map, horizon, options);
  s.initial_mean = model.prior_mean;
  s.gain.reserve(horizon);
  s.innovation_cov_inv.reserve(horizon);
  s.posterior_cov.reserve(horizon);
  s.log_det.reserve(horizon);

  const Eigen::Index x = model.state_dim();
  Matrix cov = Matrix::Zero(x, x);
  for (const auto& p : s.params) {
    const Matrix predicted = symmetrize(p.transition * cov * p.transition.transpose() + p.process_cov);
    const Matrix pct = predicted * p.action_gain.transpose();
    const Matrix innovation_cov = symmetrize(p.action_gain * pct + p.action_noise_cov);
    Matrix s_inv = checked_spd_inverse(innovation_cov, "inverse innovation covariance");
    Matrix gain = pct * s_inv;
    cov = symmetrize(predicted - gain * pct.transpose());
    s.log_det.push_back(log_det_spd(innovation_cov));
    s.gain.push_back(std::move(gain));
    s.innovation_cov_inv.push_back(std::move(s_inv));
    s.posterior_cov.push_back(cov);
  }
  return s;
}

double inverse_mean_pass(const InverseSchedule& schedule, const EngagementTrace& trace,
                         std::vector<Vector>* means) {
  const std::size_t n = schedule.params.size();
  if (trace.horizon() != n) throw ValidationError("trace length does not match schedule horizon");
  if (means) means->clear();
  double quad = 0.0;

  if (schedule.initial_mean.size() == 1) {
    double mean = schedule.initial_mean(0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = schedule.params[k];
      const double predicted = p.transition(0, 0) * mean + p.input_gain(0, 0) * trace.states[k](0);
      const double iota = trace.actions[k](0) - p.action_gain(0, 0) * predicted;
      quad += iota * iota * schedule.innovation_cov_inv[k](0, 0);
      mean = predicted + schedule.gain[k](0, 0) * iota;
      if (means) means->push_back(Vector::Constant(1, mean));
    }
    return quad;
  }

  Vector mean = schedule.initial_mean;
  Vector predicted(mean.size());
  Vector iota(mean.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = schedule.params[k];
    predicted.noalias() = p.transition * mean;
    predicted.noalias() += p.input_gain * trace.states[k];
    iota = trace.actions[k];
    iota.noalias() -= p.action_gain * predicted;
    quad += iota.dot(schedule.innovation_cov_inv[k] * iota);
    mean = predicted;
    mean.noalias() += schedule.gain[k] * iota;
    if (means) means->push_back(mean);
  }
  return quad;
}

Vector ParticleCloud::mean() const {
  Vector m = Vector::Zero(particles.rows());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    m += weights[i] * particles.col(static_cast<Eigen::Index>(i));
  }
  return m;
}

Vector ParticleCloud::bootstrap_standard_error(std::uint64_t seed, std::size_t replicates) const {
  const Eigen::Index dim = particles.rows();
  const std::size_t n = weights.size();
  if (n < 2 || replicates < 2) throw ValidationError("bootstrap needs at least two particles and replicates");
  Matrix reps(dim, static_cast<Eigen::Index>(replicates));
  parallel_for(replicates, [&](std::size_t b) {
    CounterRng rng(seed, streams::kBootstrap, b);
    Vector acc = Vector::Zero(dim);
    double wsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto idx = static_cast<Eigen::Index>(uniform_index(rng, n));
      const double w = weights[static_cast<std::size_t>(idx)];
      acc += w * particles.col(idx);
      wsum += w;
    }
    reps.col(static_cast<Eigen::Index>(b)) = wsum > 0.0 ? Vector(acc / wsum) : Vector(mean());
  });
  const Vector centre = reps.rowwise().mean();
  const Matrix dev = reps.colwise() - centre;
  return (dev.rowwise().squaredNorm() / static_cast<double>(replicates - 1)).cwiseSqrt();
}

std::vector<ParticleCloud> inverse_particle_filter(const LinearGaussianModel& model,
                                                   const ActionMap& action_map,
                                                   const EngagementTrace& trace,
                                                   std::size_t particle_count, std::uint64_t seed,
                                                   const ParticleOptions& options) {
  if (particle_count < 2) throw ValidationError("particle_count must be at least 2");
  check_trace(model, trace);
  if (!(action_map.action_noise_var > 0.0)) {
    throw DegeneracyError(
        "action noise variance is zero: particle weights are degenerate; use the inverse Kalman "
        "filter or a positive action_noise_var");
  }
  const std::size_t horizon = trace.horizon();
  const auto params = derive_inverse_params(model, action_map, horizon);
  const Eigen::Index x = model.state_dim();
  const Eigen::Index y = model.obs_dim();
  const auto n = static_cast<Eigen::Index>(particle_count);
  const Matrix r_factor = covariance_factor(model.R);
  const double inv_var = 1.0 / action_map.action_noise_var;

  Matrix particles = model.prior_mean.replicate(1, n);
  std::vector<double> log_w(particle_count, 0.0);
  std::vector<double> w(particle_count);
  Matrix noise(y, n);
  Matrix residual(x, n);
  std::vector<ParticleCloud> out;
  out.reserve(horizon);

  for (std::size_t k = 0; k < horizon; ++k) {
    const auto& p = params[k];
    const Vector& state = trace.states[k];
    const Vector& action = trace.actions[k];

    // y_{k+1} ~ N(C x_{k+1}, R) per particle; only its noise part enters below.
    parallel_for(particle_count, [&](std::size_t i) {
      CounterRng rng(seed, streams::kParticleBase + i, k + 1);
      for (Eigen::Index r = 0; r < y; ++r) noise(r, static_cast<Eigen::Index>(i)) = rng.normal();
    });
    const Matrix driven = p.kalman_gain * r_factor;
    Matrix next = p.transition * particles;
    next.colwise() += p.input_gain * state;
    next.noalias() += driven * noise;
    particles = std::move(next);

    residual = (-p.action_gain * particles).colwise() + action;
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < particle_count; ++i) {
      log_w[i] -= 0.5 * inv_var * residual.col(static_cast<Eigen::Index>(i)).squaredNorm();
      max_lw = std::max(max_lw, log_w[i]);
    }
    if (!std::isfinite(max_lw)) {
      throw DegeneracyError("all particle weights underflowed at step " + std::to_string(k + 1) +
                            "; increase action_noise_var or particle_count");
    }
    for (std::size_t i = 0; i < particle_count; ++i) w[i] = std::exp(log_w[i] - max_lw);
    const double total = pairwise_sum(w);
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw DegeneracyError("particle weights collapsed at step " + std::to_string(k + 1));
    }
    double sq = 0.0;
    for (auto& wi : w) {
      wi /= total;
      sq += wi * wi;
    }
    const double ess = 1.0 / sq;
    out.push_back(ParticleCloud{particles, w, ess});

    if (ess < options.resample_threshold * static_cast<double>(particle_count)) {
      CounterRng rng(seed, streams::kResampling, k + 1);
      const double step = 1.0 / static_cast<double>(particle_count);
      double u = rng.uniform() * step;
      double cum = w[0];
      std::size_t j = 0;
      Matrix resampled(x, n);
      for (std::size_t i = 0; i < particle_count; ++i) {
        while (u > cum && j + 1 < particle_count) cum += w[++j];
        resampled.col(static_cast<Eigen::Index>(i)) = particles.col(static_cast<Eigen::Index>(j));
        u += step;
      }
      particles = std::move(resampled);
      std::fill(log_w.begin(), log_w.end(), 0.0);
    } else {
      for (std::size_t i = 0; i < particle_count; ++i) log_w[i] = std::log(w[i]);
    }
  }
  return out;
}

}  // namespace radarkit
