#include "radarkit/interference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "radarkit/errors.hpp"
#include "radarkit/parallel.hpp"
#include "radarkit/rng.hpp"

namespace radarkit {
namespace {

constexpr std::size_t kPowerMaxIter = 10000;
constexpr double kPowerTol = 1e-12;
constexpr std::size_t kSampleBlock = 1024;

bool is_real(const CMatrix& m) { return m.imag().cwiseAbs().maxCoeff() == 0.0; }

bool real_valued(const MimoChannel& channel, const ProbePlan& plan) {
  if (!is_real(channel.H_t) || !is_real(channel.H_c)) return false;
  for (const auto& p : plan.probes)
    if (!is_real(p)) return false;
  return true;
}

// Zero-mean noise with per-component variance `var`: real Gaussian for
// real-valued scenarios, circular complex Gaussian otherwise.
CVector draw_noise(CounterRng& rng, Eigen::Index n, double var, bool real) {
  CVector e(n);
  if (real) {
    const double s = std::sqrt(var);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = Complex(s * rng.normal(), 0.0);
  } else {
    const double s = std::sqrt(0.5 * var);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = rng.normal();
      e(i) = Complex(s * re, s * rng.normal());
    }
  }
  return e;
}

void fix_phase(CVector& w) {
  Eigen::Index idx = 0;
  w.cwiseAbs().maxCoeff(&idx);
  const double mag = std::abs(w(idx));
  if (mag > 0.0) w *= std::conj(w(idx)) / mag;
  w(idx) = Complex(w(idx).real(), 0.0);
}

}  // namespace

void MimoChannel::validate() const {
  if (I < 1 || J < 1 || K < 1) throw ConfigError("channel dimensions I, J, K must be positive");
  if (H_t.rows() != receive_dim() || H_t.cols() != waveform_dim()) {
    throw ConfigError("H_t must be (J K) x (I J K)");
  }
  if (H_c.rows() != H_t.rows() || H_c.cols() != H_t.cols()) {
    throw ConfigError("H_c must have the shape of H_t");
  }
  if (!H_t.allFinite() || !H_c.allFinite()) throw ValidationError("channel matrices must be finite");
  if (!(radar_noise_var > 0.0) || !std::isfinite(radar_noise_var)) {
    throw ValidationError("radar noise variance must be positive");
  }
  if (!(our_noise_var >= 0.0) || !std::isfinite(our_noise_var)) {
    throw ValidationError("our noise variance must be nonnegative");
  }
}

double ProbePlan::power() const {
  double s = 0.0;
  for (const auto& p : probes) s += p.squaredNorm();
  return s;
}

void ProbePlan::validate(const MimoChannel& channel) const {
  for (const auto& p : probes) {
    if (p.rows() != channel.H_c.rows() || p.cols() != channel.H_c.cols()) {
      throw ConfigError("probe shape differs from H_c");
    }
  }
  if (!std::isfinite(power())) throw ValidationError("probe power must be finite");
}

CMatrix clutter_at(const MimoChannel& channel, const ProbePlan& plan, std::size_t pulse) {
  if (pulse < 1 || pulse > plan.pulses()) {
    throw ConfigError("pulse " + std::to_string(pulse) + " outside plan of length " +
                      std::to_string(plan.pulses()));
  }
  if (plan.lag == ProbeLag::Simultaneous) return channel.H_c + plan.probes[pulse - 1];
  if (pulse == 1) return channel.H_c;
  return channel.H_c + plan.probes[pulse - 2];
}

double scnr(const CMatrix& H_t, const CMatrix& H_c, const CVector& W, double radar_noise_var) {
  if (H_t.cols() != W.size() || H_c.cols() != W.size() || H_c.rows() != H_t.rows()) {
    throw ConfigError("waveform length does not match the channel");
  }
  const double noise = static_cast<double>(H_t.rows()) * radar_noise_var;
  return (H_t * W).squaredNorm() / ((H_c * W).squaredNorm() + noise);
}

WaveformSolution optimal_waveform(const CMatrix& H_t, const CMatrix& H_c, double radar_noise_var) {
  if (H_c.rows() != H_t.rows() || H_c.cols() != H_t.cols()) {
    throw ConfigError("H_c must have the shape of H_t");
  }
  if (!(radar_noise_var > 0.0)) throw ValidationError("radar noise variance must be positive");
  const Eigen::Index n = H_t.cols();
  const double loading = static_cast<double>(H_t.rows()) * radar_noise_var;

  const CMatrix pencil = H_c.adjoint() * H_c + loading * CMatrix::Identity(n, n);
  const Eigen::LLT<CMatrix> llt(pencil);
  if (llt.info() != Eigen::Success) throw NumericalError("clutter pencil is not positive definite");
  const auto L = llt.matrixL();

  // M = L^{-1} H_t'H_t L^{-H}
  const CMatrix x = L.solve(CMatrix(H_t.adjoint() * H_t));
  CMatrix m = L.solve(CMatrix(x.adjoint())).adjoint();
  m = (0.5 * (m + m.adjoint())).eval();

  WaveformSolution out;
  CVector v;
  double lambda = 0.0;
  Eigen::Index start = 0;
  const double top = m.colwise().norm().maxCoeff(&start);
  if (top == 0.0) {
    out.degenerate = true;
    v = CVector::Zero(n);
    v(0) = 1.0;
  } else {
    v = m.col(start) / top;
    bool converged = false;
    for (; out.iterations < kPowerMaxIter; ++out.iterations) {
      const CVector w = m * v;
      const double next = v.dot(w).real();
      const double norm = w.norm();
      if (norm == 0.0) break;
      v = w / norm;
      const bool done = std::abs(next - lambda) < kPowerTol * std::abs(next);
      lambda = next;
      if (done) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      out.degenerate = true;
      const Eigen::SelfAdjointEigenSolver<CMatrix> eig(m);
      v = eig.eigenvectors().col(n - 1);
    }
    lambda = v.dot(m * v).real() / v.squaredNorm();
  }

  CVector w = L.adjoint().solve(v);
  w.normalize();
  fix_phase(w);
  out.waveform = std::move(w);
  out.eigenvalue = lambda;
  out.scnr_max = scnr(H_t, H_c, out.waveform, radar_noise_var);
  return out;
}

WaveformSolution optimal_waveform(const MimoChannel& channel, const CMatrix& H_c) {
  return optimal_waveform(channel.H_t, H_c, channel.radar_noise_var);
}

std::vector<PulseRecord> simulate_pulses(const MimoChannel& channel, const ProbePlan& plan,
                                         std::uint64_t seed) {
  channel.validate();
  plan.validate(channel);
  if (plan.pulses() == 0) throw ConfigError("probe plan must cover at least one pulse");
  const bool real = real_valued(channel, plan);
  std::vector<PulseRecord> out;
  out.reserve(plan.pulses());
  for (std::size_t l = 1; l <= plan.pulses(); ++l) {
    PulseRecord rec;
    rec.clutter = clutter_at(channel, plan, l);
    rec.solution = optimal_waveform(channel, rec.clutter);
    rec.observation = rec.solution.waveform;
    if (channel.our_noise_var > 0.0) {
      CounterRng rng(seed, streams::kOurObservationNoise, l);
      rec.observation += draw_noise(rng, rec.observation.size(), channel.our_noise_var, real);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void ChanceSpec::validate() const {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
  if (mc_samples < 100) throw ValidationError("at least 100 Monte Carlo samples are required");
}

ChanceEstimate wilson_estimate(std::size_t successes, std::size_t samples) {
  ChanceEstimate e;
  e.successes = successes;
  e.samples = samples;
  const double m = static_cast<double>(samples);
  const double p = static_cast<double>(successes) / m;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / m;
  const double centre = (p + z2 / (2.0 * m)) / denom;
  e.p_hat = p;
  e.ci_halfwidth = kWilsonZ * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m)) / denom;
  e.wilson_lower = centre - e.ci_halfwidth;
  return e;
}

ChanceEstimate chance_probability(const MimoChannel& channel, const ProbePlan& plan,
                                  const ChanceSpec& spec, std::size_t pulse) {
  channel.validate();
  plan.validate(channel);
  spec.validate();
  const CMatrix clutter = clutter_at(channel, plan, pulse);
  const CVector w = optimal_waveform(channel, clutter).waveform;
  const bool real = real_valued(channel, plan);
  const std::size_t samples = spec.mc_samples;
  const std::size_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<std::size_t> hits(blocks, 0);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(samples, (b + 1) * kSampleBlock);
    std::size_t count = 0;
    for (std::size_t s = b * kSampleBlock; s < end; ++s) {
      CounterRng rng(spec.seed, streams::kChanceSamples, (static_cast<std::uint64_t>(pulse) << 32) | s);
      CVector y = w;
      if (channel.our_noise_var > 0.0) y += draw_noise(rng, y.size(), channel.our_noise_var, real);
      if (spec.normalize_observation && y.norm() > 0.0) y.normalize();
      count += scnr(channel.H_t, clutter, y, channel.radar_noise_var) <= spec.delta;
    }
    hits[b] = count;
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  return wilson_estimate(total, samples);
}

std::vector<double> RGrid::points() const {
  validate();
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

void RGrid::validate() const {
  if (!(lo >= 0.0)) throw ValidationError("r grid must start at a nonnegative value");
  if (!(hi >= lo) || !std::isfinite(hi)) throw ValidationError("r grid upper end must be >= lower end");
  if (count < 1) throw ValidationError("r grid needs at least one point");
}

ProbePlan scaled_plan(const std::vector<CMatrix>& shapes, double r, ProbeLag lag) {
  ProbePlan plan;
  plan.lag = lag;
  plan.probes.reserve(shapes.size());
  for (const auto& s : shapes) plan.probes.push_back(r * s);
  return plan;
}

SweepPoint evaluate_r(const MimoChannel& channel, const std::vector<CMatrix>& shapes,
                      ProbeLag lag, const ChanceSpec& spec, double r) {
  const ProbePlan plan = scaled_plan(shapes, r, lag);
  SweepPoint sp;
  sp.r = r;
  for (std::size_t l = 1; l <= plan.pulses(); ++l) {
    sp.per_pulse.push_back(chance_probability(channel, plan, spec, l));
    sp.scnr_max.push_back(optimal_waveform(channel, clutter_at(channel, plan, l)).scnr_max);
  }
  return sp;
}

InterferenceDesign design_interference(const MimoChannel& channel,
                                       const std::vector<CMatrix>& shapes, ProbeLag lag,
                                       const ChanceSpec& spec, const RGrid& grid) {
  channel.validate();
  spec.validate();
  grid.validate();
  if (shapes.empty()) throw ConfigError("at least one probe shape is required");
  for (const auto& s : shapes) {
    if (s.squaredNorm() == 0.0) throw ValidationError("probe shapes must be nonzero");
  }

  auto feasible = [&](const SweepPoint& sp) {
    return std::all_of(sp.per_pulse.begin(), sp.per_pulse.end(), [&](const ChanceEstimate& e) {
      return e.wilson_lower >= 1.0 - spec.epsilon;
    });
  };

  InterferenceDesign out;
  const auto pts = grid.points();
  std::size_t first = pts.size();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.sweep.push_back(evaluate_r(channel, shapes, lag, spec, pts[i]));
    if (feasible(out.sweep.back())) {
      first = i;
      break;
    }
  }
  if (first == pts.size()) {
    out.status = DesignStatus::Infeasible;
    out.r_star = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  double hi = pts[first];
  if (first > 0) {
    double lo = pts[first - 1];
    while (hi - lo > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(evaluate_r(channel, shapes, lag, spec, mid))) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  out.status = DesignStatus::Feasible;
  out.r_star = hi;
  out.plan = scaled_plan(shapes, hi, lag);
  out.objective = out.plan.power();
  return out;
}

TwoPulseExample two_pulse_example() {
  TwoPulseExample ex;
  ex.channel.I = 2;
  ex.channel.J = 1;
  ex.channel.K = 1;
  ex.channel.H_t = CMatrix(1, 2);
  ex.channel.H_t << 7.0, 7.0;
  ex.channel.H_c = CMatrix(1, 2);
  ex.channel.H_c << 1.0, 1.0;
  ex.channel.radar_noise_var = 1.0;
  ex.channel.our_noise_var = 0.1;
  CMatrix s1(1, 2), s2(1, 2);
  s1 << 0.2, 0.5;
  s2 << 0.4, 0.4;
  ex.shapes = {s1, s2};
  return ex;
}

}  // namespace radarkit
