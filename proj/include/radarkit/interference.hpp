#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace radarkit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Frequency-domain MIMO radar channel. H_t and H_c are (J K) x (I J K).
struct MimoChannel {
  CMatrix H_t;
  CMatrix H_c;
  double radar_noise_var = 1.0;  // per component
  double our_noise_var = 0.0;    // per component of E_o
  int I = 1;
  int J = 1;
  int K = 1;

  Eigen::Index receive_dim() const { return static_cast<Eigen::Index>(J) * K; }
  Eigen::Index waveform_dim() const { return static_cast<Eigen::Index>(I) * J * K; }
  void validate() const;
};

enum class ProbeLag {
  OneStep,       // H_c(l) = H_c + H_p(l-1), H_p(0) = 0
  Simultaneous,  // H_c(l) = H_c + H_p(l)
};

struct ProbePlan {
  std::vector<CMatrix> probes;  // H_p(1..L)
  ProbeLag lag = ProbeLag::OneStep;

  std::size_t pulses() const { return probes.size(); }
  /// sum_l ||H_p(l)||_F^2
  double power() const;
  void validate(const MimoChannel& channel) const;
};

/// Effective clutter channel at pulse l (1-based).
CMatrix clutter_at(const MimoChannel& channel, const ProbePlan& plan, std::size_t pulse);

struct WaveformSolution {
  CVector waveform;  // unit norm, largest-magnitude entry real positive
  double eigenvalue = 0.0;
  double scnr_max = 0.0;
  std::size_t iterations = 0;
  bool degenerate = false;  // power iteration stagnated; waveform is still a maximizer
};

/// ||H_t W||^2 / (||H_c W||^2 + J K sigma_r^2) for any W.
double scnr(const CMatrix& H_t, const CMatrix& H_c, const CVector& W, double radar_noise_var);

/// Dominant generalized eigenvector of H_t'H_t w = lambda (H_c'H_c + J K sigma_r^2 I) w,
/// found by Cholesky whitening and power iteration.
WaveformSolution optimal_waveform(const CMatrix& H_t, const CMatrix& H_c, double radar_noise_var);

/// Same, with J K read from the channel rows.
WaveformSolution optimal_waveform(const MimoChannel& channel, const CMatrix& H_c);

struct PulseRecord {
  CMatrix clutter;
  WaveformSolution solution;
  CVector observation;  // Y(l) = W*(l) + E_o(l)
};

std::vector<PulseRecord> simulate_pulses(const MimoChannel& channel, const ProbePlan& plan,
                                         std::uint64_t seed);

struct ChanceSpec {
  double delta = 3.0;
  double epsilon = 0.2;
  std::size_t mc_samples = 10000;
  std::uint64_t seed = 0;
  bool normalize_observation = false;  // evaluate SCNR at Y/||Y||

  void validate() const;
};

inline constexpr double kWilsonZ = 1.959964;

struct ChanceEstimate {
  double p_hat = 0.0;
  double ci_halfwidth = 0.0;  // Wilson 95% half-width
  double wilson_lower = 0.0;  // Wilson centre minus half-width
  std::size_t successes = 0;
  std::size_t samples = 0;
};

ChanceEstimate wilson_estimate(std::size_t successes, std::size_t samples);

/// Monte Carlo estimate of P(SCNR(H_t, H_c(l), Y(l)) <= delta). Draws for
/// pulse l depend only on (spec.seed, l, sample index), so estimates at
/// different delta or probe magnitudes share samples.
ChanceEstimate chance_probability(const MimoChannel& channel, const ProbePlan& plan,
                                  const ChanceSpec& spec, std::size_t pulse);

struct RGrid {
  double lo = 0.0;
  double hi = 100.0;
  std::size_t count = 1001;

  std::vector<double> points() const;
  void validate() const;
};

struct SweepPoint {
  double r = 0.0;
  std::vector<ChanceEstimate> per_pulse;
  std::vector<double> scnr_max;
};

enum class DesignStatus { Feasible, Infeasible };

struct InterferenceDesign {
  DesignStatus status = DesignStatus::Infeasible;
  double r_star = 0.0;
  ProbePlan plan;
  double objective = 0.0;  // sum_l ||H_p(l)||_F^2 at r_star
  std::vector<SweepPoint> sweep;
};

/// H_p(l) = r * shape_l.
ProbePlan scaled_plan(const std::vector<CMatrix>& shapes, double r, ProbeLag lag);

/// One sweep point: chance estimates and SCNR_max at every pulse for H_p(l) = r * shape_l.
SweepPoint evaluate_r(const MimoChannel& channel, const std::vector<CMatrix>& shapes,
                      ProbeLag lag, const ChanceSpec& spec, double r);

/// Smallest r on the grid whose Wilson lower bounds all reach 1 - epsilon,
/// refined by bisection against the preceding grid cell to 1e-3 relative.
InterferenceDesign design_interference(const MimoChannel& channel,
                                       const std::vector<CMatrix>& shapes, ProbeLag lag,
                                       const ChanceSpec& spec, const RGrid& grid);

/// Setup of the two-pulse example: H_t = [7 7], H_c = [1 1], sigma_r^2 = 1,
/// sigma_o^2 = 0.1, shapes [0.2 0.5] and [0.4 0.4].
struct TwoPulseExample {
  MimoChannel channel;
  std::vector<CMatrix> shapes;
};

TwoPulseExample two_pulse_example();

}  // namespace radarkit
