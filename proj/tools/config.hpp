#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "radarkit/identification.hpp"
#include "radarkit/interference.hpp"
#include "radarkit/io.hpp"
#include "radarkit/revealed.hpp"

namespace radarkit::app {

using io::Json;

struct ModelParams {
  Matrix A = Matrix::Constant(1, 1, 0.9);
  Matrix C = Matrix::Constant(1, 1, 2.5);
  Matrix Q = Matrix::Identity(1, 1);
  Matrix R = Matrix::Identity(1, 1);
  Vector prior_mean = Vector::Zero(1);
  Matrix prior_cov = Matrix::Identity(1, 1);

  LinearGaussianModel model() const;

  template <class V>
  void visit(V& v) {
    v("A", A);
    v("C", C);
    v("Q", Q);
    v("R", R);
    v("prior_mean", prior_mean);
    v("prior_cov", prior_cov);
  }
};

struct ActionParams {
  std::string phi = "identity";  // or "inverse_trace_scaled"
  double action_noise_var = 1.0;

  ActionMap action_map() const;

  template <class V>
  void visit(V& v) {
    v("phi", phi);
    v("action_noise_var", action_noise_var);
  }
};

struct GridParams {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 2;

  template <class V>
  void visit(V& v) {
    v("lo", lo);
    v("hi", hi);
    v("count", count);
  }
};

struct InverseKfParams {
  ModelParams model = with_gain(2.0);
  ActionParams action;
  std::size_t horizon = 200;
  bool paper_literal_qbar = false;

  static ModelParams with_gain(double c) {
    ModelParams m;
    m.C(0, 0) = c;
    return m;
  }

  template <class V>
  void visit(V& v) {
    v("model", model);
    v("action", action);
    v("horizon", horizon);
    v("paper_literal_qbar", paper_literal_qbar);
  }
};

struct ParticleParams {
  ModelParams model = InverseKfParams::with_gain(2.0);
  ActionParams action;
  std::size_t horizon = 200;
  std::size_t particles = 10000;
  std::size_t bootstrap_replicates = 200;
  double resample_threshold = 0.5;

  template <class V>
  void visit(V& v) {
    v("model", model);
    v("action", action);
    v("horizon", horizon);
    v("particles", particles);
    v("bootstrap_replicates", bootstrap_replicates);
    v("resample_threshold", resample_threshold);
  }
};

struct MleParams {
  ModelParams model;
  ActionParams action;
  std::size_t horizon = 500;
  std::size_t ensemble = 50;
  GridParams grid{0.01, 10.0, 1000};
  double refine_tol = 1e-6;
  std::size_t curve_trace = 0;

  template <class V>
  void visit(V& v) {
    v("model", model);
    v("action", action);
    v("horizon", horizon);
    v("ensemble", ensemble);
    v("grid", grid);
    v("refine_tol", refine_tol);
    v("curve_trace", curve_trace);
  }
};

struct SensitivityParams {
  ModelParams model;
  ActionParams action;
  std::vector<double> true_gains{2.5, 3.5};
  std::size_t horizon = 500;
  std::size_t ensemble = 50;
  double h_theta = 0.0;
  double h_q = 0.0;
  double h_r = 0.0;

  template <class V>
  void visit(V& v) {
    v("model", model);
    v("action", action);
    v("true_gains", true_gains);
    v("horizon", horizon);
    v("ensemble", ensemble);
    v("h_theta", h_theta);
    v("h_q", h_q);
    v("h_r", h_r);
  }
};

struct CrbParams {
  ModelParams model;
  ActionParams action;
  std::vector<double> true_gains{0.5, 1.5, 2.0, 3.0};
  std::size_t horizon = 500;
  std::size_t ensemble = 100;
  double h_theta = 0.0;

  template <class V>
  void visit(V& v) {
    v("model", model);
    v("action", action);
    v("true_gains", true_gains);
    v("horizon", horizon);
    v("ensemble", ensemble);
    v("h_theta", h_theta);
  }
};

struct RpLinearParams {
  std::string dataset_csv;  // when set, read instead of simulating the beam scenario
  std::vector<ModelParams> targets = default_targets();
  std::size_t epochs = 20;
  double q_scale_lo = 0.5;
  double q_scale_hi = 2.0;
  bool dwell_coupling = false;
  double r0 = 1.0;
  Vector utility_weights = Vector::Ones(3);

  static std::vector<ModelParams> default_targets();

  template <class V>
  void visit(V& v) {
    v("dataset_csv", dataset_csv);
    v("targets", targets);
    v("epochs", epochs);
    v("q_scale_lo", q_scale_lo);
    v("q_scale_hi", q_scale_hi);
    v("dwell_coupling", dwell_coupling);
    v("r0", r0);
    v("utility_weights", utility_weights);
  }
};

struct RpSinrParams {
  Matrix Q = Vector((Vector(2) << 2.0, 1.5).finished()).asDiagonal();
  double delta = 0.4;
  double gamma = 1.0;
  double ridge = 0.01;
  std::string orientation = "radar_threshold";  // or "ray_monotone"
  std::string utility = "cobb_douglas";         // or "min_linear"
  Vector utility_weights = Vector::Ones(2);
  std::size_t probes = 20;
  double probe_lo = 0.2;
  double probe_hi = 2.0;
  bool thm4_relaxed = false;

  template <class V>
  void visit(V& v) {
    v("Q", Q);
    v("delta", delta);
    v("gamma", gamma);
    v("ridge", ridge);
    v("orientation", orientation);
    v("utility", utility);
    v("utility_weights", utility_weights);
    v("probes", probes);
    v("probe_lo", probe_lo);
    v("probe_hi", probe_hi);
    v("thm4_relaxed", thm4_relaxed);
  }
};

struct ChannelParams {
  int I = 2;
  int J = 1;
  int K = 1;
  CMatrix H_t = two_pulse_example().channel.H_t;
  CMatrix H_c = two_pulse_example().channel.H_c;
  double radar_noise_var = 1.0;
  double our_noise_var = 0.1;

  MimoChannel channel() const;

  template <class V>
  void visit(V& v) {
    v("I", I);
    v("J", J);
    v("K", K);
    v("H_t", H_t);
    v("H_c", H_c);
    v("radar_noise_var", radar_noise_var);
    v("our_noise_var", our_noise_var);
  }
};

struct WaveformParams {
  ChannelParams channel;
  std::vector<CMatrix> probes = scaled_plan(two_pulse_example().shapes, 10.0, ProbeLag::OneStep).probes;
  std::string lag = "one_step";  // or "simultaneous"

  template <class V>
  void visit(V& v) {
    v("channel", channel);
    v("probes", probes);
    v("lag", lag);
  }
};

struct InterferenceParams {
  ChannelParams channel;
  std::vector<CMatrix> shapes = two_pulse_example().shapes;
  std::string lag = "simultaneous";
  std::vector<double> deltas{2.8, 3.0, 3.2};
  std::vector<double> epsilons{0.2, 0.3};
  std::size_t mc_samples = 10000;
  GridParams r_grid{0.0, 100.0, 1001};
  GridParams sweep_grid{0.0, 60.0, 121};
  bool normalize_observation = false;

  template <class V>
  void visit(V& v) {
    v("channel", channel);
    v("shapes", shapes);
    v("lag", lag);
    v("deltas", deltas);
    v("epsilons", epsilons);
    v("mc_samples", mc_samples);
    v("r_grid", r_grid);
    v("sweep_grid", sweep_grid);
    v("normalize_observation", normalize_observation);
  }
};

using KindParams = std::variant<InverseKfParams, ParticleParams, MleParams, SensitivityParams, CrbParams,
                                RpLinearParams, RpSinrParams, WaveformParams, InterferenceParams>;

/// Kind names in the order of KindParams.
const std::vector<std::string>& kind_names();

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  std::string output_dir = "radarkit_out";
  KindParams params;
};

/// Strict parse: unknown keys anywhere are a ConfigError; missing keys take defaults.
ExperimentConfig parse_config(const Json& j);

/// Fully resolved config, defaults included. parse_config(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& config);

ProbeLag lag_from_string(const std::string& name);

}  // namespace radarkit::app
