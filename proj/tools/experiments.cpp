#include "experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "radarkit/errors.hpp"
#include "radarkit/inverse_tracker.hpp"
#include "radarkit/parallel.hpp"

namespace radarkit::app {
namespace {

using io::format_double;

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  Csv& cell(double v) { return raw(format_double(v)); }
  Csv& cell(std::size_t v) { return raw(std::to_string(v)); }
  Csv& cell(bool v) { return raw(v ? "1" : "0"); }
  Csv& cell(const std::string& v) { return raw(v); }
  Csv& cell(const char* v) { return raw(v); }
  void end() {
    os_ << '\n';
    first_ = true;
  }
  std::string str() const { return os_.str(); }

 private:
  Csv& raw(const std::string& s) {
    os_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }

  std::ostringstream os_;
  bool first_ = true;
};

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Json cvector_json(const CVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(Json::array({v(i).real(), v(i).imag()}));
  return a;
}

double scalar_gain(const LinearGaussianModel& m) {
  if (m.C.rows() != 1 || m.C.cols() != 1) throw ConfigError("this experiment needs a scalar model");
  return m.C(0, 0);
}

RunResult run(const InverseKfParams& p, std::uint64_t seed) {
  const auto model = p.model.model();
  const auto am = p.action.action_map();
  const auto trace = simulate_engagement(model, am, p.horizon, seed);
  InverseOptions options;
  options.paper_literal_qbar = p.paper_literal_qbar;
  const auto beliefs = inverse_kalman_run(model, am, trace, options);

  double gap = 0.0, tr = 0.0;
  for (std::size_t k = 0; k < beliefs.size(); ++k) {
    gap += (beliefs[k].mean() - trace.adversary_means[k]).squaredNorm();
    tr += beliefs[k].cov().trace();
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, beliefs.size()));

  Json doc = io::to_json(trace);
  doc["beliefs"] = io::to_json(beliefs);
  std::ostringstream csv;
  io::write_trace_csv(csv, trace, &beliefs);
  Json summary;
  summary["horizon"] = p.horizon;
  summary["mean_squared_gap"] = gap / n;
  summary["mean_trace_sigmabar"] = tr / n;

  RunResult r;
  r.artifacts = {{"trace.json", dump(doc)}, {"trace.csv", csv.str()}, {"summary.json", dump(summary)}};
  return r;
}

RunResult run(const ParticleParams& p, std::uint64_t seed) {
  const auto model = p.model.model();
  const auto am = p.action.action_map();
  const auto trace = simulate_engagement(model, am, p.horizon, seed);
  const auto kf = inverse_kalman_run(model, am, trace);
  ParticleOptions options;
  options.resample_threshold = p.resample_threshold;
  const auto clouds = inverse_particle_filter(model, am, trace, p.particles, seed, options);

  std::vector<Vector> se(clouds.size());
  parallel_for(clouds.size(), [&](std::size_t k) {
    se[k] = clouds[k].bootstrap_standard_error(derive_seed(seed, k), p.bootstrap_replicates);
  });

  const Eigen::Index x = model.state_dim();
  Csv csv(concat(concat(concat(concat({"k"}, numbered("kf_mean_", x)), numbered("kf_var_", x)),
                        concat(numbered("pf_mean_", x), numbered("pf_se_", x))),
                 {"ess", "within_3se"}));
  std::size_t within = 0;
  for (std::size_t k = 0; k < clouds.size(); ++k) {
    const Vector pf = clouds[k].mean();
    const bool ok = ((pf - kf[k].mean()).cwiseAbs().array() <= 3.0 * se[k].array()).all();
    within += ok;
    csv.cell(k + 1);
    for (Eigen::Index i = 0; i < x; ++i) csv.cell(kf[k].mean()(i));
    for (Eigen::Index i = 0; i < x; ++i) csv.cell(kf[k].cov()(i, i));
    for (Eigen::Index i = 0; i < x; ++i) csv.cell(pf(i));
    for (Eigen::Index i = 0; i < x; ++i) csv.cell(se[k](i));
    csv.cell(clouds[k].ess).cell(ok).end();
  }
  Json summary;
  summary["steps"] = clouds.size();
  summary["within_3se"] = within;
  summary["fraction_within_3se"] = clouds.empty() ? 0.0 : static_cast<double>(within) / clouds.size();

  RunResult r;
  r.artifacts = {{"particle_vs_kf.csv", csv.str()}, {"summary.json", dump(summary)}};
  return r;
}

RunResult run(const MleParams& p, std::uint64_t seed) {
  const auto model = p.model.model();
  const double truth = scalar_gain(model);
  const auto am = p.action.action_map();
  if (p.curve_trace >= p.ensemble) throw ConfigError("params.curve_trace must be below params.ensemble");
  const GainGrid grid{p.grid.lo, p.grid.hi, p.grid.count};
  const auto traces = simulate_ensemble(model, am, p.horizon, seed, p.ensemble);
  const auto classic = mle_gain_ensemble(model, am, traces, LikelihoodMode::Classic, grid, p.refine_tol);
  const auto inverse = mle_gain_ensemble(model, am, traces, LikelihoodMode::Inverse, grid, p.refine_tol);

  const auto& cc = classic[p.curve_trace].curve;
  const auto& ic = inverse[p.curve_trace].curve;
  Csv curves({"theta", "loglik_classic", "loglik_inverse"});
  for (std::size_t i = 0; i < cc.thetas.size(); ++i) {
    curves.cell(cc.thetas[i]).cell(cc.loglik[i]).cell(ic.loglik[i]).end();
  }

  Csv est({"trace", "theta_classic", "theta_inverse", "boundary_classic", "boundary_inverse"});
  std::vector<double> tc, ti;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    tc.push_back(classic[i].theta_star);
    ti.push_back(inverse[i].theta_star);
    est.cell(i).cell(tc.back()).cell(ti.back()).cell(classic[i].boundary_hit).cell(inverse[i].boundary_hit).end();
  }

  const double h = 1e-3 * std::max(1.0, std::abs(truth));
  Json summary;
  summary["true_gain"] = truth;
  summary["ensemble"] = p.ensemble;
  for (auto [name, thetas, mode] : {std::tuple{"classic", &tc, LikelihoodMode::Classic},
                                    std::tuple{"inverse", &ti, LikelihoodMode::Inverse}}) {
    Json m;
    m["mean"] = mean_of(*thetas);
    m["variance"] = sample_variance(*thetas);
    m["curvature_at_truth"] = mean_curvature(mode, model, am, traces, truth, h);
    summary[name] = m;
  }

  RunResult r;
  r.artifacts = {{"likelihood_curves.csv", curves.str()},
                 {"mle_estimates.csv", est.str()},
                 {"summary.json", dump(summary)}};
  return r;
}

RunResult run(const SensitivityParams& p, std::uint64_t seed) {
  const auto base = p.model.model();
  scalar_gain(base);
  const auto am = p.action.action_map();
  const SensitivitySteps steps{p.h_theta, p.h_q, p.h_r};
  Csv csv({"true_gain", "mode", "eta_Q", "eta_R", "curvature", "h_theta", "h_Q", "h_R", "converged",
           "eta_Q_half", "eta_R_half"});
  Json rows = Json::array();
  for (double g : p.true_gains) {
    const auto m = base.with_gain(g);
    const auto traces = simulate_ensemble(m, am, p.horizon, seed, p.ensemble);
    for (auto mode : {LikelihoodMode::Classic, LikelihoodMode::Inverse}) {
      const auto s = sensitivity(m, am, traces, mode, steps);
      csv.cell(g).cell(to_string(mode)).cell(s.eta_Q).cell(s.eta_R).cell(s.curvature).cell(s.h_theta);
      csv.cell(s.h_Q).cell(s.h_R).cell(s.converged).cell(s.eta_Q_half).cell(s.eta_R_half).end();
      Json row;
      row["true_gain"] = g;
      row["mode"] = to_string(mode);
      row["eta_Q"] = s.eta_Q;
      row["eta_R"] = s.eta_R;
      row["curvature"] = s.curvature;
      row["converged"] = s.converged;
      rows.push_back(row);
    }
  }
  RunResult r;
  r.artifacts = {{"sensitivity.csv", csv.str()}, {"sensitivity.json", dump(Json{{"rows", rows}})}};
  return r;
}

RunResult run(const CrbParams& p, std::uint64_t seed) {
  const auto base = p.model.model();
  scalar_gain(base);
  const auto am = p.action.action_map();
  Csv csv({"true_gain", "crb_classic", "crb_inverse", "ratio"});
  Json rows = Json::array();
  for (double g : p.true_gains) {
    const auto m = base.with_gain(g);
    const double c = crb_gain(m, am, LikelihoodMode::Classic, p.ensemble, seed, p.horizon, p.h_theta);
    const double i = crb_gain(m, am, LikelihoodMode::Inverse, p.ensemble, seed, p.horizon, p.h_theta);
    csv.cell(g).cell(c).cell(i).cell(i / c).end();
    rows.push_back(Json{{"true_gain", g}, {"crb_classic", c}, {"crb_inverse", i}, {"ratio", i / c}});
  }
  RunResult r;
  r.artifacts = {{"crb.csv", csv.str()}, {"crb.json", dump(Json{{"rows", rows}})}};
  return r;
}

Json garp_json(const GarpVerdict& v) {
  Json cycle = Json::array();
  for (auto i : v.cycle) cycle.push_back(i + 1);
  return Json{{"pass", v.pass}, {"cycle", cycle}};
}

Json afriat_json(const AfriatVerdict& v) {
  Json j{{"rational", v.rational}, {"lp_iterations", v.iterations}};
  j["residual"] = v.certificate ? Json(v.certificate->residual) : Json(nullptr);
  return j;
}

void add_dataset(RunResult& r, const RPDataset& d) {
  std::ostringstream os;
  io::write_rp_csv(os, d);
  r.artifacts.push_back({"rp_dataset.csv", os.str()});
  r.artifacts.push_back({"rp_budget.json", dump(io::budget_to_json(d.budget))});
}

RunResult run(const RpLinearParams& p, std::uint64_t seed) {
  RPDataset d;
  if (!p.dataset_csv.empty()) {
    std::ifstream in(p.dataset_csv);
    if (!in) throw ConfigError("cannot open params.dataset_csv \"" + p.dataset_csv + "\"");
    d = io::read_rp_csv(in);
  } else {
    BeamScenario sc;
    for (const auto& t : p.targets) sc.targets.push_back(t.model());
    sc.epochs = p.epochs;
    sc.q_scale_lo = p.q_scale_lo;
    sc.q_scale_hi = p.q_scale_hi;
    sc.dwell_coupling = p.dwell_coupling;
    sc.r0 = p.r0;
    sc.utility_weights = p.utility_weights;
    sc.seed = seed;
    d = beam_scenario(sc);
  }
  const auto garp = garp_check(d);
  const auto afriat = afriat_feasibility(d);

  RunResult r;
  add_dataset(r, d);
  Json verdict{{"size", d.size()}, {"dim", d.dim()}, {"garp", garp_json(garp)}, {"afriat", afriat_json(afriat)}};
  r.artifacts.push_back({"rp_verdict.json", dump(verdict)});
  if (afriat.certificate) r.artifacts.push_back({"certificate.json", dump(io::to_json(*afriat.certificate))});
  return r;
}

RunResult run(const RpSinrParams& p, std::uint64_t seed) {
  const Eigen::Index m = p.Q.rows();
  if (p.Q.cols() != m) throw ConfigError("params.Q must be square");
  if (!(p.probe_lo > 0.0) || !(p.probe_hi >= p.probe_lo)) {
    throw ValidationError("probe range must satisfy 0 < probe_lo <= probe_hi");
  }
  SinrBudget b;
  b.Q = p.Q;
  b.ridge = p.ridge;
  b.p_builder = diagonal_p_builder(p.ridge);
  b.gamma = p.gamma;
  b.delta = p.delta;
  if (p.orientation == "radar_threshold") {
    b.orientation = SinrOrientation::RadarThreshold;
  } else if (p.orientation == "ray_monotone") {
    b.orientation = SinrOrientation::RayMonotone;
  } else {
    throw ConfigError("params.orientation must be \"radar_threshold\" or \"ray_monotone\"");
  }
  TrueUtility u;
  if (p.utility == "cobb_douglas") {
    u = CobbDouglas{p.utility_weights};
  } else if (p.utility == "min_linear") {
    u = MinLinear{p.utility_weights};
  } else {
    throw ConfigError("params.utility must be \"cobb_douglas\" or \"min_linear\"");
  }

  std::vector<Vector> probes;
  for (std::size_t n = 0; n < p.probes; ++n) {
    CounterRng rng(seed, streams::kDatasetGenerator, n);
    Vector a(m);
    for (Eigen::Index i = 0; i < m; ++i) a(i) = p.probe_lo + (p.probe_hi - p.probe_lo) * rng.uniform();
    probes.push_back(std::move(a));
  }
  const auto d = synth_responder(b, u, probes);

  std::vector<Matrix> p_alphas;
  for (const auto& a : d.probes) p_alphas.push_back(b.p_builder(a));
  const auto thm4 = thm4_monotonicity_check(p.Q, p_alphas, p.thm4_relaxed);

  Json verdict{{"size", d.size()}, {"dim", d.dim()}};
  verdict["theorem4"] = Json{{"monotone", thm4.monotone}, {"reason", thm4.reason}, {"relaxed", p.thm4_relaxed}};
  std::optional<AfriatCertificate> cert;
  for (auto [name, o] : {std::pair{"radar_threshold", SinrOrientation::RadarThreshold},
                         std::pair{"ray_monotone", SinrOrientation::RayMonotone}}) {
    RPDataset view = d;
    std::get<SinrBudget>(view.budget).orientation = o;
    const auto garp = nonlinear_garp(view);
    const auto afriat = afriat_feasibility(view);
    verdict[name] = Json{{"garp", garp_json(garp)}, {"afriat", afriat_json(afriat)}};
    if (o == b.orientation) cert = afriat.certificate;
  }

  RunResult r;
  add_dataset(r, d);
  r.artifacts.push_back({"rp_verdict.json", dump(verdict)});
  if (cert) r.artifacts.push_back({"certificate.json", dump(io::to_json(*cert))});
  return r;
}

RunResult run(const WaveformParams& p, std::uint64_t seed) {
  const auto ch = p.channel.channel();
  ProbePlan plan;
  plan.probes = p.probes;
  plan.lag = lag_from_string(p.lag);
  const auto recs = simulate_pulses(ch, plan, seed);
  Csv csv({"pulse", "eigenvalue", "scnr_max", "scnr_at_observation", "degenerate"});
  Json pulses = Json::array();
  for (std::size_t l = 0; l < recs.size(); ++l) {
    const auto& rec = recs[l];
    const double at_y = scnr(ch.H_t, rec.clutter, rec.observation, ch.radar_noise_var);
    csv.cell(l + 1).cell(rec.solution.eigenvalue).cell(rec.solution.scnr_max).cell(at_y);
    csv.cell(rec.solution.degenerate).end();
    Json j;
    j["pulse"] = l + 1;
    j["clutter"] = io::to_json(rec.clutter);
    j["eigenvalue"] = rec.solution.eigenvalue;
    j["scnr_max"] = rec.solution.scnr_max;
    j["iterations"] = rec.solution.iterations;
    j["degenerate"] = rec.solution.degenerate;
    j["waveform"] = cvector_json(rec.solution.waveform);
    j["observation"] = cvector_json(rec.observation);
    pulses.push_back(j);
  }
  RunResult r;
  r.artifacts = {{"pulses.csv", csv.str()}, {"waveform.json", dump(Json{{"pulses", pulses}})}};
  return r;
}

RunResult run(const InterferenceParams& p, std::uint64_t seed) {
  const auto ch = p.channel.channel();
  const ProbeLag lag = lag_from_string(p.lag);
  if (p.deltas.empty() || p.epsilons.empty()) throw ConfigError("params.deltas and params.epsilons must be nonempty");
  const std::size_t pulses = p.shapes.size();
  auto spec_for = [&](double delta, double eps) {
    ChanceSpec s;
    s.delta = delta;
    s.epsilon = eps;
    s.mc_samples = p.mc_samples;
    s.seed = seed;
    s.normalize_observation = p.normalize_observation;
    s.validate();
    return s;
  };

  const RGrid sweep_grid{p.sweep_grid.lo, p.sweep_grid.hi, p.sweep_grid.count};
  Csv sweep(concat(concat(concat({"r", "delta", "p_hat", "ci"}, numbered("p_hat_", static_cast<Eigen::Index>(pulses))),
                          numbered("ci_", static_cast<Eigen::Index>(pulses))),
                   numbered("scnr_max_", static_cast<Eigen::Index>(pulses))));
  for (double r : sweep_grid.points()) {
    for (double delta : p.deltas) {
      const auto sp = evaluate_r(ch, p.shapes, lag, spec_for(delta, p.epsilons.front()), r);
      std::size_t worst = 0;
      for (std::size_t l = 1; l < pulses; ++l) {
        if (sp.per_pulse[l].p_hat < sp.per_pulse[worst].p_hat) worst = l;
      }
      sweep.cell(r).cell(delta).cell(sp.per_pulse[worst].p_hat).cell(sp.per_pulse[worst].ci_halfwidth);
      for (const auto& e : sp.per_pulse) sweep.cell(e.p_hat);
      for (const auto& e : sp.per_pulse) sweep.cell(e.ci_halfwidth);
      for (double s : sp.scnr_max) sweep.cell(s);
      sweep.end();
    }
  }

  RunResult res;
  const RGrid r_grid{p.r_grid.lo, p.r_grid.hi, p.r_grid.count};
  Csv designs({"delta", "epsilon", "status", "r_star", "objective"});
  Json dj = Json::array();
  for (double delta : p.deltas) {
    for (double eps : p.epsilons) {
      const auto d = design_interference(ch, p.shapes, lag, spec_for(delta, eps), r_grid);
      const bool ok = d.status == DesignStatus::Feasible;
      res.infeasible = res.infeasible || !ok;
      designs.cell(delta).cell(eps).cell(ok ? "feasible" : "infeasible");
      designs.cell(ok ? format_double(d.r_star) : std::string("nan"));
      designs.cell(ok ? format_double(d.objective) : std::string("nan")).end();
      Json row{{"delta", delta}, {"epsilon", eps}, {"status", ok ? "feasible" : "infeasible"}};
      row["r_star"] = number_or_null(d.r_star);
      row["objective"] = ok ? Json(d.objective) : Json(nullptr);
      dj.push_back(row);
    }
  }
  if (res.infeasible) res.note = "no feasible interference parameter on the grid for at least one (delta, epsilon)";
  res.artifacts = {{"interference_sweep.csv", sweep.str()},
                   {"interference_design.csv", designs.str()},
                   {"design.json", dump(Json{{"designs", dj}})}};
  return res;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  return std::visit([&](const auto& p) { return run(p, config.seed); }, config.params);
}

}  // namespace radarkit::app
