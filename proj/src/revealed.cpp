#include "radarkit/revealed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "radarkit/errors.hpp"
#include "radarkit/lp.hpp"
#include "radarkit/tracker.hpp"

namespace radarkit {
namespace {

constexpr double kRelTieTol = 1e-12;
constexpr double kCertificateTol = 1e-9;

bool is_spd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::LLT<Matrix> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// G[t][s] = g_t(beta_s) or alpha_t' beta_s.
using Table = std::vector<std::vector<double>>;

Table linear_table(const RPDataset& d) {
  const std::size_t n = d.size();
  Table g(n, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t s = 0; s < n; ++s) g[t][s] = d.probes[t].dot(d.responses[s]);
  return g;
}

Table budget_table(const RPDataset& d) {
  const std::size_t n = d.size();
  Table g(n, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t s = 0; s < n; ++s) g[t][s] = d.budget_value(t, d.responses[s]);
  return g;
}

double tie_tol(double a, double b) { return kRelTieTol * std::max({1.0, std::abs(a), std::abs(b)}); }

/// Shortest chain t -> ... -> s in the direct relation.
std::vector<std::size_t> direct_path(const std::vector<std::vector<char>>& direct, std::size_t from,
                                     std::size_t to) {
  const std::size_t n = direct.size();
  std::vector<std::size_t> parent(n, n);
  std::vector<std::size_t> queue{from};
  parent[from] = from;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t v = queue[head];
    if (v == to && head > 0) break;
    for (std::size_t w = 0; w < n; ++w) {
      if (direct[v][w] && parent[w] == n) {
        parent[w] = v;
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> path;
  if (from == to) return {from};
  for (std::size_t v = to; v != from; v = parent[v]) path.push_back(v);
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

/// Weak relation t R s iff G[t][s] <= G[t][t]; violation when t R* s and
/// G[s][t] < G[s][s] strictly.
GarpVerdict garp_from_table(const Table& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<char>> direct(n, std::vector<char>(n, 0));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t s = 0; s < n; ++s)
      direct[t][s] = g[t][s] <= g[t][t] + tie_tol(g[t][t], g[t][s]);

  auto closure = direct;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (!closure[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) closure[i][j] = closure[i][j] || closure[k][j];
    }

  GarpVerdict v;
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t s = 0; s < n; ++s) {
      if (!closure[t][s]) continue;
      if (g[s][t] < g[s][s] - tie_tol(g[s][s], g[s][t])) {
        v.pass = false;
        v.cycle = direct_path(direct, t, s);
        v.cycle.push_back(t);
        return v;
      }
    }
  return v;
}

double sinr_budget_value(const SinrBudget& b, const Vector& alpha, const Vector& beta) {
  const double s = sinr_value(b.Q, b.p_builder(alpha), b.gamma, beta);
  return b.orientation == SinrOrientation::RadarThreshold ? b.delta - s : s - b.delta;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Cobb-Douglas maximizer on the surface SINR(beta) = delta, searched over
/// ray directions d = exp(z) with beta = c(d) d.
Vector sinr_cobb_douglas(const SinrBudget& b, const Matrix& p, const Vector& w) {
  const Eigen::Index m = w.size();
  const Matrix q_minus = b.Q - b.delta * p;
  const double wsum = w.sum();

  auto margin = [&](const Vector& d) { return d.dot(q_minus * d); };
  auto objective = [&](const Vector& z) {
    const Vector d = z.array().exp().matrix();
    const double mg = margin(d);
    if (!(mg > 0.0)) return -std::numeric_limits<double>::infinity();
    return -0.5 * wsum * std::log(mg) + w.dot(z);
  };
  auto gradient = [&](const Vector& z) {
    const Vector d = z.array().exp().matrix();
    const Vector qd = q_minus * d;
    return Vector(w - wsum * d.cwiseProduct(qd) / d.dot(qd));
  };

  Vector z = (w.array() / p.diagonal().array()).log().matrix();
  if (!std::isfinite(objective(z))) z = Vector::Zero(m);
  if (!std::isfinite(objective(z))) {
    throw ValidationError("SINR surface is not reached along the starting ray; lower delta");
  }

  const int max_iter = 1000;
  double step = 1.0;
  Vector g = gradient(z);
  double f = objective(z);
  const double grad_tol = 1e-9 * std::max(1.0, wsum);
  bool converged = false;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol) {
      converged = true;
      break;
    }
    double trial = step;
    Vector z_new;
    double f_new = -std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < 60; ++bt) {
      z_new = z + trial * g;
      f_new = objective(z_new);
      if (f_new >= f + 1e-4 * trial * g.squaredNorm()) break;
      trial *= 0.5;
    }
    // No further increase is representable in double precision.
    if (!(f_new > f)) break;
    const Vector g_new = gradient(z_new);
    const Vector s = z_new - z;
    const Vector y = g - g_new;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e8) : 2.0 * trial;
    z = z_new - Vector::Constant(m, z_new.mean());
    f = objective(z);
    g = g_new;
  }
  if (!converged && g.lpNorm<Eigen::Infinity>() > 1e3 * grad_tol) {
    throw DivergenceError("SINR responder ascent stopped after " + std::to_string(iter) +
                          " iterations with gradient norm " + fmt(g.lpNorm<Eigen::Infinity>()));
  }
  const Vector d = z.array().exp().matrix();
  return std::sqrt(b.delta * b.gamma / margin(d)) * d;
}

Vector sinr_min_linear(const SinrBudget& b, const Matrix& p, const Vector& w) {
  const double mg = w.dot((b.Q - b.delta * p) * w);
  if (!(mg > 0.0)) throw ValidationError("SINR surface is not reached along the utility ray; lower delta");
  return std::sqrt(b.delta * b.gamma / mg) * w;
}

void require_positive_weights(const Vector& w, Eigen::Index m) {
  if (w.size() != m) throw ConfigError("utility weights do not match the probe dimension");
  if (!(w.array() > 0.0).all()) throw ValidationError("utility weights must be positive");
}

}  // namespace

PBuilder diagonal_p_builder(double ridge) {
  return [ridge](const Vector& alpha) {
    Matrix p = alpha.asDiagonal();
    p.diagonal().array() += ridge;
    return p;
  };
}

double RPDataset::budget_value(std::size_t n, const Vector& beta) const {
  return std::visit(overloaded{
                        [&](const LinearBudget& b) { return probes[n].dot(beta) - b.p_star; },
                        [&](const SinrBudget& b) { return sinr_budget_value(b, probes[n], beta); },
                        [&](const CallableBudget& b) { return b.g(n, beta); },
                    },
                    budget);
}

void RPDataset::validate() const {
  if (probes.empty()) throw ValidationError("dataset needs at least one observation");
  if (responses.size() != probes.size()) throw ConfigError("probe and response counts differ");
  const Eigen::Index m = probes.front().size();
  if (m == 0) throw ConfigError("probe dimension must be positive");
  for (std::size_t n = 0; n < size(); ++n) {
    if (probes[n].size() != m || responses[n].size() != m) {
      throw ConfigError("observation " + std::to_string(n) + " has the wrong dimension");
    }
    if (!probes[n].allFinite() || !(probes[n].array() > 0.0).all()) {
      throw ValidationError("probe " + std::to_string(n) + " must be strictly positive");
    }
    if (!responses[n].allFinite() || !(responses[n].array() >= 0.0).all()) {
      throw ValidationError("response " + std::to_string(n) + " must be nonnegative");
    }
  }
  std::visit(overloaded{
                 [&](const LinearBudget& b) {
                   if (!(b.p_star > 0.0)) throw ValidationError("p_star must be positive");
                 },
                 [&](const SinrBudget& b) {
                   if (b.Q.rows() != m || !is_spd(b.Q)) throw ValidationError("SINR Q must be SPD of the probe dimension");
                   if (!(b.gamma > 0.0)) throw ValidationError("SINR gamma must be positive");
                   if (!(b.delta > 0.0)) throw ValidationError("SINR delta must be positive");
                   if (!b.p_builder) throw ConfigError("SINR budget has no P builder");
                   for (std::size_t n = 0; n < size(); ++n) {
                     const Matrix p = b.p_builder(probes[n]);
                     if (p.rows() != m || !is_spd(p)) {
                       throw ValidationError("P(alpha_" + std::to_string(n) + ") is not SPD");
                     }
                   }
                 },
                 [&](const CallableBudget& b) {
                   if (!b.g) throw ConfigError("callable budget has no function");
                 },
             },
             budget);
  if (!is_linear()) {
    for (std::size_t n = 0; n < size(); ++n) {
      const double g = budget_value(n, responses[n]);
      if (!(std::abs(g) <= kBoundaryTol)) {
        throw ValidationError("response " + std::to_string(n) + " is off its budget boundary (g = " +
                              fmt(g) + ")");
      }
    }
  }
}

RPDataset make_linear_dataset(std::vector<Vector> probes, std::vector<Vector> responses,
                              double p_star) {
  if (!(p_star > 0.0)) throw ValidationError("p_star must be positive");
  RPDataset d;
  for (auto& a : probes) a /= p_star;
  d.probes = std::move(probes);
  d.responses = std::move(responses);
  d.budget = LinearBudget{1.0};
  d.validate();
  return d;
}

GarpVerdict garp_check(const RPDataset& dataset) {
  if (!dataset.is_linear()) throw ConfigError("garp_check needs a linear budget; use nonlinear_garp");
  dataset.validate();
  return garp_from_table(linear_table(dataset));
}

GarpVerdict nonlinear_garp(const RPDataset& dataset) {
  dataset.validate();
  if (dataset.is_linear()) {
    const double p_star = std::get<LinearBudget>(dataset.budget).p_star;
    for (std::size_t n = 0; n < dataset.size(); ++n) {
      if (std::abs(dataset.budget_value(n, dataset.responses[n])) > kBoundaryTol * std::max(1.0, p_star)) {
        throw ValidationError("response " + std::to_string(n) + " is off its budget boundary");
      }
    }
  }
  return garp_from_table(budget_table(dataset));
}

double afriat_slack(const RPDataset& dataset, std::size_t t, const Vector& beta) {
  if (dataset.is_linear()) return dataset.probes[t].dot(beta - dataset.responses[t]);
  return dataset.budget_value(t, beta) - dataset.budget_value(t, dataset.responses[t]);
}

double certificate_residual(const RPDataset& dataset, const AfriatCertificate& cert) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < dataset.size(); ++s)
    for (std::size_t t = 0; t < dataset.size(); ++t) {
      const double v = cert.u[s] - cert.u[t] - cert.lambda[t] * afriat_slack(dataset, t, dataset.responses[s]);
      worst = std::max(worst, v);
    }
  return worst;
}

AfriatVerdict afriat_feasibility(const RPDataset& dataset) {
  dataset.validate();
  const std::size_t n = dataset.size();
  const auto nn = static_cast<Eigen::Index>(n);

  // z = [u (>= 0, shift-free), mu = lambda - 1 (>= 0)]
  // u_s - u_t - mu_t c_ts <= c_ts  with c_ts = slack_t(beta_s)
  const Eigen::Index rows = nn * (nn - 1);
  Matrix a = Matrix::Zero(rows, 2 * nn);
  Vector b(rows);
  Eigen::Index r = 0;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      const double c = afriat_slack(dataset, t, dataset.responses[s]);
      a(r, static_cast<Eigen::Index>(s)) = 1.0;
      a(r, static_cast<Eigen::Index>(t)) = -1.0;
      a(r, nn + static_cast<Eigen::Index>(t)) = -c;
      b(r) = c;
      ++r;
    }

  const LpFeasibility lp = find_feasible_point(a, b);
  AfriatVerdict v;
  v.iterations = lp.iterations;
  if (!lp.feasible) return v;

  AfriatCertificate cert;
  cert.u.resize(n);
  cert.lambda.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    cert.u[t] = lp.point(static_cast<Eigen::Index>(t)) + 1.0;
    cert.lambda[t] = lp.point(nn + static_cast<Eigen::Index>(t)) + 1.0;
  }
  cert.residual = certificate_residual(dataset, cert);
  if (!(cert.residual <= kCertificateTol)) {
    throw IndeterminateError("Afriat certificate residual " + fmt(cert.residual) +
                             " exceeds tolerance; feasibility undecided");
  }
  v.rational = true;
  v.certificate = std::move(cert);
  return v;
}

AfriatUtility::AfriatUtility(RPDataset dataset, AfriatCertificate cert)
    : dataset_(std::move(dataset)), cert_(std::move(cert)) {
  if (cert_.u.size() != dataset_.size() || cert_.lambda.size() != dataset_.size()) {
    throw ConfigError("certificate does not match the dataset size");
  }
}

double AfriatUtility::operator()(const Vector& beta) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < dataset_.size(); ++t) {
    best = std::min(best, cert_.u[t] + cert_.lambda[t] * afriat_slack(dataset_, t, beta));
  }
  return best;
}

AfriatUtility construct_utility(const RPDataset& dataset, const AfriatCertificate& cert) {
  return AfriatUtility(dataset, cert);
}

double sinr_value(const Matrix& Q, const Matrix& P, double gamma, const Vector& beta) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  return beta.dot(Q * beta) / (beta.dot(P * beta) + gamma);
}

Thm4Verdict thm4_monotonicity_check(const Matrix& Q, const std::vector<Matrix>& p_alphas,
                                    bool relaxed) {
  Thm4Verdict v;
  const Eigen::Index m = Q.rows();
  if (Q.cols() != m) {
    v.reason = "Q is not square";
    return v;
  }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && !(std::abs(Q(i, j)) < 1e-12)) {
        v.reason = "condition 1: Q is not diagonal (q_" + std::to_string(i + 1) + std::to_string(j + 1) +
                   " = " + fmt(Q(i, j)) + ")";
        return v;
      }
    }
  const double d = Q.diagonal().maxCoeff();
  for (std::size_t n = 0; n < p_alphas.size(); ++n) {
    const Matrix& p = p_alphas[n];
    if (p.rows() != m || p.cols() != m) {
      v.reason = "P(alpha_" + std::to_string(n + 1) + ") has the wrong size";
      return v;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (p + p.transpose()), Eigen::EigenvaluesOnly);
    const double c = eig.eigenvalues().minCoeff();
    const Matrix test = (c / d) * p - Q;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const bool ok = (relaxed && i != j) ? test(i, j) <= 0.0 : test(i, j) < 0.0;
        if (!ok) {
          v.reason = "condition 2: entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                     ") of (c/d)P(alpha_" + std::to_string(n + 1) + ") - Q is " + fmt(test(i, j)) +
                     ", not negative";
          return v;
        }
      }
  }
  v.monotone = true;
  return v;
}

Vector beam_probe(const std::vector<LinearGaussianModel>& targets) {
  Vector alpha(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Matrix p = predicted_covariance_fixed_point(targets[i]);
    alpha(static_cast<Eigen::Index>(i)) = checked_spd_inverse(p, "steady-state predicted covariance").trace();
  }
  return alpha;
}

double utility_value(const TrueUtility& utility, const Vector& beta) {
  return std::visit(overloaded{
                        [&](const CobbDouglas& u) {
                          return (u.weights.array() * beta.array().log()).sum();
                        },
                        [&](const MinLinear& u) { return (beta.array() / u.weights.array()).minCoeff(); },
                    },
                    utility);
}

RPDataset synth_responder(const BudgetSpec& budget, const TrueUtility& utility,
                          const std::vector<Vector>& probes) {
  if (probes.empty()) throw ValidationError("synth_responder needs at least one probe");
  const Eigen::Index m = probes.front().size();
  const Vector& w = std::visit([](const auto& u) -> const Vector& { return u.weights; }, utility);
  require_positive_weights(w, m);
  for (const auto& a : probes) {
    if (a.size() != m || !(a.array() > 0.0).all()) throw ValidationError("probes must be positive");
  }

  std::vector<Vector> responses;
  responses.reserve(probes.size());
  if (const auto* lin = std::get_if<LinearBudget>(&budget)) {
    if (!(lin->p_star > 0.0)) throw ValidationError("p_star must be positive");
    for (const auto& a : probes) {
      if (std::holds_alternative<CobbDouglas>(utility)) {
        responses.push_back((w.array() / w.sum() * lin->p_star / a.array()).matrix());
      } else {
        responses.push_back(w * (lin->p_star / a.dot(w)));
      }
    }
    return make_linear_dataset(probes, std::move(responses), lin->p_star);
  }
  if (const auto* sinr = std::get_if<SinrBudget>(&budget)) {
    for (const auto& a : probes) {
      const Matrix p = sinr->p_builder(a);
      responses.push_back(std::holds_alternative<CobbDouglas>(utility) ? sinr_cobb_douglas(*sinr, p, w)
                                                                       : sinr_min_linear(*sinr, p, w));
    }
    RPDataset d;
    d.probes = probes;
    d.responses = std::move(responses);
    d.budget = *sinr;
    d.validate();
    return d;
  }
  throw ConfigError("synth_responder supports linear and SINR budgets only");
}

RPDataset beam_scenario(const BeamScenario& sc) {
  const auto m = static_cast<Eigen::Index>(sc.targets.size());
  if (m == 0) throw ConfigError("beam scenario needs at least one target");
  if (sc.epochs == 0) throw ConfigError("beam scenario needs at least one epoch");
  if (!(sc.q_scale_lo > 0.0) || !(sc.q_scale_hi >= sc.q_scale_lo)) {
    throw ConfigError("maneuver scale range must be positive and ordered");
  }
  if (sc.dwell_coupling && !(sc.r0 > 0.0)) throw ConfigError("r0 must be positive");
  const Vector weights = sc.utility_weights.size() == 0 ? Vector::Ones(m) : sc.utility_weights;
  require_positive_weights(weights, m);

  std::vector<Vector> probes;
  std::vector<Vector> responses;
  Vector previous_beta;
  for (std::size_t n = 0; n < sc.epochs; ++n) {
    CounterRng rng(sc.seed, streams::kDatasetGenerator, n);
    std::vector<LinearGaussianModel> targets = sc.targets;
    for (Eigen::Index i = 0; i < m; ++i) {
      auto& t = targets[static_cast<std::size_t>(i)];
      t.Q *= sc.q_scale_lo + (sc.q_scale_hi - sc.q_scale_lo) * rng.uniform();
      if (sc.dwell_coupling && n > 0) {
        t.R = (sc.r0 / std::max(previous_beta(i), 1e-12)) * Matrix::Identity(t.R.rows(), t.R.cols());
      }
    }
    Vector alpha = beam_probe(targets);
    Vector beta = (weights.array() / weights.sum() / alpha.array()).matrix();
    previous_beta = beta;
    probes.push_back(std::move(alpha));
    responses.push_back(std::move(beta));
  }
  return make_linear_dataset(std::move(probes), std::move(responses), 1.0);
}

}  // namespace radarkit
