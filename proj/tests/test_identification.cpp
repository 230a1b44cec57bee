#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "radarkit/errors.hpp"
#include "radarkit/identification.hpp"
#include "support.hpp"

using namespace radarkit;

namespace {

ActionMap noise(double var) {
  ActionMap am;
  am.action_noise_var = var;
  return am;
}

// Gaussian innovations likelihood assembled from the stepwise filter output.
double direct_inverse_loglik(const LinearGaussianModel& m, const ActionMap& am,
                             const EngagementTrace& t) {
  double ll = 0.0;
  for (const auto& s : inverse_kalman_filter(m, am, t)) {
    const double d = static_cast<double>(s.innovation.size());
    ll += -0.5 * d * std::log(2.0 * std::numbers::pi) -
          0.5 * std::log(s.innovation_cov.determinant()) -
          0.5 * s.innovation.dot(s.innovation_cov.inverse() * s.innovation);
  }
  return ll;
}

// Classic likelihood via the textbook prediction-error decomposition.
double direct_classic_loglik(const LinearGaussianModel& m, const EngagementTrace& t) {
  double ll = 0.0;
  GaussianBelief b(m.prior_mean, m.prior_cov);
  for (const auto& y : t.observations) {
    const auto s = kalman_step(m, b, y);
    const double d = static_cast<double>(y.size());
    ll += -0.5 * d * std::log(2.0 * std::numbers::pi) -
          0.5 * std::log(s.innovation_cov.determinant()) -
          0.5 * s.innovation.dot(s.innovation_cov.inverse() * s.innovation);
    b = s.posterior;
  }
  return ll;
}

}  // namespace

TEST_CASE("single-step inverse likelihood by hand") {
  const double sigma2 = 0.5;
  const auto m = LinearGaussianModel::scalar(1.0, 2.0, 1.0, 1.0, 0.0, 1.0);
  const auto t = simulate_engagement(m, noise(sigma2), 1, 42);
  const double iota = t.actions[0](0) - 8.0 / 9.0 * t.states[0](0);
  const double s = 16.0 / 81.0 + sigma2;
  const double expect = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(s) - 0.5 * iota * iota / s;
  CHECK(loglik_inverse(m, noise(sigma2), t) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("likelihoods agree with the stepwise filters") {
  CounterRng g(17, 0, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = static_cast<Eigen::Index>(1 + rep % 3);
    const auto m = testsupport::random_model(g, x, x);
    ActionMap am = noise(testsupport::uniform(g, 0.2, 2.0));
    am.kind = rep % 2 ? PhiKind::InverseTraceScaled : PhiKind::Identity;
    const auto t = simulate_engagement(m, am, 60, static_cast<std::uint64_t>(rep));
    const double fast = loglik_inverse(m, am, t);
    CHECK(std::abs(fast - direct_inverse_loglik(m, am, t)) <= 1e-9 * std::abs(fast));
    const double classic = loglik_classic(m, t);
    CHECK(std::abs(classic - direct_classic_loglik(m, t)) <= 1e-9 * std::abs(classic));
  }
}

TEST_CASE("ensemble likelihood equals per-trace likelihood") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto traces = simulate_ensemble(m, bench.action_map(), 80, 3, 6);
  for (auto mode : {LikelihoodMode::Classic, LikelihoodMode::Inverse}) {
    const auto v = loglik_ensemble(mode, m.with_gain(1.7), bench.action_map(), traces);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      CHECK(v[i] == loglik(mode, m.with_gain(1.7), bench.action_map(), traces[i]));
    }
  }
}

TEST_CASE("noise-dominated actions give a flat inverse likelihood") {
  Benchmark bench;
  const auto m = bench.model(2.0);
  const auto t = simulate_engagement(m, noise(1.0), 20, 8);
  const auto flat = noise(1e6);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double theta = 0.1; theta <= 10.0 + 1e-12; theta += 0.1) {
    const double v = loglik_inverse(m.with_gain(theta), flat, t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo < 1e-3);
}

TEST_CASE("uninformative observations give a flat classic likelihood") {
  auto m = LinearGaussianModel::scalar(0.9, 2.5, 1.0, 1e12);
  const auto t = simulate_engagement(m, noise(1.0), 100, 8);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double theta = 0.1; theta <= 10.0 + 1e-12; theta += 0.1) {
    const double v = loglik_classic(m.with_gain(theta), t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo < 1e-3);
}

TEST_CASE("empty traces are rejected") {
  const auto m = LinearGaussianModel::scalar(0.9, 2.0, 1.0, 1.0);
  EngagementTrace empty;
  CHECK_THROWS_AS(loglik_classic(m, empty), ValidationError);
  CHECK_THROWS_AS(loglik_inverse(m, noise(1.0), empty), ValidationError);
}

TEST_CASE("grid excluding the true gain hits the boundary") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto t = simulate_engagement(m, bench.action_map(), 500, 21);
  const auto r = mle_gain(m, bench.action_map(), t, LikelihoodMode::Classic, GainGrid{3.0, 10.0, 141});
  CHECK(r.boundary_hit);
  CHECK(r.theta_star == doctest::Approx(3.0).epsilon(1e-6));
  const auto inside = mle_gain(m, bench.action_map(), t, LikelihoodMode::Classic, GainGrid{});
  CHECK_FALSE(inside.boundary_hit);
  CHECK(inside.curve.thetas.size() == 1000);
  CHECK(inside.curve.innovations_last.has_value());
  CHECK(inside.curve.innovations_last->size() == 500);
}

TEST_CASE("refined MLE is a local maximum and beats every grid point") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto traces = simulate_ensemble(m, bench.action_map(), 300, 4, 4);
  for (auto mode : {LikelihoodMode::Classic, LikelihoodMode::Inverse}) {
    const auto results = mle_gain_ensemble(m, bench.action_map(), traces, mode, GainGrid{0.05, 10, 200}, 1e-7);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& r = results[i];
      for (double v : r.curve.loglik) CHECK(r.loglik_star >= v);
      const double at = loglik(mode, m.with_gain(r.theta_star), bench.action_map(), traces[i]);
      CHECK(at == doctest::Approx(r.loglik_star).epsilon(1e-14));
      CHECK(loglik(mode, m.with_gain(r.theta_star + 1e-4), bench.action_map(), traces[i]) <= at);
      CHECK(loglik(mode, m.with_gain(r.theta_star - 1e-4), bench.action_map(), traces[i]) <= at);
      const auto single = mle_gain(m, bench.action_map(), traces[i], mode, GainGrid{0.05, 10, 200}, 1e-7);
      CHECK(single.theta_star == r.theta_star);
    }
  }
}

TEST_CASE("non-finite likelihood names the gain") {
  Benchmark bench;
  const auto m = bench.model(2.0);
  auto t = simulate_engagement(m, bench.action_map(), 10, 2);
  t.actions[3](0) = std::numeric_limits<double>::quiet_NaN();
  try {
    mle_gain(m, bench.action_map(), t, LikelihoodMode::Inverse, GainGrid{0.5, 1.0, 3});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("theta=0.5") != std::string::npos);
  }
}

TEST_CASE("finite-difference curvature matches a quadratic fit") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto traces = simulate_ensemble(m, bench.action_map(), 500, 9, 10);
  for (auto mode : {LikelihoodMode::Classic, LikelihoodMode::Inverse}) {
    // least-squares parabola through the ensemble-mean curve on [theta-0.05, theta+0.05]
    Matrix design(11, 3);
    Vector values(11);
    for (int j = 0; j < 11; ++j) {
      const double d = -0.05 + 0.01 * j;
      const auto v = loglik_ensemble(mode, m.with_gain(2.5 + d), bench.action_map(), traces);
      double s = 0.0;
      for (double x : v) s += x;
      design.row(j) << 1.0, d, d * d;
      values(j) = s / static_cast<double>(v.size());
    }
    const Vector coef = design.colPivHouseholderQr().solve(values);
    const double fit = 2.0 * coef(2);
    const double fd = mean_curvature(mode, m, bench.action_map(), traces, 2.5, 2.5e-3);
    CHECK(std::abs(fd - fit) < 0.1 * std::abs(fit));
  }
}

TEST_CASE("curvature is sharper for the classic likelihood") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto traces = simulate_ensemble(m, bench.action_map(), 500, 31, 20);
  const double c = mean_curvature(LikelihoodMode::Classic, m, bench.action_map(), traces, 2.5, 2.5e-3);
  const double i = mean_curvature(LikelihoodMode::Inverse, m, bench.action_map(), traces, 2.5, 2.5e-3);
  CHECK(c < 0.0);
  CHECK(i < 0.0);
  CHECK(std::abs(c) > std::abs(i));
}

TEST_CASE("sensitivity report mechanics") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto traces = simulate_ensemble(m, bench.action_map(), 200, 5, 5);
  const auto r = sensitivity(m, bench.action_map(), traces, LikelihoodMode::Inverse);
  CHECK(r.h_theta == doctest::Approx(2.5e-3));
  CHECK(r.h_Q == doctest::Approx(1e-3));
  CHECK(r.h_R == doctest::Approx(1e-3));
  CHECK(r.mode == LikelihoodMode::Inverse);
  CHECK(std::isfinite(r.eta_Q));
  CHECK(std::isfinite(r.eta_R));
  CHECK(r.converged == (std::abs(r.eta_Q - r.eta_Q_half) <= 0.1 * std::max(std::abs(r.eta_Q), std::abs(r.eta_Q_half)) &&
                        std::abs(r.eta_R - r.eta_R_half) <= 0.1 * std::max(std::abs(r.eta_R), std::abs(r.eta_R_half))));

  // eta against an independent central difference of the curvature in Q
  auto curv_at_q = [&](double q) {
    auto mm = m;
    mm.Q(0, 0) = q;
    return mean_curvature(LikelihoodMode::Inverse, mm, bench.action_map(), traces, 2.5, 2.5e-3);
  };
  const double eta_q = (curv_at_q(1.0 + 1e-3) - curv_at_q(1.0 - 1e-3)) / 2e-3;
  CHECK(r.eta_Q == doctest::Approx(eta_q).epsilon(1e-12));

  SensitivitySteps huge;
  huge.h_q = 2.0;
  CHECK_THROWS_AS(sensitivity(m, bench.action_map(), traces, LikelihoodMode::Inverse, huge), ConfigError);
}

TEST_CASE("crb preconditions") {
  Benchmark bench;
  CHECK_THROWS_AS(crb_gain(bench.model(2.0), bench.action_map(), LikelihoodMode::Classic, 99, 1), ConfigError);
}

TEST_CASE("crb shrinks as action noise vanishes") {
  Benchmark bench;
  const auto m = bench.model(2.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double var : {1.0, 0.1, 0.01}) {
    const double crb = crb_gain(m, noise(var), LikelihoodMode::Inverse, 100, 77, 200);
    CHECK(crb < previous);
    previous = crb;
  }
}

TEST_CASE("grid and mode parsing") {
  CHECK_THROWS_AS((GainGrid{0.0, 10.0, 100}.validate()), ConfigError);
  CHECK_THROWS_AS((GainGrid{2.0, 1.0, 100}.validate()), ConfigError);
  const auto pts = GainGrid{0.01, 10.0, 1000}.points();
  CHECK(pts.front() == 0.01);
  CHECK(pts.back() == 10.0);
  CHECK(pts[1] - pts[0] == doctest::Approx(0.01));
  CHECK(likelihood_mode_from_string("Inverse") == LikelihoodMode::Inverse);
  CHECK_THROWS_AS(likelihood_mode_from_string("inverse"), ConfigError);
}
