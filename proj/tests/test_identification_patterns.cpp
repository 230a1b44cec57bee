// Simulation-pattern examples on the scalar benchmark (A=0.9, Q=R=1,
// sigma_eps^2=1, N=500, 50 seeds).
#include <doctest.h>

#include <cmath>
#include <iostream>

#include "radarkit/identification.hpp"
#include "support.hpp"

using namespace radarkit;

namespace {

double sample_variance(const std::vector<MleResult>& rs) {
  double mean = 0.0;
  for (const auto& r : rs) mean += r.theta_star;
  mean /= static_cast<double>(rs.size());
  double s = 0.0;
  for (const auto& r : rs) s += (r.theta_star - mean) * (r.theta_star - mean);
  return s / static_cast<double>(rs.size() - 1);
}

std::size_t within(const std::vector<MleResult>& rs, double centre, double tol) {
  std::size_t n = 0;
  for (const auto& r : rs) n += std::abs(r.theta_star - centre) <= tol;
  return n;
}

// Noise-free trace: our state still moves, but y_k = C x_k exactly and the
// adversary acts on its mean without noise.
EngagementTrace noiseless_trace(const LinearGaussianModel& m, std::size_t n, std::uint64_t seed) {
  EngagementTrace t;
  t.seed = seed;
  t.initial_state = m.prior_mean;
  Vector x = m.prior_mean;
  GaussianBelief b(m.prior_mean, m.prior_cov);
  const Matrix qf = covariance_factor(m.Q);
  for (std::size_t k = 1; k <= n; ++k) {
    CounterRng rng(seed, streams::kProcessNoise, k);
    x = m.A * x + sample_gaussian(rng, qf);
    const Vector y = m.C * x;
    b = kalman_step(m, b, y).posterior;
    t.states.push_back(x);
    t.observations.push_back(y);
    t.adversary_means.push_back(b.mean());
    t.adversary_covs.push_back(b.cov());
    t.actions.push_back(b.mean());
  }
  return t;
}

}  // namespace

TEST_CASE("MLE spread on the 50-seed benchmark ensemble") {
  Benchmark bench;
  const auto m = bench.model(2.5);
  const auto traces = simulate_ensemble(m, bench.action_map(), bench.horizon, 2024, bench.ensemble);
  const auto classic = mle_gain_ensemble(m, bench.action_map(), traces, LikelihoodMode::Classic, GainGrid{});
  const auto inverse = mle_gain_ensemble(m, bench.action_map(), traces, LikelihoodMode::Inverse, GainGrid{});
  const std::size_t c_in = within(classic, 2.5, 0.1);
  const std::size_t i_in = within(inverse, 2.5, 0.5);
  MESSAGE("classic within 0.1: " << c_in << "/50, inverse within 0.5: " << i_in << "/50");

  CHECK(sample_variance(inverse) > sample_variance(classic));
  CHECK(c_in >= 45);
  CHECK(i_in >= 45);
}

TEST_CASE("noise-free trace with exact actions recovers the gain") {
  const auto m = LinearGaussianModel::scalar(0.9, 2.5, 1.0, 1.0);
  ActionMap am;
  am.action_noise_var = 0.0;
  const auto t = noiseless_trace(m, 500, 3);
  const auto r = mle_gain(m, am, t, LikelihoodMode::Inverse, GainGrid{}, 1e-6);
  MESSAGE("theta_star = " << r.theta_star);
  CHECK(std::abs(r.theta_star - 2.5) <= 1e-6);
}

TEST_CASE("sensitivity sign and ordering pattern") {
  Benchmark bench;
  SensitivityReport reports[2][2];
  const double gains[2] = {2.5, 3.5};
  const LikelihoodMode modes[2] = {LikelihoodMode::Classic, LikelihoodMode::Inverse};
  for (int g = 0; g < 2; ++g) {
    const auto m = bench.model(gains[g]);
    const auto traces = simulate_ensemble(m, bench.action_map(), bench.horizon, 77, bench.ensemble);
    for (int k = 0; k < 2; ++k) {
      reports[g][k] = sensitivity(m, bench.action_map(), traces, modes[k]);
      MESSAGE(to_string(modes[k]) << " C=" << gains[g] << " eta_Q=" << reports[g][k].eta_Q
                                  << " eta_R=" << reports[g][k].eta_R);
    }
  }
  for (int g = 0; g < 2; ++g)
    for (int k = 0; k < 2; ++k) {
      const auto& r = reports[g][k];
      CHECK(r.eta_Q < 0.0);
      CHECK(r.eta_R < 0.0);
      CHECK(std::abs(r.eta_R) > std::abs(r.eta_Q));
    }
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(reports[0][k].eta_Q) > std::abs(reports[1][k].eta_Q));
    CHECK(std::abs(reports[0][k].eta_R) > std::abs(reports[1][k].eta_R));
  }
  for (int g = 0; g < 2; ++g) {
    CHECK(std::abs(reports[g][0].eta_Q) > std::abs(reports[g][1].eta_Q));
    CHECK(std::abs(reports[g][0].eta_R) > std::abs(reports[g][1].eta_R));
  }
}

TEST_CASE("Cramer-Rao bound ordering and ratio") {
  Benchmark bench;
  for (double gain : {0.5, 1.5, 2.0, 3.0}) {
    const auto m = bench.model(gain);
    const double inv = crb_gain(m, bench.action_map(), LikelihoodMode::Inverse, 100, 5);
    const double cls = crb_gain(m, bench.action_map(), LikelihoodMode::Classic, 100, 5);
    MESSAGE("C=" << gain << " crb ratio " << inv / cls);
    CHECK(inv > cls);
    CHECK(inv / cls > 5.0);
  }
}
