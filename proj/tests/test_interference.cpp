#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "radarkit/errors.hpp"
#include "radarkit/interference.hpp"
#include "radarkit/rng.hpp"

using namespace radarkit;

namespace {

CMatrix row(double a, double b) { return (CMatrix(1, 2) << a, b).finished(); }

CMatrix random_cmatrix(CounterRng& rng, Eigen::Index r, Eigen::Index c) {
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) {
      const double re = rng.normal();
      m(i, j) = Complex(re, rng.normal());
    }
  return m;
}

CVector random_unit(CounterRng& rng, Eigen::Index n) {
  CVector v = random_cmatrix(rng, n, 1);
  return v.normalized();
}

MimoChannel random_channel(CounterRng& rng) {
  MimoChannel ch;
  ch.I = 1 + static_cast<int>(rng.next_u64() % 2);
  ch.J = 1 + static_cast<int>(rng.next_u64() % 2);
  ch.K = 1 + static_cast<int>(rng.next_u64() % 2);
  ch.H_t = random_cmatrix(rng, ch.receive_dim(), ch.waveform_dim());
  ch.H_c = random_cmatrix(rng, ch.receive_dim(), ch.waveform_dim());
  ch.radar_noise_var = 0.1 + rng.uniform();
  return ch;
}

}  // namespace

TEST_CASE("scnr hand values") {
  const CVector w = (CVector(2) << 1.0, 1.0).finished() / std::sqrt(2.0);
  CHECK(scnr(row(7, 7), row(1, 1), w, 1.0) == doctest::Approx(98.0 / 3.0).epsilon(1e-14));
  const CVector orth = (CVector(2) << 1.0, -1.0).finished() / std::sqrt(2.0);
  CHECK(scnr(row(7, 7), row(1, 1), orth, 1.0) == 0.0);
  CHECK(scnr(row(3, 4), row(0, 0), w, 2.0) == doctest::Approx(24.5 / 2.0).epsilon(1e-14));
}

TEST_CASE("optimal waveform: two-dimensional example against a circle grid") {
  const auto sol = optimal_waveform(row(7, 7), row(1, 1), 1.0);
  CHECK(std::abs(sol.eigenvalue - 98.0 / 3.0) <= 1e-9 * 98.0 / 3.0);
  CHECK(std::abs(sol.scnr_max - 98.0 / 3.0) <= 1e-9 * 98.0 / 3.0);
  CHECK(std::abs(sol.waveform(0) - Complex(1.0 / std::sqrt(2.0))) < 1e-9);
  CHECK(std::abs(sol.waveform(1) - Complex(1.0 / std::sqrt(2.0))) < 1e-9);
  CHECK_FALSE(sol.degenerate);
  double grid = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 10000;
    const CVector v = (CVector(2) << std::cos(th), std::sin(th)).finished();
    grid = std::max(grid, scnr(row(7, 7), row(1, 1), v, 1.0));
  }
  CHECK(grid <= sol.scnr_max + 1e-12);
  CHECK(grid >= sol.scnr_max - 1e-6);
}

TEST_CASE("optimal waveform without clutter aligns with the top right-singular vector") {
  CounterRng rng(3, 0, 0);
  for (int inst = 0; inst < 20; ++inst) {
    const CVector a = random_cmatrix(rng, 3, 1);
    const CVector b = random_cmatrix(rng, 4, 1);
    const CMatrix ht = a * b.adjoint();
    const auto sol = optimal_waveform(ht, CMatrix::Zero(3, 4), 0.5);
    const Eigen::JacobiSVD<CMatrix> svd(ht, Eigen::ComputeFullV);
    CHECK(std::abs(svd.matrixV().col(0).dot(sol.waveform)) == doctest::Approx(1.0).epsilon(1e-10));
    const double sv = svd.singularValues()(0);
    CHECK(sol.scnr_max == doctest::Approx(sv * sv / (3 * 0.5)).epsilon(1e-10));
  }
}

TEST_CASE("optimal waveform beats random unit probes") {
  CounterRng rng(5, 0, 0);
  for (int inst = 0; inst < 20; ++inst) {
    const auto ch = random_channel(rng);
    const auto sol = optimal_waveform(ch, ch.H_c);
    CHECK(sol.waveform.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < 1000; ++k) {
      const CVector v = random_unit(rng, ch.waveform_dim());
      CHECK(sol.scnr_max >= scnr(ch.H_t, ch.H_c, v, ch.radar_noise_var) - 1e-9);
    }
  }
}

TEST_CASE("eigenvalue equals maximal SCNR and matches a generalized eigensolver") {
  CounterRng rng(7, 0, 0);
  for (int inst = 0; inst < 1000; ++inst) {
    const auto ch = random_channel(rng);
    const auto sol = optimal_waveform(ch, ch.H_c);
    CHECK(std::abs(sol.scnr_max - sol.eigenvalue) <= 1e-9 * sol.eigenvalue);
    const Eigen::Index n = ch.waveform_dim();
    const CMatrix b = ch.H_c.adjoint() * ch.H_c +
                      static_cast<double>(ch.receive_dim()) * ch.radar_noise_var * CMatrix::Identity(n, n);
    const Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ges(ch.H_t.adjoint() * ch.H_t, b);
    const double top = ges.eigenvalues().maxCoeff();
    CHECK(std::abs(sol.eigenvalue - top) <= 1e-9 * top);
    Eigen::Index idx = 0;
    sol.waveform.cwiseAbs().maxCoeff(&idx);
    CHECK(sol.waveform(idx).imag() == 0.0);
    CHECK(sol.waveform(idx).real() > 0.0);
  }
}

TEST_CASE("scaling the target channel scales the eigenvalue and keeps the waveform") {
  CounterRng rng(9, 0, 0);
  for (int inst = 0; inst < 50; ++inst) {
    const auto ch = random_channel(rng);
    const double c = 0.2 + 4.0 * rng.uniform();
    const auto a = optimal_waveform(ch.H_t, ch.H_c, ch.radar_noise_var);
    const auto b = optimal_waveform(CMatrix(c * ch.H_t), ch.H_c, ch.radar_noise_var);
    CHECK(b.eigenvalue == doctest::Approx(c * c * a.eigenvalue).epsilon(1e-9));
    CHECK((a.waveform - b.waveform).norm() < 1e-6);
  }
}

TEST_CASE("collinear clutter probes never raise the maximal SCNR") {
  CounterRng rng(11, 0, 0);
  for (int inst = 0; inst < 30; ++inst) {
    const auto ch = random_channel(rng);
    const double a = 2.0 * rng.uniform();
    double previous = optimal_waveform(ch, ch.H_c).scnr_max;
    for (double t = 0.25; t <= 5.0; t += 0.25) {
      const double now = optimal_waveform(ch, CMatrix(ch.H_c + t * a * ch.H_c)).scnr_max;
      CHECK(now <= previous * (1.0 + 1e-12));
      previous = now;
    }
  }
}

TEST_CASE("simulate pulses") {
  auto ex = two_pulse_example();
  SUBCASE("noise-free observations equal the waveform") {
    ex.channel.our_noise_var = 0.0;
    const auto recs = simulate_pulses(ex.channel, scaled_plan(ex.shapes, 3.0, ProbeLag::OneStep), 1);
    for (const auto& r : recs) CHECK((r.observation - r.solution.waveform).norm() == 0.0);
  }
  SUBCASE("a zero plan keeps the waveform fixed") {
    const auto recs = simulate_pulses(ex.channel, scaled_plan(ex.shapes, 0.0, ProbeLag::OneStep), 1);
    CHECK((recs[0].solution.waveform - recs[1].solution.waveform).norm() == 0.0);
    CHECK(recs[0].solution.eigenvalue == recs[1].solution.eigenvalue);
  }
  SUBCASE("one-step lag: the first probe lowers the second pulse") {
    const auto recs = simulate_pulses(ex.channel, scaled_plan(ex.shapes, 10.0, ProbeLag::OneStep), 1);
    CHECK(recs[0].solution.scnr_max == doctest::Approx(98.0 / 3.0).epsilon(1e-9));
    CHECK(recs[1].solution.scnr_max < recs[0].solution.scnr_max);
    CHECK((recs[1].clutter - row(3, 6)).norm() < 1e-15);
  }
  SUBCASE("simultaneous lag uses the current probe") {
    const auto recs = simulate_pulses(ex.channel, scaled_plan(ex.shapes, 10.0, ProbeLag::Simultaneous), 1);
    CHECK((recs[0].clutter - row(3, 6)).norm() < 1e-15);
    CHECK((recs[1].clutter - row(5, 5)).norm() < 1e-15);
  }
  SUBCASE("deterministic under a seed") {
    const auto plan = scaled_plan(ex.shapes, 2.0, ProbeLag::OneStep);
    const auto a = simulate_pulses(ex.channel, plan, 4);
    const auto b = simulate_pulses(ex.channel, plan, 4);
    const auto c = simulate_pulses(ex.channel, plan, 5);
    CHECK(a[1].observation == b[1].observation);
    CHECK(a[1].observation != c[1].observation);
  }
}

TEST_CASE("wilson interval against tabulated values") {
  const auto zero = wilson_estimate(0, 10);
  CHECK(zero.p_hat == 0.0);
  CHECK(zero.wilson_lower == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.wilson_lower + 2.0 * zero.ci_halfwidth == doctest::Approx(0.2775).epsilon(1e-3));
  const auto half = wilson_estimate(5, 10);
  CHECK(half.wilson_lower == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(half.wilson_lower + 2.0 * half.ci_halfwidth == doctest::Approx(0.7634).epsilon(1e-3));
}

TEST_CASE("chance probability: deterministic limits") {
  auto ex = two_pulse_example();
  ex.channel.our_noise_var = 0.0;
  const auto plan = scaled_plan(ex.shapes, 0.0, ProbeLag::Simultaneous);
  ChanceSpec spec;
  spec.mc_samples = 500;
  spec.delta = 100.0;
  CHECK(chance_probability(ex.channel, plan, spec, 1).p_hat == 1.0);
  spec.delta = 3.0;
  CHECK(chance_probability(ex.channel, plan, spec, 1).p_hat == 0.0);
}

TEST_CASE("chance probability: nested in delta, monotone in r up to Monte Carlo noise") {
  const auto ex = two_pulse_example();
  ChanceSpec spec;
  spec.mc_samples = 4000;
  spec.seed = 3;
  for (double r = 0.0; r <= 40.0; r += 4.0) {
    const auto plan = scaled_plan(ex.shapes, r, ProbeLag::Simultaneous);
    for (std::size_t l = 1; l <= 2; ++l) {
      std::size_t previous = 0;
      for (double d : {2.8, 3.0, 3.2}) {
        spec.delta = d;
        const auto e = chance_probability(ex.channel, plan, spec, l);
        CHECK(e.successes >= previous);
        previous = e.successes;
      }
    }
  }
  spec.delta = 3.0;
  for (std::size_t l = 1; l <= 2; ++l) {
    ChanceEstimate previous;
    for (double r = 0.0; r <= 40.0; r += 2.0) {
      const auto e = chance_probability(ex.channel, scaled_plan(ex.shapes, r, ProbeLag::Simultaneous), spec, l);
      CHECK(e.p_hat >= previous.p_hat - 3.0 * std::max(e.ci_halfwidth, previous.ci_halfwidth));
      previous = e;
    }
  }
}

TEST_CASE("chance probability does not depend on the worker count") {
  const auto ex = two_pulse_example();
  ChanceSpec spec;
  spec.mc_samples = 5000;
  const auto plan = scaled_plan(ex.shapes, 12.0, ProbeLag::Simultaneous);
  setenv("RADARKIT_THREADS", "1", 1);
  const auto a = chance_probability(ex.channel, plan, spec, 1);
  setenv("RADARKIT_THREADS", "8", 1);
  const auto b = chance_probability(ex.channel, plan, spec, 1);
  unsetenv("RADARKIT_THREADS");
  CHECK(a.successes == b.successes);
}

TEST_CASE("design interference") {
  const auto ex = two_pulse_example();
  ChanceSpec spec;
  spec.mc_samples = 2000;
  spec.seed = 2;
  const RGrid grid{0.0, 100.0, 201};

  spec.delta = 100.0;
  const auto trivial = design_interference(ex.channel, ex.shapes, ProbeLag::Simultaneous, spec, grid);
  CHECK(trivial.status == DesignStatus::Feasible);
  CHECK(trivial.r_star == 0.0);
  CHECK(trivial.objective == 0.0);

  auto r_star = [&](double delta, double eps) {
    ChanceSpec s = spec;
    s.delta = delta;
    s.epsilon = eps;
    const auto d = design_interference(ex.channel, ex.shapes, ProbeLag::Simultaneous, s, grid);
    REQUIRE(d.status == DesignStatus::Feasible);
    CHECK(d.objective == doctest::Approx(d.r_star * d.r_star * (0.29 + 0.32)).epsilon(1e-12));
    return d.r_star;
  };
  CHECK(r_star(3.0, 0.3) <= r_star(3.0, 0.2));
  CHECK(r_star(3.2, 0.2) <= r_star(2.8, 0.2));

  // Under the one-step lag the first pulse never sees a probe.
  spec.delta = 3.0;
  const auto lagged = design_interference(ex.channel, ex.shapes, ProbeLag::OneStep, spec, grid);
  CHECK(lagged.status == DesignStatus::Infeasible);
  CHECK(std::isnan(lagged.r_star));
}

TEST_CASE("design result sits on the feasibility boundary") {
  const auto ex = two_pulse_example();
  ChanceSpec spec;
  spec.mc_samples = 2000;
  spec.delta = 3.0;
  spec.epsilon = 0.3;
  const auto d = design_interference(ex.channel, ex.shapes, ProbeLag::Simultaneous, spec, RGrid{0.0, 100.0, 101});
  REQUIRE(d.status == DesignStatus::Feasible);
  auto ok = [&](double r) {
    const auto sp = evaluate_r(ex.channel, ex.shapes, ProbeLag::Simultaneous, spec, r);
    for (const auto& e : sp.per_pulse)
      if (e.wilson_lower < 1.0 - spec.epsilon) return false;
    return true;
  };
  CHECK(ok(d.r_star));
  CHECK_FALSE(ok(d.r_star * (1.0 - 2e-3)));
}

TEST_CASE("interference validation") {
  auto ex = two_pulse_example();
  ChanceSpec spec;
  spec.epsilon = 1.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec.epsilon = 0.2;
  spec.mc_samples = 50;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec.mc_samples = 1000;
  CHECK_THROWS_AS(design_interference(ex.channel, {row(0, 0)}, ProbeLag::OneStep, spec, RGrid{}), ValidationError);
  CHECK_THROWS_AS(design_interference(ex.channel, ex.shapes, ProbeLag::OneStep, spec, RGrid{-1.0, 1.0, 3}),
                  ValidationError);
  auto bad = ex.channel;
  bad.J = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ex.channel;
  bad.radar_noise_var = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(chance_probability(ex.channel, scaled_plan(ex.shapes, 1.0, ProbeLag::OneStep), spec, 3),
                  ConfigError);
}
