#include <doctest.h>

#include <cmath>

#include "radarkit/errors.hpp"
#include "radarkit/tracker.hpp"
#include "support.hpp"

using namespace radarkit;

TEST_CASE("scalar step by hand") {
  const auto m = LinearGaussianModel::scalar(1.0, 1.0, 0.0, 1.0);
  const GaussianBelief b(Vector::Zero(1), Matrix::Identity(1, 1));
  const auto s = kalman_step(m, b, Vector::Constant(1, 1.0));
  CHECK(s.predicted_cov(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.innovation_cov(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.gain(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.posterior.mean()(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.posterior.cov()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("uninformative observation leaves the prediction") {
  CounterRng g(3, 0, 0);
  auto m = testsupport::random_model(g, 3, 2);
  m.R = 1e12 * Matrix::Identity(2, 2);
  const GaussianBelief b(testsupport::random_vector(g, 3), testsupport::random_spd(g, 3));
  const auto s = kalman_step(m, b, testsupport::random_vector(g, 2, 10.0));
  CHECK((s.posterior.mean() - m.A * b.mean()).norm() < 1e-5);
}

TEST_CASE("gain identity and covariance reduction") {
  CounterRng g(4, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = static_cast<Eigen::Index>(1 + rep % 4);
    const auto y = static_cast<Eigen::Index>(1 + (rep / 4) % 3);
    const auto m = testsupport::random_model(g, x, y);
    const GaussianBelief b(testsupport::random_vector(g, x), testsupport::random_spd(g, x));
    const auto s = kalman_step(m, b, testsupport::random_vector(g, y));
    const Matrix expected_gain = s.predicted_cov * m.C.transpose() * s.innovation_cov.inverse();
    CHECK(testsupport::rel_diff(s.gain, expected_gain) < 1e-10);
    CHECK(testsupport::min_eig(s.predicted_cov - s.posterior.cov()) >= -1e-10);
  }
}

TEST_CASE("information form agrees with covariance form on random SPD instances") {
  CounterRng g(8, 0, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = static_cast<Eigen::Index>(1 + rep % 4);
    const auto y = static_cast<Eigen::Index>(1 + (rep / 4) % 3);
    const auto m = testsupport::random_model(g, x, y);
    const GaussianBelief b(testsupport::random_vector(g, x), testsupport::random_spd(g, x));
    const Vector obs = testsupport::random_vector(g, y);
    const auto cov_form = kalman_step(m, b, obs);
    const auto info_form = kalman_step_information(m, b, obs);
    CHECK(testsupport::rel_diff(cov_form.posterior.cov(), info_form.posterior.cov()) < 1e-9);
    CHECK(testsupport::rel_diff(cov_form.posterior.mean(), info_form.posterior.mean()) < 1e-9);
    CHECK(testsupport::rel_diff(cov_form.gain, info_form.gain) < 1e-9);
  }
}

TEST_CASE("covariances do not depend on the observations") {
  CounterRng g(12, 0, 0);
  const auto m = testsupport::random_model(g, 3, 2);
  GaussianBelief b1(m.prior_mean, m.prior_cov);
  GaussianBelief b2(m.prior_mean, m.prior_cov);
  for (int k = 0; k < 50; ++k) {
    b1 = kalman_step(m, b1, testsupport::random_vector(g, 2)).posterior;
    b2 = kalman_step(m, b2, testsupport::random_vector(g, 2, 5.0)).posterior;
    CHECK(b1.cov() == b2.cov());
  }
}

TEST_CASE("singular innovation covariance reports its condition") {
  auto m = LinearGaussianModel::scalar(1.0, 1.0, 0.0, 1.0);
  m.A = Matrix::Identity(2, 2);
  m.C = Matrix::Identity(2, 2);
  m.Q = Matrix::Zero(2, 2);
  m.R = (Matrix(2, 2) << 1.0, 0.0, 0.0, 1e-14).finished();
  m.prior_mean = Vector::Zero(2);
  m.prior_cov = Matrix::Zero(2, 2);
  const GaussianBelief b(Vector::Zero(2), Matrix::Zero(2, 2));
  try {
    kalman_step(m, b, Vector::Zero(2));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.condition() >= 1e12);
  }
}

TEST_CASE("Riccati predictor fixed point") {
  SUBCASE("golden ratio") {
    const auto m = LinearGaussianModel::scalar(1.0, 1.0, 1.0, 1.0);
    const Matrix p = predicted_covariance_fixed_point(m);
    CHECK(p(0, 0) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-9));
    // residual of the fixed-point map
    const double s = p(0, 0);
    CHECK(std::abs(s / (s + 1.0) + 1.0 - s) < 1e-10);
  }
  SUBCASE("no process noise with stable dynamics") {
    LinearGaussianModel m;
    m.A = (Matrix(2, 2) << 0.5, 0.1, 0.0, 0.7).finished();
    m.C = Matrix::Identity(1, 2);
    m.Q = Matrix::Zero(2, 2);
    m.R = Matrix::Identity(1, 1);
    m.prior_mean = Vector::Zero(2);
    m.prior_cov = Matrix::Identity(2, 2);
    CHECK(predicted_covariance_fixed_point(m).norm() < 1e-10);
  }
  SUBCASE("residual on random stable models") {
    CounterRng g(21, 0, 0);
    for (int rep = 0; rep < 20; ++rep) {
      const auto m = testsupport::random_model(g, 3, 2);
      const Matrix p = predicted_covariance_fixed_point(m);
      const Matrix s = m.C * p * m.C.transpose() + m.R;
      const Matrix next = m.A * (p - p * m.C.transpose() * s.inverse() * m.C * p) * m.A.transpose() + m.Q;
      CHECK((next - p).norm() < 1e-9);
    }
  }
  SUBCASE("unstabilizable model diverges") {
    auto m = LinearGaussianModel::scalar(2.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(predicted_covariance_fixed_point(m, 1e-10, 1000), DivergenceError);
  }
}
