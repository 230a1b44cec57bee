#pragma once

#include <cmath>
#include <cstdint>

#include "radarkit/revealed.hpp"

namespace rpgen {

using radarkit::CounterRng;
using radarkit::Vector;

inline Vector positive_vector(CounterRng& rng, Eigen::Index m, double lo, double hi) {
  Vector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = lo + (hi - lo) * rng.uniform();
  return v;
}

/// Dataset kind k % 3: 0 Cobb-Douglas responses (rational), 1 the same with
/// multiplicative noise, 2 independent random responses.
inline radarkit::RPDataset random_linear_dataset(std::uint64_t seed, std::size_t index,
                                                 bool on_boundary = false) {
  CounterRng rng(seed, radarkit::streams::kDatasetGenerator, index);
  static const Eigen::Index dims[] = {2, 3, 5};
  const Eigen::Index m = dims[rng.next_u64() % 3];
  const std::size_t n = 2 + rng.next_u64() % 19;
  const int kind = static_cast<int>(index % 3);
  const Vector w = positive_vector(rng, m, 0.2, 2.0);

  std::vector<Vector> probes, responses;
  for (std::size_t t = 0; t < n; ++t) {
    Vector a = positive_vector(rng, m, 0.1, 3.0);
    Vector b;
    if (kind == 2) {
      b = positive_vector(rng, m, 0.0, 1.0);
    } else {
      b = (w.array() / w.sum() / a.array()).matrix();
      if (kind == 1) {
        for (Eigen::Index i = 0; i < m; ++i) b(i) *= std::exp(0.4 * rng.normal());
      }
    }
    if (on_boundary) b /= a.dot(b);
    probes.push_back(std::move(a));
    responses.push_back(std::move(b));
  }
  return radarkit::make_linear_dataset(std::move(probes), std::move(responses));
}

/// Same data with the budget replaced by g_n(beta) = alpha_n' beta - 1.
inline radarkit::RPDataset wrap_as_callable(const radarkit::RPDataset& d) {
  radarkit::RPDataset out = d;
  const auto probes = d.probes;
  out.budget = radarkit::CallableBudget{
      [probes](std::size_t n, const Vector& beta) { return probes[n].dot(beta) - 1.0; }};
  return out;
}

/// Cobb-Douglas-rational dataset with m goods and N probes.
inline radarkit::RPDataset rational_dataset(std::uint64_t seed, std::size_t index, Eigen::Index m,
                                            std::size_t n) {
  CounterRng rng(seed, radarkit::streams::kDatasetGenerator, index);
  radarkit::CobbDouglas u{positive_vector(rng, m, 0.2, 2.0)};
  std::vector<Vector> probes;
  for (std::size_t t = 0; t < n; ++t) probes.push_back(positive_vector(rng, m, 0.1, 3.0));
  return radarkit::synth_responder(radarkit::LinearBudget{1.0}, u, probes);
}

}  // namespace rpgen
