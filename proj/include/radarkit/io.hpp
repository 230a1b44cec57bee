#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "radarkit/interference.hpp"
#include "radarkit/revealed.hpp"
#include "radarkit/statespace.hpp"

namespace radarkit::io {

using Json = nlohmann::ordered_json;

/// "%.17g": round-trips every finite double.
std::string format_double(double v);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // row-major nested arrays
Json to_json(const CMatrix& m);  // nested arrays of [re, im] pairs
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);
CMatrix cmatrix_from_json(const Json& j);

Json to_json(const LinearGaussianModel& model);
LinearGaussianModel model_from_json(const Json& j);

Json to_json(const EngagementTrace& trace);
EngagementTrace trace_from_json(const Json& j);

/// Our inverse-filter posteriors; attached to a trace document under "beliefs".
Json to_json(const std::vector<GaussianBelief>& beliefs);
std::vector<GaussianBelief> beliefs_from_json(const Json& j);

/// One row per k: k, x_*, y_*, xhat_*, sigma_diag_*, a_* and, when beliefs are
/// given, xhathat_*, sigmabar_diag_*.
void write_trace_csv(std::ostream& out, const EngagementTrace& trace,
                     const std::vector<GaussianBelief>* beliefs = nullptr);

/// Header `n, alpha_1..alpha_m, beta_1..beta_m`; n is 1-based.
void write_rp_csv(std::ostream& out, const RPDataset& dataset);
/// Reads the CSV written above; the budget defaults to a linear budget.
RPDataset read_rp_csv(std::istream& in);

/// Sidecar description of the budget. Callable budgets cannot be serialized,
/// and SINR budgets are limited to the diagonal-plus-ridge P builder.
Json budget_to_json(const BudgetSpec& budget);
BudgetSpec budget_from_json(const Json& j);

Json to_json(const AfriatCertificate& cert);
AfriatCertificate certificate_from_json(const Json& j);

}  // namespace radarkit::io
