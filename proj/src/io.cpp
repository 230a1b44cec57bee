#include "radarkit/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "radarkit/errors.hpp"

namespace radarkit::io {
namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing key \"") + key + "\"");
  }
  return j.at(key);
}

double number(const Json& j) {
  if (!j.is_number()) throw ConfigError("expected a number, got " + j.dump());
  return j.get<double>();
}

template <class T, class F>
std::vector<T> list_from_json(const Json& j, F&& convert) {
  if (!j.is_array()) throw ConfigError("expected an array");
  std::vector<T> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(convert(e));
  return out;
}

template <class T>
Json list_to_json(const std::vector<T>& values) {
  Json a = Json::array();
  for (const auto& v : values) a.push_back(to_json(v));
  return a;
}

void put_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << format_double(v(i));
}

void put_header(std::ostream& out, const char* prefix, Eigen::Index n) {
  for (Eigen::Index i = 1; i <= n; ++i) out << ',' << prefix << i;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

double parse_cell(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": cannot parse \"" + s + "\" as a number");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(r));
  }
  return rows;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array, got " + j.dump());
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i]);
  return v;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("matrix rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c]);
    }
  }
  return m;
}

CMatrix cmatrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  CMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("matrix rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& e = j[r][c];
      if (!e.is_array() || e.size() != 2) throw ConfigError("complex entries are [re, im] pairs");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = Complex(number(e[0]), number(e[1]));
    }
  }
  return m;
}

Json to_json(const LinearGaussianModel& model) {
  Json j;
  j["A"] = to_json(model.A);
  j["C"] = to_json(model.C);
  j["Q"] = to_json(model.Q);
  j["R"] = to_json(model.R);
  j["prior_mean"] = to_json(model.prior_mean);
  j["prior_cov"] = to_json(model.prior_cov);
  return j;
}

LinearGaussianModel model_from_json(const Json& j) {
  LinearGaussianModel m;
  m.A = matrix_from_json(require(j, "A"));
  m.C = matrix_from_json(require(j, "C"));
  m.Q = matrix_from_json(require(j, "Q"));
  m.R = matrix_from_json(require(j, "R"));
  m.prior_mean = vector_from_json(require(j, "prior_mean"));
  m.prior_cov = matrix_from_json(require(j, "prior_cov"));
  m.validate();
  return m;
}

Json to_json(const EngagementTrace& trace) {
  Json j;
  j["seed"] = trace.seed;
  j["initial_state"] = to_json(trace.initial_state);
  j["states"] = list_to_json(trace.states);
  j["observations"] = list_to_json(trace.observations);
  j["adversary_means"] = list_to_json(trace.adversary_means);
  j["adversary_covs"] = list_to_json(trace.adversary_covs);
  j["actions"] = list_to_json(trace.actions);
  return j;
}

EngagementTrace trace_from_json(const Json& j) {
  EngagementTrace t;
  const Json& seed = require(j, "seed");
  if (!seed.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
  t.seed = seed.get<std::uint64_t>();
  t.initial_state = vector_from_json(require(j, "initial_state"));
  t.states = list_from_json<Vector>(require(j, "states"), vector_from_json);
  t.observations = list_from_json<Vector>(require(j, "observations"), vector_from_json);
  t.adversary_means = list_from_json<Vector>(require(j, "adversary_means"), vector_from_json);
  t.adversary_covs = list_from_json<Matrix>(require(j, "adversary_covs"), matrix_from_json);
  t.actions = list_from_json<Vector>(require(j, "actions"), vector_from_json);
  t.validate();
  return t;
}

Json to_json(const std::vector<GaussianBelief>& beliefs) {
  Json a = Json::array();
  for (const auto& b : beliefs) {
    Json e;
    e["mean"] = to_json(b.mean());
    e["cov"] = to_json(b.cov());
    a.push_back(std::move(e));
  }
  return a;
}

std::vector<GaussianBelief> beliefs_from_json(const Json& j) {
  return list_from_json<GaussianBelief>(j, [](const Json& e) {
    return GaussianBelief(vector_from_json(require(e, "mean")), matrix_from_json(require(e, "cov")));
  });
}

void write_trace_csv(std::ostream& out, const EngagementTrace& trace,
                     const std::vector<GaussianBelief>* beliefs) {
  const std::size_t n = trace.horizon();
  if (beliefs && beliefs->size() != n) throw ConfigError("belief sequence length differs from the trace");
  const Eigen::Index xd = trace.initial_state.size();
  const Eigen::Index yd = n ? trace.observations[0].size() : 0;
  const Eigen::Index ad = n ? trace.actions[0].size() : 0;
  out << 'k';
  put_header(out, "x_", xd);
  put_header(out, "y_", yd);
  put_header(out, "xhat_", xd);
  put_header(out, "sigma_diag_", xd);
  put_header(out, "a_", ad);
  if (beliefs) {
    put_header(out, "xhathat_", xd);
    put_header(out, "sigmabar_diag_", xd);
  }
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << i + 1;
    put_vector(out, trace.states[i]);
    put_vector(out, trace.observations[i]);
    put_vector(out, trace.adversary_means[i]);
    put_vector(out, trace.adversary_covs[i].diagonal());
    put_vector(out, trace.actions[i]);
    if (beliefs) {
      put_vector(out, (*beliefs)[i].mean());
      put_vector(out, (*beliefs)[i].cov().diagonal());
    }
    out << '\n';
  }
}

void write_rp_csv(std::ostream& out, const RPDataset& dataset) {
  const Eigen::Index m = dataset.dim();
  out << 'n';
  put_header(out, "alpha_", m);
  put_header(out, "beta_", m);
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << i + 1;
    put_vector(out, dataset.probes[i]);
    put_vector(out, dataset.responses[i]);
    out << '\n';
  }
}

RPDataset read_rp_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty revealed-preference CSV");
  const auto header = split(line);
  if (header.size() < 3 || (header.size() - 1) % 2 != 0 || header[0] != "n") {
    throw ConfigError("header must be n, alpha_1..alpha_m, beta_1..beta_m");
  }
  const std::size_t m = (header.size() - 1) / 2;
  for (std::size_t i = 1; i <= m; ++i) {
    if (header[i] != "alpha_" + std::to_string(i) || header[m + i] != "beta_" + std::to_string(i)) {
      throw ConfigError("header must be n, alpha_1..alpha_m, beta_1..beta_m");
    }
  }
  RPDataset d;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " columns");
    }
    Vector a(static_cast<Eigen::Index>(m)), b(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      a(static_cast<Eigen::Index>(i)) = parse_cell(cells[1 + i], lineno);
      b(static_cast<Eigen::Index>(i)) = parse_cell(cells[1 + m + i], lineno);
    }
    d.probes.push_back(std::move(a));
    d.responses.push_back(std::move(b));
  }
  d.validate();
  return d;
}

Json budget_to_json(const BudgetSpec& budget) {
  Json j;
  if (const auto* lin = std::get_if<LinearBudget>(&budget)) {
    j["type"] = "linear";
    j["p_star"] = lin->p_star;
  } else if (const auto* s = std::get_if<SinrBudget>(&budget)) {
    j["type"] = "sinr";
    j["Q"] = to_json(s->Q);
    j["p_builder"] = "diagonal";
    j["ridge"] = s->ridge;
    j["gamma"] = s->gamma;
    j["delta"] = s->delta;
    j["orientation"] = s->orientation == SinrOrientation::RadarThreshold ? "radar_threshold" : "ray_monotone";
  } else {
    throw ConfigError("callable budgets cannot be serialized");
  }
  return j;
}

BudgetSpec budget_from_json(const Json& j) {
  const Json& type = require(j, "type");
  if (type == "linear") {
    LinearBudget b;
    if (j.contains("p_star")) b.p_star = number(j.at("p_star"));
    return b;
  }
  if (type == "sinr") {
    SinrBudget b;
    b.Q = matrix_from_json(require(j, "Q"));
    if (j.contains("p_builder") && j.at("p_builder") != "diagonal") {
      throw ConfigError("only the diagonal P builder can be read from JSON");
    }
    if (j.contains("ridge")) b.ridge = number(j.at("ridge"));
    b.p_builder = diagonal_p_builder(b.ridge);
    if (j.contains("gamma")) b.gamma = number(j.at("gamma"));
    if (j.contains("delta")) b.delta = number(j.at("delta"));
    if (j.contains("orientation")) {
      const Json& o = j.at("orientation");
      if (o == "radar_threshold") {
        b.orientation = SinrOrientation::RadarThreshold;
      } else if (o == "ray_monotone") {
        b.orientation = SinrOrientation::RayMonotone;
      } else {
        throw ConfigError("unknown SINR orientation " + o.dump());
      }
    }
    return b;
  }
  throw ConfigError("unknown budget type " + type.dump());
}

Json to_json(const AfriatCertificate& cert) {
  Json j;
  j["u"] = cert.u;
  j["lambda"] = cert.lambda;
  j["residual"] = cert.residual;
  return j;
}

AfriatCertificate certificate_from_json(const Json& j) {
  AfriatCertificate c;
  c.u = list_from_json<double>(require(j, "u"), number);
  c.lambda = list_from_json<double>(require(j, "lambda"), number);
  c.residual = number(require(j, "residual"));
  if (c.u.size() != c.lambda.size()) throw ConfigError("certificate u and lambda differ in length");
  return c;
}

}  // namespace radarkit::io
