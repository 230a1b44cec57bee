#include "config.hpp"

#include <algorithm>
#include <set>
#include <type_traits>

#include "radarkit/errors.hpp"

namespace radarkit::app {
namespace {

template <class T>
struct has_visit {
 private:
  struct probe {
    template <class K, class F>
    void operator()(const K&, F&) {}
  };
  template <class U>
  static auto test(int) -> decltype(std::declval<U&>().visit(std::declval<probe&>()), std::true_type{});
  template <class>
  static std::false_type test(...);

 public:
  static constexpr bool value = decltype(test<T>(0))::value;
};

class Reader;

template <class T>
void read_value(const Json& j, T& out, const std::string& path);

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void operator()(const char* key, T& field) {
    known_.insert(key);
    if (j_.contains(key)) read_value(j_.at(key), field, path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!known_.count(it.key())) throw ConfigError("unknown key " + path_ + "." + it.key());
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> known_;
};

double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

template <class T>
void read_value(const Json& j, T& out, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
      out = j.get<bool>();
    } else if constexpr (std::is_same_v<T, double>) {
      out = read_number(j, path);
    } else if constexpr (std::is_same_v<T, int>) {
      if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
      out = j.get<int>();
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      const bool ok = j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
      if (!ok) throw ConfigError(path + ": expected a nonnegative integer");
      out = j.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(path + ": expected a string");
      out = j.get<std::string>();
    } else if constexpr (std::is_same_v<T, Vector>) {
      out = io::vector_from_json(j);
    } else if constexpr (std::is_same_v<T, Matrix>) {
      out = io::matrix_from_json(j);
    } else if constexpr (std::is_same_v<T, CMatrix>) {
      out = io::cmatrix_from_json(j);
    } else if constexpr (has_visit<T>::value) {
      Reader r(j, path);
      out.visit(r);
      r.finish();
    } else {
      if (!j.is_array()) throw ConfigError(path + ": expected an array");
      out.clear();
      for (std::size_t i = 0; i < j.size(); ++i) {
        typename T::value_type e{};
        read_value(j[i], e, path + "[" + std::to_string(i) + "]");
        out.push_back(std::move(e));
      }
    }
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0 || what.rfind("unknown key", 0) == 0) throw;
    throw ConfigError(path + ": " + what);
  }
}

template <class T>
Json write_value(const T& v);

class Writer {
 public:
  template <class T>
  void operator()(const char* key, T& field) {
    j[key] = write_value(field);
  }
  Json j = Json::object();
};

template <class T>
Json write_value(const T& v) {
  if constexpr (std::is_same_v<T, Vector> || std::is_same_v<T, Matrix> || std::is_same_v<T, CMatrix>) {
    return io::to_json(v);
  } else if constexpr (has_visit<T>::value) {
    Writer w;
    T copy = v;
    copy.visit(w);
    return w.j;
  } else if constexpr (std::is_same_v<T, std::string> || std::is_arithmetic_v<T>) {
    return Json(v);
  } else {
    Json a = Json::array();
    for (const auto& e : v) a.push_back(write_value(e));
    return a;
  }
}

ModelParams target(double q_scale) {
  ModelParams m;
  m.A = (Matrix(2, 2) << 1.0, 1.0, 0.0, 1.0).finished();
  m.C = (Matrix(1, 2) << 1.0, 0.0).finished();
  m.Q = q_scale * (Matrix(2, 2) << 1.0 / 3.0, 0.5, 0.5, 1.0).finished();
  m.R = Matrix::Identity(1, 1);
  m.prior_mean = Vector::Zero(2);
  m.prior_cov = Matrix::Identity(2, 2);
  return m;
}

template <std::size_t I = 0>
KindParams default_params(std::size_t index) {
  if constexpr (I < std::variant_size_v<KindParams>) {
    if (index == I) return KindParams(std::in_place_index<I>);
    return default_params<I + 1>(index);
  } else {
    throw ConfigError("unknown kind index");
  }
}

}  // namespace

LinearGaussianModel ModelParams::model() const {
  LinearGaussianModel m;
  m.A = A;
  m.C = C;
  m.Q = Q;
  m.R = R;
  m.prior_mean = prior_mean;
  m.prior_cov = prior_cov;
  m.validate();
  return m;
}

ActionMap ActionParams::action_map() const {
  ActionMap am;
  if (phi == "identity") {
    am.kind = PhiKind::Identity;
  } else if (phi == "inverse_trace_scaled") {
    am.kind = PhiKind::InverseTraceScaled;
  } else {
    throw ConfigError("action.phi must be \"identity\" or \"inverse_trace_scaled\"");
  }
  am.action_noise_var = action_noise_var;
  am.validate();
  return am;
}

std::vector<ModelParams> RpLinearParams::default_targets() { return {target(1.0), target(2.0), target(0.5)}; }

MimoChannel ChannelParams::channel() const {
  MimoChannel ch;
  ch.I = I;
  ch.J = J;
  ch.K = K;
  ch.H_t = H_t;
  ch.H_c = H_c;
  ch.radar_noise_var = radar_noise_var;
  ch.our_noise_var = our_noise_var;
  ch.validate();
  return ch;
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names{"InverseKF", "ParticleVsKF", "MleGain",
                                              "Sensitivity", "Crb", "RpLinear",
                                              "RpSinr", "WaveformOpt", "InterferenceDesign"};
  return names;
}

ProbeLag lag_from_string(const std::string& name) {
  if (name == "one_step") return ProbeLag::OneStep;
  if (name == "simultaneous") return ProbeLag::Simultaneous;
  throw ConfigError("lag must be \"one_step\" or \"simultaneous\"");
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "kind" && k != "seed" && k != "output_dir" && k != "params") {
      throw ConfigError("unknown key " + k);
    }
  }
  ExperimentConfig c;
  if (!j.contains("kind")) throw ConfigError("missing key kind");
  read_value(j.at("kind"), c.kind, "kind");
  const auto& names = kind_names();
  const auto pos = std::find(names.begin(), names.end(), c.kind);
  if (pos == names.end()) throw ConfigError("unknown kind \"" + c.kind + "\"");
  if (j.contains("seed")) read_value(j.at("seed"), c.seed, "seed");
  if (j.contains("output_dir")) read_value(j.at("output_dir"), c.output_dir, "output_dir");
  c.params = default_params(static_cast<std::size_t>(pos - names.begin()));
  const Json empty = Json::object();
  const Json& p = j.contains("params") ? j.at("params") : empty;
  std::visit([&](auto& params) { read_value(p, params, "params"); }, c.params);
  return c;
}

Json to_json(const ExperimentConfig& config) {
  Json j;
  j["kind"] = config.kind;
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;
  j["params"] = std::visit([](const auto& params) { return write_value(params); }, config.params);
  return j;
}

}  // namespace radarkit::app
