#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "radarkit/errors.hpp"

namespace radarkit::app {
namespace {

namespace fs = std::filesystem;

Json preset_config(const char* kind, std::uint64_t seed, const char* name, Json params = Json::object()) {
  return Json{{"kind", kind}, {"seed", seed}, {"output_dir", std::string("radarkit_out/") + name}, {"params", params}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_errors(const fs::path& dir, int code, const std::string& type, const std::string& message) {
  try {
    fs::create_directories(dir);
    const Json j{{"exit_code", code}, {"error", type}, {"message", message}};
    write_file(dir / "errors.json", j.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "radarkit: could not record errors.json: " << e.what() << "\n";
  }
}

std::string fallback_dir(const Json& raw, const std::string* out_override) {
  if (out_override) return *out_override;
  if (raw.is_object() && raw.contains("output_dir") && raw.at("output_dir").is_string()) {
    return raw.at("output_dir").get<std::string>();
  }
  return ".";
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list{
      {"fig3", "MLE of the adversary's gain: classic vs inverse likelihood curves over C in (0,10]",
       preset_config("MleGain", 2024, "fig3")},
      {"table1_pattern", "Sensitivity of the likelihood curvature to Q and R at C=2.5 and C=3.5",
       preset_config("Sensitivity", 77, "table1_pattern")},
      {"table2_pattern", "Cramer-Rao bounds on the gain, classic vs inverse, at C in {0.5,1.5,2,3}",
       preset_config("Crb", 5, "table2_pattern")},
      {"rp_beam", "Revealed-preference test of a beam-allocating radar with dwell-time coupling",
       preset_config("RpLinear", 11, "rp_beam", Json{{"dwell_coupling", true}})},
      {"rp_sinr", "Nonlinear revealed-preference test under an SINR budget",
       preset_config("RpSinr", 13, "rp_sinr")},
      {"fig5", "Chance-constrained smart interference: probability sweep and r*(delta, epsilon)",
       preset_config("InterferenceDesign", 5, "fig5")},
  };
  return list;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset \"" + name + "\"");
}

int execute(const Json& raw, const std::string* out_override, const std::uint64_t* seed_override) {
  std::string dir = fallback_dir(raw, out_override);
  try {
    ExperimentConfig config = parse_config(raw);
    if (out_override) config.output_dir = *out_override;
    if (seed_override) config.seed = *seed_override;
    dir = config.output_dir;

    const RunResult result = run_experiment(config);

    const fs::path out(config.output_dir);
    fs::create_directories(out);
    fs::remove(out / "errors.json");
    for (const auto& a : result.artifacts) write_file(out / a.name, a.content);
    write_file(out / "manifest.json", to_json(config).dump(2) + "\n");
    if (result.infeasible) {
      write_errors(out, kExitInfeasible, "Infeasible", result.note);
      std::cerr << "radarkit: " << result.note << "\n";
      return kExitInfeasible;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    write_errors(dir, kExitValidation, "ConfigError", e.what());
    std::cerr << "radarkit: configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    write_errors(dir, kExitValidation, "ValidationError", e.what());
    std::cerr << "radarkit: validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    write_errors(dir, kExitNumerical, "NumericalError", e.what());
    std::cerr << "radarkit: numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    write_errors(dir, kExitNumerical, "Error", e.what());
    std::cerr << "radarkit: error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cli_main(int argc, char** argv) {
  CLI::App app{"radarkit: inverse tracking, revealed preference and smart interference experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config or a shipped preset");
  std::string config_path, preset_name, out_dir;
  std::uint64_t seed = 0;
  auto* opt_config = run->add_option("--config", config_path, "Path to an experiment config (JSON)");
  auto* opt_preset = run->add_option("--preset", preset_name, "Name of a shipped preset");
  opt_config->excludes(opt_preset);
  auto* opt_seed = run->add_option("--seed", seed, "Override the config seed");
  auto* opt_out = run->add_option("--out", out_dir, "Override the output directory");

  auto* list = app.add_subcommand("presets", "List shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (list->parsed()) {
    for (const auto& p : presets()) std::cout << p.name << "\t" << p.description << "\n";
    return kExitOk;
  }

  const std::string* out = *opt_out ? &out_dir : nullptr;
  const std::uint64_t* seed_ptr = *opt_seed ? &seed : nullptr;
  if (*opt_preset) {
    try {
      return execute(find_preset(preset_name).config, out, seed_ptr);
    } catch (const ConfigError& e) {
      std::cerr << "radarkit: " << e.what() << "\n";
      write_errors(out ? *out : ".", kExitValidation, "ConfigError", e.what());
      return kExitValidation;
    }
  }
  if (!*opt_config) {
    std::cerr << "radarkit: run needs --config or --preset\n";
    return kExitValidation;
  }
  Json raw;
  std::ifstream in(config_path);
  if (!in) {
    const std::string msg = "cannot open config \"" + config_path + "\"";
    std::cerr << "radarkit: " << msg << "\n";
    write_errors(out ? *out : ".", kExitValidation, "ConfigError", msg);
    return kExitValidation;
  }
  try {
    raw = Json::parse(in);
  } catch (const Json::parse_error& e) {
    std::cerr << "radarkit: malformed JSON: " << e.what() << "\n";
    write_errors(out ? *out : ".", kExitValidation, "ConfigError", std::string("malformed JSON: ") + e.what());
    return kExitValidation;
  }
  return execute(raw, out, seed_ptr);
}

}  // namespace radarkit::app
