#pragma once

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace radarkit::app {

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  bool infeasible = false;  // an interference design found no feasible r
  std::string note;
};

/// Runs one experiment in memory. Throws radarkit errors unchanged.
RunResult run_experiment(const ExperimentConfig& config);

struct Preset {
  std::string name;
  std::string description;
  Json config;
};

/// Shipped presets in a fixed order.
const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInfeasible = 4;

/// Full command-line entry point (`run`, `presets`).
int cli_main(int argc, char** argv);

/// Runs `config`, writes artifacts plus manifest.json into its output_dir and
/// returns the exit status. Failures write errors.json instead of artifacts.
int execute(const Json& raw_config, const std::string* out_override, const std::uint64_t* seed_override);

}  // namespace radarkit::app
