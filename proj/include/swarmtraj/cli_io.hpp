#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmtraj/activations.hpp"
#include "swarmtraj/icdab.hpp"
#include "swarmtraj/lm_trainer.hpp"
#include "swarmtraj/swarm_gen.hpp"

namespace swarmtraj::cli {

/// Process exit codes; stable across releases.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kNumeric = 3,
};

/// Everything a subcommand may need. Built from an optional JSON config file,
/// then overridden by command-line flags.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  GenConfig gen;
  TrainConfig train;
  IcdabConfig icdab;
  std::vector<ActivationSpec> activations;
  std::vector<Axis> axes;
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::filesystem::path out;
  std::filesystem::path csv;
  std::string split = "test";
  std::vector<double> radii;
};

/// Reads the JSON config layout documented in the README.
RunConfig load_run_config(const std::filesystem::path& path);
void apply_run_config(const nlohmann::json& j, RunConfig& config);

int cmd_generate(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_eval(const RunConfig& config, std::ostream& log);
int cmd_deconflict(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Full command line: parses, dispatches and maps errors onto ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// File helpers shared by the commands. Failures raise IoError.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);
SwarmDataset read_dataset(const std::filesystem::path& path);

}  // namespace swarmtraj::cli
