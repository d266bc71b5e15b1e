#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otstab/error.hpp"
#include "otstab/stability.hpp"

namespace otstab {

inline constexpr int kFormatVersion = 1;

struct ExperimentConfig {
  Family family = Family::rotating;
  int d = 2;
  double R = 2.0;
  double delta = 0.5;
  int N = 20;
  std::vector<double> theta_grid;
  std::vector<int> indices;
  double p = 2.0;
  std::vector<double> alphas;
  std::uint64_t samples = 1'000'000;
  std::uint64_t small_theta_samples = 10'000'000;
  double small_theta = 1e-5;
  bool cell_monte_carlo = false;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::optional<std::string> instance_file;
  // semi-discrete solves
  std::uint64_t train_samples = 20'000;
  std::uint64_t validation_samples = 100'000;
  std::vector<double> sdot_thetas;
  std::vector<int> sdot_cells;  ///< 0 = unperturbed target
  // witness search
  double witness_C = 1e3;
  double witness_alpha = 0.4;
  double witness_p = 2.0;
  int max_index = 1'000'000;
  std::uint64_t witness_samples = 1'000'000;
};

/// Family defaults: grids, exponents and budgets used when a field is absent.
ExperimentConfig default_config(Family f);

/// Reads a config document over the family defaults. Unknown keys and type
/// mismatches throw config errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Canonical form, without the output directory.
nlohmann::json to_json(const ExperimentConfig& c);
/// FNV-1a of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Checks shared by all commands; throws config errors.
void validate_config(const ExperimentConfig& c);

/// One output file: relative name and full contents.
struct OutputFile {
  std::string name;
  std::string contents;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<OutputFile> files;
  std::string message;  ///< one-line summary for stderr/stdout
};

/// The commands compute everything in memory; nothing touches the disk.
/// Config and validation problems throw (exit 1); numerical failures that
/// leave a report return exit code 2.
CommandResult cmd_verify_maps(const ExperimentConfig& c);
CommandResult cmd_sweep(const ExperimentConfig& c);
CommandResult cmd_solve_sdot(const ExperimentConfig& c);
CommandResult cmd_witness(const ExperimentConfig& c);
CommandResult cmd_validate_instance(const ExperimentConfig& c);

/// Writes the files under `dir`, each through a temporary and a rename.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files);

/// 1 for config/validation error kinds, 2 for numerical ones.
int exit_code_for(ErrorKind kind);

}  // namespace otstab
