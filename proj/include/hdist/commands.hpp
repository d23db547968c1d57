// Subcommands of the command-line tool. Each writes its reports into the
// output directory and returns the process exit code.

#ifndef HDIST_COMMANDS_HPP
#define HDIST_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace hdist {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitPass = 0,
  kExitInput = 2,
  kExitValidation = 3,
  kExitPipeline = 4,
  kExitDynamics = 5,
};

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  int window = 12;
  int samples = 0;  // 0 selects the subcommand default
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  double tol = 1e-8;
  int n_max = 12;
};

/// FNV-1a over the canonical configuration and the input file bytes.
std::uint64_t config_hash(const RunConfig& cfg);

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int cmd_resonance(const RunConfig& cfg, std::ostream& out);
int cmd_normalize(const RunConfig& cfg, std::ostream& out);
int cmd_theorem_a(const RunConfig& cfg, std::ostream& out);
int cmd_repelling(const RunConfig& cfg, std::ostream& out);

}  // namespace hdist

#endif  // HDIST_COMMANDS_HPP
