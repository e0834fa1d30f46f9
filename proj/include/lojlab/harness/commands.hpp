#pragma once

// Subcommands of the lojlab command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lojlab::harness {

enum ExitCode : int {
  kExitPass = 0,
  kExitSuiteFailure = 1,
  kExitViolation = 2,
  kExitHypothesis = 3,
  kExitUsage = 64,
};

struct GlobalOptions {
  std::filesystem::path out = "lojlab-out";
  std::uint64_t seed = 20240917;
  bool quiet = false;
};

struct SeqCheckArgs {
  std::optional<std::filesystem::path> file;
  bool geometric = false;
  bool extremal = false;
  bool random = false;
  double C = 1.0;
  double tau = 0.5;
  double x1 = 1.0;
  std::size_t n = 40;
  bool terminal_zero = false;
};

struct GradFlowArgs {
  std::string problem;
  std::vector<double> x0;
  double t_end = 1e13;
  double tol = 1e-10;
  double epsilon = 0.01;
  bool check_envelope = false;
};

struct FlowArgs {
  std::filesystem::path config;
  bool fit = false;
  bool close = false;
};

int cmd_seq_check(const GlobalOptions& g, const SeqCheckArgs& a, std::ostream& log);
int cmd_grad_flow(const GlobalOptions& g, const GradFlowArgs& a, std::ostream& log);
/// Evolves the configured flow (or amplitude sweep); fit and close are also
/// enabled by `fit = true` / `close = true` in the config.
int cmd_mcf(const GlobalOptions& g, const FlowArgs& a, std::ostream& log);
int cmd_fit(const GlobalOptions& g, const std::filesystem::path& config, std::ostream& log);
int cmd_close(const GlobalOptions& g, const std::filesystem::path& config, std::ostream& log);
/// Runs the acceptance suite on the bundled configs; writes manifest.json and
/// timings.json under the output directory.
int cmd_verify_all(const GlobalOptions& g, std::ostream& log);

}  // namespace lojlab::harness
