// lojlab: sequence certificates, model gradient flows and rescaled MCF
// experiments from the command line.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "lojlab/errors.hpp"
#include "lojlab/harness/commands.hpp"

namespace {

using namespace lojlab;
using namespace lojlab::harness;

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0) throw UsageError("--x0: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--x0 is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lojasiewicz-type certificates for gradient flows and rescaled mean curvature flow"};
  app.require_subcommand(1);

  GlobalOptions global;
  std::string out_dir = global.out.string();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", global.seed, "Seed for randomized checks")->capture_default_str();
  app.add_flag("--quiet", global.quiet, "Suppress progress output");

  SeqCheckArgs seq_args;
  std::string seq_file;
  auto* seq_cmd = app.add_subcommand("seq-check", "Check the discrete hypothesis and certify the square-root sum");
  seq_cmd->add_option("--file", seq_file, "Sequence as a JSON array or whitespace-separated numbers");
  seq_cmd->add_flag("--geometric", seq_args.geometric, "Use x_j = 2^-j");
  seq_cmd->add_flag("--extremal", seq_args.extremal, "Use the extremal sequence from --x1");
  seq_cmd->add_flag("--random", seq_args.random, "Use a random admissible sequence");
  seq_cmd->add_option("--C", seq_args.C, "Constant C >= 1")->capture_default_str();
  seq_cmd->add_option("--tau", seq_args.tau, "Exponent in (1/3, 1)")->capture_default_str();
  seq_cmd->add_option("--x1", seq_args.x1, "First term for --extremal")->capture_default_str();
  seq_cmd->add_option("--n", seq_args.n, "Sequence length")->capture_default_str();
  seq_cmd->add_flag("--terminal-zero", seq_args.terminal_zero, "Close the sequence off with a zero");

  GradFlowArgs flow_args;
  std::string x0_text;
  auto* flow_cmd = app.add_subcommand("grad-flow", "Integrate a builtin gradient flow and bound its length");
  flow_cmd->add_option("--problem", flow_args.problem, "quartic1d, sextic1d, quartic2d, aniso2d or saddle2d")
      ->required();
  flow_cmd->add_option("--x0", x0_text, "Start point, comma separated")->required();
  flow_cmd->add_option("--t-end", flow_args.t_end, "Final time")->capture_default_str();
  flow_cmd->add_option("--tol", flow_args.tol, "Integrator tolerance")->capture_default_str();
  flow_cmd->add_option("--epsilon", flow_args.epsilon, "Level closeness for the endpoints")->capture_default_str();
  flow_cmd->add_flag("--check-envelope", flow_args.check_envelope, "Check the algebraic decay envelope");

  FlowArgs mcf_args;
  std::string mcf_config;
  auto* mcf_cmd = app.add_subcommand("mcf", "Evolve a rescaled MCF run (or sweep) from a config");
  mcf_cmd->add_option("config", mcf_config, "Config file")->required();
  mcf_cmd->add_flag("--fit", mcf_args.fit, "Also fit the Lojasiewicz constants");
  mcf_cmd->add_flag("--close", mcf_args.close, "Also run the closeness experiment");

  std::string fit_config, close_config;
  auto* fit_cmd = app.add_subcommand("fit", "Fit Lojasiewicz constants along a flow");
  fit_cmd->add_option("config", fit_config, "Config file")->required();
  auto* close_cmd = app.add_subcommand("close", "Closeness experiment with certificates");
  close_cmd->add_option("config", close_config, "Config file")->required();

  auto* verify_cmd = app.add_subcommand("verify-all", "Run the acceptance suite on the bundled configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  global.out = out_dir;
  std::ostream& log = std::cerr;
  try {
    if (*seq_cmd) {
      if (!seq_file.empty()) seq_args.file = seq_file;
      return cmd_seq_check(global, seq_args, log);
    }
    if (*flow_cmd) {
      flow_args.x0 = parse_point(x0_text);
      return cmd_grad_flow(global, flow_args, log);
    }
    if (*mcf_cmd) {
      mcf_args.config = mcf_config;
      return cmd_mcf(global, mcf_args, log);
    }
    if (*fit_cmd) return cmd_fit(global, fit_config, log);
    if (*close_cmd) return cmd_close(global, close_config, log);
    if (*verify_cmd) return cmd_verify_all(global, log);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << " error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Precondition || e.kind() == ErrorKind::InsufficientData ? kExitHypothesis
                                                                                          : kExitSuiteFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSuiteFailure;
  }
  return kExitUsage;
}
