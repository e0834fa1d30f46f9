#include "lojlab/harness/commands.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "lojlab/errors.hpp"
#include "lojlab/harness/config.hpp"
#include "lojlab/harness/reports.hpp"
#include "lojlab/harness/suite.hpp"
#include "lojlab/kernels/kernels.hpp"
#include "runs.hpp"

namespace lojlab::harness {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json versions() {
  return json{{"lojlab", kVersion}, {"kernels", kernels::to_string(kernels::active().backend)}};
}

struct CheckList {
  json items = json::array();
  bool violation = false;
  bool hypothesis = false;
  bool other = false;

  void add(const std::string& name, bool passed, json measured, ExitCode on_fail) {
    items.push_back({{"check", name}, {"passed", passed}, {"measured", std::move(measured)}});
    if (passed) return;
    if (on_fail == kExitViolation) violation = true;
    else if (on_fail == kExitHypothesis) hypothesis = true;
    else other = true;
  }

  int exit_code() const {
    if (violation) return kExitViolation;
    if (hypothesis) return kExitHypothesis;
    if (other) return kExitSuiteFailure;
    return kExitPass;
  }
};

json config_echo(const KeyValueConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

void write_profile(const std::filesystem::path& p, const cyl::CylinderGraph& g) {
  std::ostringstream s;
  cyl::write_profile_csv(s, g);
  write_atomic(p, s.str());
}

// Shared body of mcf, fit and close.
int flow_command(const GlobalOptions& g, const std::filesystem::path& config_path, bool fit, bool close,
                 std::ostream& log) {
  const KeyValueConfig cfg = KeyValueConfig::load(config_path);
  const auto configs = expand_sweep(cfg);
  fit = fit || cfg.get_bool("fit", false);
  close = close || cfg.get_bool("close", false);
  const std::string base = cfg.get_string("name", config_path.stem().string());
  const bool sweep = cfg.has("amplitudes");

  CheckList checks;
  json runs = json::array();
  struct TrendPoint {
    double dF1, max_dist;
  };
  std::vector<TrendPoint> trend;

  for (const auto& c : configs) {
    const FlowRun run = run_flow(c, run_label(base, c, sweep));
    json rj;
    rj["label"] = run.label;
    rj["amplitude"] = c.profile.amplitude;
    if (!run.history) {
      rj["exit"] = "blow-up";
      rj["detail"] = run.failure;
      checks.add(run.label + ": flow defined on [0, t2]", false, run.failure, kExitHypothesis);
      runs.push_back(rj);
      continue;
    }
    const auto& hist = *run.history;
    std::ostringstream csv;
    write_history_csv(csv, hist, c.R1, c.R2);
    write_atomic(g.out / (run.label + "_history.csv"), csv.str());
    write_profile(g.out / (run.label + "_profile_initial.csv"), hist.states.front().graph);
    write_profile(g.out / (run.label + "_profile_final.csv"), hist.states.back().graph);

    rj["exit"] = mcf::to_string(hist.exit);
    rj["exit_detail"] = hist.exit_detail;
    rj["t_reached"] = hist.t_last();
    rj["steps"] = hist.steps.size();
    rj["rejected_steps"] = hist.rejected_steps;
    rj["F_cylinder"] = hist.F_cylinder;

    const double inc = max_unit_increase(hist);
    checks.add(run.label + ": F non-increasing at unit marks", inc <= 1e-8, inc, kExitViolation);
    if (c.profile.kind == mcf::ProfileKind::Zero || c.profile.amplitude == 0.0) {
      double dev = 0.0;
      for (double f : hist.F_series) dev = std::max(dev, std::abs(f - hist.F_series.front()));
      checks.add(run.label + ": F constant on the cylinder", dev <= 1e-8, dev, kExitViolation);
    }
    if (hist.exit != mcf::ExitReason::Completed) {
      checks.add(run.label + ": flow stays near the cylinder", false, hist.exit_detail, kExitHypothesis);
    }

    if (fit && !close) {
      try {
        const auto f = mcf::lojasiewicz_fit(hist, c.fit);
        const json fj = to_json(f);
        write_atomic(g.out / (run.label + "_fit.json"), dump(fj));
        checks.add(run.label + ": fit slack >= 0", fj["min_slack"].get<double>() >= 0.0, fj["min_slack"],
                   kExitViolation);
      } catch (const InsufficientDataError& e) {
        checks.add(run.label + ": fit windows", false, e.what(), kExitHypothesis);
      }
    }
    if (close) {
      const auto rep = mcf::close_from_history(c, hist);
      const json cj = to_json(rep);
      write_atomic(g.out / (run.label + "_close.json"), dump(cj));
      if (!rep.fit.windows.empty()) write_atomic(g.out / (run.label + "_fit.json"), dump(to_json(rep.fit)));
      checks.add(run.label + ": closeness hypotheses", rep.hypotheses_ok, cj["hypotheses"], kExitHypothesis);
      if (rep.hypotheses_ok) {
        checks.add(run.label + ": certificates", rep.certificates_ok, rep.sqrt_sum, kExitViolation);
        checks.add(run.label + ": distance bound", rep.bound_holds,
                   json{{"max_dist_R2", rep.max_dist}, {"bound", rep.bound_value}}, kExitViolation);
        trend.push_back({std::abs(rep.dF1), rep.max_dist});
      }
      rj["case"] = flows::to_string(rep.tag);
      rj["max_dist_R2"] = rep.max_dist;
      rj["dF1"] = rep.dF1;
    }
    runs.push_back(rj);
    if (!g.quiet) log << run.label << ": " << mcf::to_string(hist.exit) << " at t = " << hist.t_last() << '\n';
  }

  if (sweep && close && trend.size() == configs.size()) {
    std::sort(trend.begin(), trend.end(), [](auto a, auto b) { return a.dF1 > b.dF1; });
    bool ok = true;
    json pts = json::array();
    for (std::size_t i = 0; i < trend.size(); ++i) {
      pts.push_back({{"abs_dF1", trend[i].dF1}, {"max_dist_R2", trend[i].max_dist}});
      if (i > 0 && trend[i].max_dist > trend[i - 1].max_dist) ok = false;
    }
    checks.add("distance non-increasing as |F(t1) - F(C)| decreases", ok, pts, kExitSuiteFailure);
  }

  json manifest;
  manifest["command"] = close ? "close" : (fit ? "fit" : "mcf");
  manifest["config"] = config_echo(cfg);
  manifest["seed"] = g.seed;
  manifest["versions"] = versions();
  manifest["runs"] = runs;
  manifest["checks"] = checks.items;
  write_atomic(g.out / (base + "_manifest.json"), dump(manifest));
  const int code = checks.exit_code();
  if (!g.quiet) log << base << ": exit " << code << '\n';
  return code;
}

}  // namespace

int cmd_seq_check(const GlobalOptions& g, const SeqCheckArgs& a, std::ostream& log) {
  const int sources = (a.file ? 1 : 0) + a.geometric + a.extremal + a.random;
  if (sources != 1) throw UsageError("give exactly one of --file, --geometric, --extremal, --random");
  if (a.n < 1) throw UsageError("--n must be positive");
  try {
    seq::validate_parameters(a.C, a.tau);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }

  std::optional<seq::MonotoneSequence> s;
  std::string source;
  if (a.file) {
    source = "file";
    try {
      s = seq::parse_sequence(read_file(*a.file));
    } catch (const InvalidInputError& e) {
      throw UsageError("malformed sequence file: " + std::string(e.what()));
    }
  } else if (a.geometric) {
    source = "geometric";
    std::vector<double> v(a.n);
    for (std::size_t j = 0; j < a.n; ++j) v[j] = std::ldexp(1.0, -static_cast<int>(j + 1));
    s = seq::MonotoneSequence(std::move(v));
  } else if (a.extremal) {
    source = "extremal";
    if (!(a.x1 > 0.0 && a.x1 <= 1.0)) throw UsageError("--x1 must lie in (0, 1]");
    s = seq::extremal_sequence(a.C, a.tau, a.x1, a.n - 1);
  } else {
    source = "random";
    std::mt19937_64 rng(g.seed);
    s = seq::random_admissible(a.C, a.tau, a.n, rng);
  }

  json report;
  report["source"] = source;
  report["length"] = s->size();
  report["x1"] = s->front();
  const auto hyp = seq::check_hypothesis(*s, a.C, a.tau);
  report["hypothesis"] = to_json(hyp);
  int code = hyp.ok() ? kExitPass : kExitViolation;
  if (s->front() <= 1.0) {
    const auto cert = seq::certify(*s, a.C, a.tau, a.terminal_zero);
    report["certificate"] = to_json(cert);
    if (!cert.holds) code = kExitViolation;
  } else {
    report["certificate"] = nullptr;
    report["certificate_skipped"] = "x1 > 1";
  }
  report["seed"] = g.seed;
  write_atomic(g.out / "seq_check.json", dump(report));
  if (!g.quiet) {
    log << "seq-check " << source << ": n = " << s->size() << ", sqrt_diff_sum = " << hyp.sqrt_diff_sum
        << ", hypothesis " << (hyp.ok() ? "ok" : "violated at j = " + std::to_string(*hyp.first_violation))
        << '\n';
  }
  return code;
}

int cmd_grad_flow(const GlobalOptions& g, const GradFlowArgs& a, std::ostream& log) {
  flows::GradientProblem problem;
  try {
    problem = flows::builtin_problem(a.problem);
  } catch (const InvalidInputError& e) {
    throw UsageError(e.what());
  }
  if (a.x0.size() != problem.dimension) {
    throw UsageError("--x0 needs " + std::to_string(problem.dimension) + " comma-separated values");
  }
  const flows::Trajectory traj = flows::integrate(problem, a.x0, a.t_end, a.tol);
  std::ostringstream csv;
  flows::write_trajectory_csv(csv, traj);
  write_atomic(g.out / (a.problem + "_trajectory.csv"), csv.str());

  json report;
  report["problem"] = a.problem;
  report["x0"] = a.x0;
  report["t_end"] = a.t_end;
  report["tol"] = a.tol;
  report["samples"] = traj.size();
  report["exited_ball"] = traj.exited_ball;
  report["length"] = traj.length();
  report["sqrt_sum"] = to_json(flows::sqrt_segment_sum(traj));
  int code = kExitPass;

  if (a.check_envelope) {
    try {
      const bool ok = flows::decay_envelope_check(traj, problem.tau);
      report["envelope"] = {{"holds", ok}};
      if (!ok) code = kExitViolation;
    } catch (const EnvelopeNotApplicableError& e) {
      report["envelope"] = {{"holds", nullptr}, {"detail", e.what()}};
    }
  }

  const auto mark = flows::last_admissible_mark(traj, a.epsilon);
  if (!mark) {
    report["effective_bound"] = {{"error", "no unit mark satisfies the endpoint conditions"}};
    if (code == kExitPass) code = kExitHypothesis;
  } else {
    try {
      const auto rep = flows::effective_bound(problem, flows::truncated_at_mark(traj, *mark), a.epsilon);
      report["effective_bound"] = to_json(rep);
      if (!rep.holds || !rep.certificates_ok) code = kExitViolation;
    } catch (const PreconditionError& e) {
      report["effective_bound"] = {{"error", e.what()}};
      if (code == kExitPass) code = kExitHypothesis;
    }
  }
  write_atomic(g.out / "grad_flow.json", dump(report));
  if (!g.quiet) log << "grad-flow " << a.problem << ": length = " << traj.length() << ", exit " << code << '\n';
  return code;
}

int cmd_mcf(const GlobalOptions& g, const FlowArgs& a, std::ostream& log) {
  return flow_command(g, a.config, a.fit, a.close, log);
}

int cmd_fit(const GlobalOptions& g, const std::filesystem::path& config, std::ostream& log) {
  return flow_command(g, config, true, false, log);
}

int cmd_close(const GlobalOptions& g, const std::filesystem::path& config, std::ostream& log) {
  return flow_command(g, config, false, true, log);
}

int cmd_verify_all(const GlobalOptions& g, std::ostream& log) {
  const SuiteResult r = run_suite(g.seed, g.quiet ? nullptr : &log);
  write_atomic(g.out / "manifest.json", dump(manifest_of(r, g.seed)));
  write_atomic(g.out / "timings.json", dump(timings_of(r)));
  return r.all_passed() ? kExitPass : kExitSuiteFailure;
}

}  // namespace lojlab::harness
