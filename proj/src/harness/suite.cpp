#include "lojlab/harness/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "lojlab/analytic_flows.hpp"
#include "lojlab/cylinder_geometry.hpp"
#include "lojlab/errors.hpp"
#include "lojlab/harness/config.hpp"
#include "lojlab/kernels/kernels.hpp"
#include "lojlab/rescaled_mcf.hpp"
#include "lojlab/sequence_certificates.hpp"
#include "runs.hpp"

namespace lojlab::harness {

namespace {

const std::vector<std::pair<double, double>> kCells = {{1.0, 0.4}, {1.0, 0.5}, {1.0, 0.9},
                                                       {10.0, 0.4}, {10.0, 0.5}, {10.0, 0.9}};

std::string cell_name(double C, double tau) {
  std::ostringstream s;
  s << "C=" << C << ",tau=" << tau;
  return s.str();
}

struct Outcome {
  bool ok = true;
  json measured = json::object();
};

Outcome eleme_property(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::size_t hyp = 0, violations = 0;
  const std::size_t tuples = 100000;
  for (std::size_t i = 0; i < tuples; ++i) {
    const double a = 1.0 - U(rng);
    double b = 0.0;
    while (!(b > 0.0)) b = a * U(rng);
    const double C = 1.0 + 99.0 * U(rng);
    const double tau = 1.0 / 3.0 + (2.0 / 3.0) * (1.0 - U(rng));
    const auto r = seq::check_eleme(a, b, C, tau);
    if (r.hypothesis_holds) {
      ++hyp;
      if (!r.gap_exceeds) ++violations;
    }
  }
  Outcome o;
  o.ok = violations == 0;
  o.measured = {{"tuples", tuples}, {"hypothesis_true", hyp}, {"violations", violations}};
  return o;
}

Outcome iteration_exact() {
  Outcome o;
  for (auto [C, tau] : kCells) {
    const auto s = seq::extremal_sequence(C, tau, 1.0, 9999);
    const auto hyp = seq::check_hypothesis(s, C, tau);
    const double base = std::pow(s[0], -tau);
    std::size_t failures = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < s.size(); ++j) {
      const double lhs = std::pow(s[j], -tau);
      const double rhs = base + static_cast<double>(j) / (12.0 * C);
      if (!(lhs > rhs)) ++failures;
      min_margin = std::min(min_margin, lhs - rhs);
    }
    o.ok = o.ok && hyp.ok() && failures == 0;
    o.measured[cell_name(C, tau)] = {
        {"length", s.size()}, {"hypothesis_ok", hyp.ok()}, {"failures", failures}, {"min_margin", min_margin}};
  }
  return o;
}

Outcome constructive_bound_suite(std::mt19937_64& rng) {
  Outcome o;
  for (auto [C, tau] : kCells) {
    const auto cb = seq::constructive_bound(C, tau);
    std::size_t failures = 0, rejected = 0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const auto s = seq::random_admissible(C, tau, 200, rng);
      const auto hyp = seq::check_hypothesis(s, C, tau);
      if (!hyp.ok()) {
        ++rejected;
        continue;
      }
      const double bound = cb.bound(s.front());
      worst = std::max(worst, hyp.sqrt_diff_sum / bound);
      if (!(hyp.sqrt_diff_sum <= bound)) ++failures;
    }
    o.ok = o.ok && failures == 0 && rejected == 0;
    o.measured[cell_name(C, tau)] = {{"c", cb.c},
                                     {"alpha", cb.alpha},
                                     {"sequences", 1000},
                                     {"not_admissible", rejected},
                                     {"failures", failures},
                                     {"max_sum_over_bound", worst}};
  }
  // Halving sequence 2^{-j}, j = 1..40: the square-root differences form a
  // geometric series with ratio 2^{-1/2}.
  std::vector<double> v(40);
  for (int j = 0; j < 40; ++j) v[j] = std::ldexp(1.0, -(j + 1));
  const auto g = seq::certify(seq::MonotoneSequence(v), 1.0, 0.5);
  const double q = std::sqrt(0.5);
  const double oracle = 0.5 * (1.0 - std::pow(q, 39)) / (1.0 - q);
  const bool geo_ok = std::abs(g.hypothesis.sqrt_diff_sum - oracle) <= 1e-5 &&
                      std::abs(g.hypothesis.sqrt_diff_sum - 1.70711) <= 1e-5 && g.holds;
  o.ok = o.ok && geo_ok;
  o.measured["geometric"] = {{"sqrt_diff_sum", g.hypothesis.sqrt_diff_sum},
                             {"oracle", oracle},
                             {"bound", g.bound},
                             {"holds", g.holds}};
  return o;
}

Outcome model_flow(std::mt19937_64& rng) {
  Outcome o;
  const auto quartic = flows::builtin_problem("quartic1d");
  const double x0 = 0.2, t_end = 1e13;
  const auto traj = flows::integrate(quartic, std::vector<double>{x0}, t_end, 1e-10);
  // x(t) = x0 (1 + 8 x0^2 t)^{-1/2}; the path is monotone so its length is x0 - x(t_end).
  const double exact = x0 - x0 / std::sqrt(1.0 + 8.0 * x0 * x0 * t_end);
  const double len_err = std::abs(traj.length() - exact);
  const bool envelope = flows::decay_envelope_check(traj, quartic.tau);
  o.ok = len_err <= 1e-6 && std::abs(traj.length() - 0.2) <= 1e-6 && envelope;
  o.measured["quartic_length"] = {{"length", traj.length()}, {"oracle", exact}, {"abs_error", len_err}};
  o.measured["envelope_holds"] = envelope;

  const double eps = 0.01;
  for (const auto& p : flows::builtin_problems()) {
    const double rho = flows::epsilon_ball_radius(p, eps, rng);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::map<std::string, int> cases;
    std::size_t certified = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      flows::Vector x(p.dimension);
      double n2 = 0.0;
      while (n2 == 0.0) {
        n2 = 0.0;
        for (double& v : x) {
          v = gauss(rng);
          n2 += v * v;
        }
      }
      const double r = 0.999 * rho * std::pow(U(rng), 1.0 / static_cast<double>(p.dimension)) / std::sqrt(n2);
      for (double& v : x) v *= r;
      const auto tr = flows::integrate(p, x, 30.0, 1e-10);
      const auto mark = flows::last_admissible_mark(tr, eps);
      if (!mark) continue;
      const auto rep = flows::effective_bound(p, flows::truncated_at_mark(tr, *mark), eps);
      ++cases[flows::to_string(rep.case_tag)];
      if (rep.holds && rep.certificates_ok) ++certified;
      if (rep.bound_value > 0.0) worst = std::max(worst, rep.sqrt_sum / rep.bound_value);
    }
    o.ok = o.ok && certified == 100;
    json cj = json::object();
    for (const auto& [k, v] : cases) cj[k] = v;
    o.measured[p.name] = {{"start_radius", rho}, {"certified", certified}, {"cases", cj}, {"max_sum_over_bound", worst}};
  }
  return o;
}

Outcome gradient_consistency(std::mt19937_64& rng) {
  Outcome o;
  for (const auto& p : flows::builtin_problems()) {
    const auto r = flows::gradient_consistency(p, 1000, rng);
    o.ok = o.ok && r.points == 1000 && r.max_rel_error <= 1e-6;
    o.measured[p.name] = {{"points", r.points}, {"max_rel_error", r.max_rel_error}};
  }
  return o;
}

Outcome cylinder_area() {
  Outcome o;
  // Closed forms: k = 1 gives sqrt(2 pi) e^{-1/2}, k = 2 gives 4/e.
  const std::pair<int, double> cases[] = {{1, std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5)},
                                          {2, 4.0 / std::numbers::e}};
  for (auto [k, oracle] : cases) {
    const auto spec = cyl::CylinderSpec::make(k);
    const double quad = cyl::graph_F(cyl::CylinderGraph(spec, 20.0, 0.05));
    const bool ok = std::abs(quad - oracle) <= 1e-6 && std::abs(spec.F_value - oracle) <= 1e-6;
    o.ok = o.ok && ok;
    o.measured["k=" + std::to_string(k)] = {
        {"quadrature", quad}, {"closed_form", spec.F_value}, {"oracle", oracle}, {"abs_error", std::abs(quad - oracle)}};
  }
  return o;
}

Outcome stationarity() {
  Outcome o;
  const auto spec = cyl::CylinderSpec::make(1);
  mcf::Controls c;
  c.t_end = 10.0;
  const auto hist = mcf::evolve({cyl::CylinderGraph(spec, 20.0, 0.02), 0.0}, c);
  double max_u = 0.0, max_dF = 0.0;
  for (const auto& s : hist.steps) max_u = std::max(max_u, s.max_abs_u);
  for (double f : hist.F_series) max_dF = std::max(max_dF, std::abs(f - hist.F_series.front()));
  o.ok = hist.exit == mcf::ExitReason::Completed && hist.t_last() >= 10.0 - 1e-9 && max_u <= 1e-8 && max_dF <= 1e-8;
  o.measured = {{"h", 0.02}, {"t_reached", hist.t_last()}, {"steps", hist.steps.size()},
                {"max_abs_u", max_u}, {"max_F_change", max_dF}};
  return o;
}

struct BundledRuns {
  std::map<std::string, FlowRun> runs;  // by label
  std::vector<std::string> sweep_labels;
  std::string small_bump;
  std::map<std::string, KeyValueConfig> configs;
};

BundledRuns run_bundled() {
  BundledRuns b;
  const auto dir = bundled_config_dir();
  for (const char* name : {"zero", "small_bump", "sweep", "large_bump"}) {
    const auto cfg = KeyValueConfig::load(dir / (std::string(name) + ".cfg"));
    b.configs.emplace(name, cfg);
    const bool sweep = cfg.has("amplitudes");
    for (const auto& c : expand_sweep(cfg)) {
      const std::string label = run_label(name, c, sweep);
      b.runs.emplace(label, run_flow(c, label));
      if (std::string(name) == "sweep") b.sweep_labels.push_back(label);
    }
  }
  b.small_bump = "small_bump";
  return b;
}

Outcome monotonicity(const BundledRuns& b) {
  Outcome o;
  for (const auto& [label, run] : b.runs) {
    if (!run.history) {
      o.ok = false;
      o.measured[label] = {{"error", run.failure}};
      continue;
    }
    const double inc = max_unit_increase(*run.history);
    o.ok = o.ok && inc <= 1e-8;
    o.measured[label] = {{"max_unit_increase", inc},
                         {"t_reached", run.history->t_last()},
                         {"exit", mcf::to_string(run.history->exit)}};
  }
  return o;
}

Outcome fit_feasibility(const BundledRuns& b) {
  Outcome o;
  const FlowRun& base = b.runs.at(b.small_bump);
  if (!base.history) {
    o.ok = false;
    o.measured["error"] = base.failure;
    return o;
  }
  const mcf::CloseConfig c0 = base.config;
  const auto fit0 = mcf::lojasiewicz_fit(*base.history, c0.fit);
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& w : fit0.windows) min_slack = std::min(min_slack, w.slack);
  o.ok = min_slack >= 0.0;
  o.measured["base"] = to_json(fit0);

  // Refinements: half the parabolic step cap, then half the grid spacing.
  mcf::CloseConfig c_dt = c0;
  c_dt.dt_max = 0.25 * c0.h * c0.h;
  mcf::CloseConfig c_h = c0;
  c_h.h = 0.5 * c0.h;
  for (const auto& [tag, cfg] : {std::pair<std::string, mcf::CloseConfig>{"dt_refined", c_dt}, {"h_refined", c_h}}) {
    const FlowRun r = run_flow(cfg, tag);
    if (!r.history) {
      o.ok = false;
      o.measured[tag] = {{"error", r.failure}};
      continue;
    }
    const auto f = mcf::lojasiewicz_fit(*r.history, cfg.fit);
    const double rel = fit0.C > 0.0 ? std::abs(f.C - fit0.C) / fit0.C : std::abs(f.C);
    const bool stable = rel < 0.05 && std::abs(f.tau - fit0.tau) < 1e-12;
    o.ok = o.ok && stable;
    o.measured[tag] = {{"C_fit", f.C}, {"tau_fit", f.tau}, {"C_rel_change", rel}, {"stable", stable}};
  }
  o.measured["tau_in_open_range"] = fit0.tau_in_range;
  return o;
}

Outcome closeness_trend(const BundledRuns& b) {
  Outcome o;
  struct Point {
    double dF1, dist;
  };
  std::vector<Point> pts;
  json runs = json::array();
  for (const auto& label : b.sweep_labels) {
    const FlowRun& run = b.runs.at(label);
    if (!run.history) {
      o.ok = false;
      runs.push_back({{"label", label}, {"error", run.failure}});
      continue;
    }
    const auto rep = mcf::close_from_history(run.config, *run.history);
    const bool ok = rep.hypotheses_ok && rep.certificates_ok && rep.bound_holds;
    o.ok = o.ok && ok;
    pts.push_back({std::abs(rep.dF1), rep.max_dist});
    runs.push_back({{"label", label},
                    {"amplitude", run.config.profile.amplitude},
                    {"hypotheses_ok", rep.hypotheses_ok},
                    {"case", flows::to_string(rep.tag)},
                    {"abs_dF1", std::abs(rep.dF1)},
                    {"abs_dF2", std::abs(rep.dF2)},
                    {"C_fit", rep.fit.C},
                    {"tau_certified", rep.fit.tau_certified},
                    {"sqrt_sum", rep.sqrt_sum},
                    {"certified_bound", rep.certified_bound},
                    {"max_dist_R2", rep.max_dist},
                    {"promotion_constant", rep.promotion_constant},
                    {"bound_value", rep.bound_value},
                    {"bound_holds", rep.bound_holds}});
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& c) { return a.dF1 > c.dF1; });
  bool trend = pts.size() == b.sweep_labels.size() && pts.size() >= 2;
  for (std::size_t i = 1; i < pts.size(); ++i) trend = trend && pts[i].dist <= pts[i - 1].dist;
  o.ok = o.ok && trend;
  o.measured["runs"] = runs;
  o.measured["trend_non_increasing"] = trend;
  return o;
}

}  // namespace

bool SuiteResult::all_passed() const {
  for (const auto& c : criteria) {
    if (!c.passed()) return false;
  }
  return !criteria.empty();
}

SuiteResult run_suite(std::uint64_t seed, std::ostream* log) {
  SuiteResult result;
  std::optional<BundledRuns> bundled;

  auto run = [&](int id, std::string name, double budget, const std::function<Outcome()>& body) {
    CriterionResult c;
    c.id = id;
    c.name = std::move(name);
    c.budget_seconds = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = body();
      c.checks_passed = o.ok;
      c.measured = std::move(o.measured);
    } catch (const std::exception& e) {
      c.checks_passed = false;
      c.measured = {{"exception", e.what()}};
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) *log << "[" << (c.passed() ? "PASS" : "FAIL") << "] " << c.id << ". " << c.name << '\n';
    result.criteria.push_back(std::move(c));
  };

  // Each randomized criterion draws from its own stream so results do not
  // depend on which criteria ran before it.
  run(1, "elementary gap lemma property suite", 5.0, [&] {
    std::mt19937_64 r(seed + 1);
    return eleme_property(r);
  });
  run(2, "discrete iteration on extremal sequences", 5.0, [] { return iteration_exact(); });
  run(3, "constructive bound on random admissible sequences", 30.0, [&] {
    std::mt19937_64 r(seed + 3);
    return constructive_bound_suite(r);
  });
  run(4, "model gradient flow length, envelope and three-case bound", 60.0, [&] {
    std::mt19937_64 r(seed + 4);
    return model_flow(r);
  });
  run(5, "gradient consistency", 10.0, [&] {
    std::mt19937_64 r(seed + 5);
    return gradient_consistency(r);
  });
  run(6, "cylinder Gaussian area", 5.0, [] { return cylinder_area(); });
  run(7, "cylinder stationarity", 60.0, [] { return stationarity(); });
  run(8, "F monotone along bundled flows", 600.0, [&] {
    bundled = run_bundled();
    return monotonicity(*bundled);
  });
  run(9, "Lojasiewicz fit feasibility and refinement stability", 600.0, [&] {
    if (!bundled) throw InvalidInputError("bundled runs unavailable");
    return fit_feasibility(*bundled);
  });
  run(10, "closeness trend over the amplitude sweep", 1200.0, [&] {
    if (!bundled) throw InvalidInputError("bundled runs unavailable");
    return closeness_trend(*bundled);
  });
  return result;
}

json manifest_of(const SuiteResult& r, std::uint64_t seed) {
  json m;
  m["suite"] = "acceptance";
  m["seed"] = seed;
  m["versions"] = {{"lojlab", "1.0.0"}, {"kernels", kernels::to_string(kernels::active().backend)}};
  const auto dir = bundled_config_dir();
  json cfgs = json::object();
  for (const char* name : {"zero", "small_bump", "sweep", "large_bump"}) {
    try {
      const auto cfg = KeyValueConfig::load(dir / (std::string(name) + ".cfg"));
      json e = json::object();
      for (const auto& [k, v] : cfg.entries()) e[k] = v;
      cfgs[name] = e;
    } catch (const std::exception& e) {
      cfgs[name] = {{"error", e.what()}};
    }
  }
  m["configs"] = cfgs;
  json list = json::array();
  for (const auto& c : r.criteria) {
    list.push_back({{"id", c.id},
                    {"name", c.name},
                    {"passed", c.passed()},
                    {"budget_seconds", c.budget_seconds},
                    {"within_budget", c.within_budget()},
                    {"measured", c.measured}});
  }
  m["criteria"] = list;
  m["all_passed"] = r.all_passed();
  return m;
}

json timings_of(const SuiteResult& r) {
  json t = json::object();
  for (const auto& c : r.criteria) t[std::to_string(c.id)] = {{"seconds", c.seconds}, {"budget", c.budget_seconds}};
  return t;
}

}  // namespace lojlab::harness
