#include "lojlab/harness/reports.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "lojlab/errors.hpp"

namespace lojlab::harness {

json to_json(const seq::DiscreteHypothesisReport& r) {
  json j;
  j["C"] = r.C;
  j["tau"] = r.tau;
  j["ok"] = r.ok();
  j["first_violation"] = r.first_violation ? json(*r.first_violation) : json(nullptr);
  j["pairs_checked"] = r.per_index_ok.size();
  j["sqrt_diff_sum"] = r.sqrt_diff_sum;
  return j;
}

json to_json(const seq::ConstructiveBound& b) {
  return json{{"C", b.C},       {"tau", b.tau},           {"c", b.c},
              {"alpha", b.alpha}, {"delta", b.delta},   {"tail_sum", b.tail_sum},
              {"tail_error", b.tail_error}};
}

json to_json(const seq::Certificate& c) {
  json j;
  j["hypothesis"] = to_json(c.hypothesis);
  j["constants"] = to_json(c.constants);
  j["sum"] = c.sum;
  j["bound"] = c.bound;
  j["terminal_zero"] = c.terminal_zero;
  j["holds"] = c.holds;
  return j;
}

json to_json(const flows::EffectiveBoundReport& r) {
  json j;
  j["case"] = flows::to_string(r.case_tag);
  j["t1"] = r.t1;
  j["t2"] = r.t2;
  j["crossing_time"] = r.crossing_time ? json(*r.crossing_time) : json(nullptr);
  j["length"] = r.length;
  j["sqrt_sum"] = r.sqrt_sum;
  j["bound"] = r.bound_value;
  j["c"] = r.c;
  j["alpha"] = r.alpha;
  j["holds"] = r.holds;
  j["certificates_ok"] = r.certificates_ok;
  j["parts"] = json::array();
  for (const auto& p : r.parts) j["parts"].push_back(to_json(p));
  return j;
}

json to_json(const flows::SqrtSumResult& r) {
  return json{{"sum", r.sum},
              {"block_bound", r.block_bound},
              {"segments", r.segments},
              {"segments_ok", r.segments_ok},
              {"worst_excess", r.worst_excess},
              {"empty_warning", r.empty_warning}};
}

json to_json(const cyl::DistanceReport& d) {
  return json{{"R", d.R}, {"c0", d.c0}, {"c1", d.c1}, {"c2", d.c2}, {"dist", d.dist}};
}

json to_json(const cyl::AreaReport& a) {
  return json{{"value", a.value}, {"interior", a.interior}, {"tail", a.tail}, {"tail_bound", a.tail_bound}};
}

json to_json(const mcf::LojasiewiczFit& f) {
  json j;
  j["C_fit"] = f.C;
  j["tau_fit"] = f.tau;
  j["tau_certified"] = f.tau_certified;
  j["tau_in_open_range"] = f.tau_in_range;
  j["cap_exceeded"] = f.cap_exceeded;
  double min_slack = 0.0;
  bool first = true;
  j["windows"] = json::array();
  for (const auto& w : f.windows) {
    j["windows"].push_back({{"t", w.t}, {"drop", w.drop}, {"deviation", w.deviation}, {"slack", w.slack}});
    if (first || w.slack < min_slack) min_slack = w.slack;
    first = false;
  }
  j["min_slack"] = min_slack;
  return j;
}

json to_json(const mcf::CloseConfig& c) {
  json j;
  j["k"] = c.k;
  j["R_dom"] = c.R_dom;
  j["h"] = c.h;
  j["dt_max"] = c.dt_max;
  j["tol"] = c.tol;
  j["profile_kind"] = mcf::to_string(c.profile.kind);
  j["amplitude"] = c.profile.amplitude;
  j["seed"] = c.profile.seed;
  j["t1"] = c.t1;
  j["t2"] = c.t2;
  j["eps1"] = c.eps1;
  j["eps2"] = c.eps2;
  j["R1"] = c.R1;
  j["R2"] = c.R2;
  j["stride"] = c.stride;
  j["stop_dist"] = c.stop_dist;
  j["R_bar"] = c.fit.R_bar;
  j["eps_fit"] = c.fit.epsilon;
  j["C_cap"] = c.fit.C_cap;
  return j;
}

json to_json(const mcf::CloseReport& r) {
  json j;
  j["config"] = to_json(r.config);
  j["exit"] = mcf::to_string(r.exit);
  j["t_reached"] = r.t_reached;
  j["F_cylinder"] = r.F_cylinder;
  j["hypotheses"] = {{"initial_dist_R1", r.initial_dist},
                     {"close", r.hypothesis_close},
                     {"dF1", r.dF1},
                     {"dF2", r.dF2},
                     {"level", r.hypothesis_level},
                     {"ok", r.hypotheses_ok},
                     {"detail", r.hypothesis_detail}};
  if (!r.fit.windows.empty()) j["fit"] = to_json(r.fit);
  j["sequence"] = r.sequence;
  j["case"] = flows::to_string(r.tag);
  j["parts"] = json::array();
  for (const auto& p : r.parts) j["parts"].push_back(to_json(p));
  j["certificates_ok"] = r.certificates_ok;
  j["sqrt_sum"] = r.sqrt_sum;
  j["certified_bound"] = r.certified_bound;
  j["unit_sqrt_sum"] = r.unit_sqrt_sum;
  j["max_dist_R2"] = r.max_dist;
  j["promotion_constant"] = r.promotion_constant;
  j["bound_value"] = r.bound_value;
  j["bound_holds"] = r.bound_holds;
  return j;
}

void write_history_csv(std::ostream& out, const mcf::FlowHistory& hist, double R1, double R2) {
  out << "t,F,dist_R1,dist_R2,max_abs_u\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < hist.states.size(); ++i) {
    const auto& g = hist.states[i].graph;
    double mu = 0.0;
    for (double v : g.u()) mu = std::max(mu, std::abs(v));
    out << hist.states[i].t << ',' << hist.F_series[i] << ',' << cyl::dist_R(g, R1).dist << ','
        << cyl::dist_R(g, R2).dist << ',' << mu << '\n';
  }
  out.precision(old);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot write " + tmp.string());
    out << content;
    if (!out) throw InvalidInputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace lojlab::harness
