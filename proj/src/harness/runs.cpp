#include "runs.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lojlab::harness {

std::vector<mcf::CloseConfig> expand_sweep(const KeyValueConfig& cfg) {
  const mcf::CloseConfig base = close_config_from(cfg);
  const std::vector<double> amps = cfg.get_list("amplitudes");
  if (amps.empty()) return {base};
  std::vector<mcf::CloseConfig> out;
  for (double a : amps) {
    mcf::CloseConfig c = base;
    c.profile.amplitude = a;
    out.push_back(c);
  }
  return out;
}

std::string run_label(const std::string& base, const mcf::CloseConfig& c, bool sweep) {
  if (!sweep) return base;
  std::ostringstream s;
  s << base << "_a" << c.profile.amplitude;
  return s.str();
}

FlowRun run_flow(const mcf::CloseConfig& c, std::string label) {
  FlowRun run;
  run.label = std::move(label);
  run.config = c;
  const auto spec = cyl::CylinderSpec::make(c.k);
  mcf::FlowState init{mcf::make_profile(spec, c.R_dom, c.h, c.profile), 0.0};
  mcf::Controls ctl;
  ctl.t_end = c.t2;
  ctl.dt_max = c.dt_max;
  ctl.tol = c.tol;
  ctl.stride = c.stride;
  ctl.stop_dist = c.stop_dist;
  ctl.stop_R = c.R1;
  try {
    run.history = mcf::evolve(init, ctl);
  } catch (const mcf::BlowUpError& e) {
    run.failure = e.what();
  }
  return run;
}

double max_unit_increase(const mcf::FlowHistory& h) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.states.size(); ++i) {
    const double t = h.states[i].t;
    if (std::abs(t - std::round(t)) > 1e-9) continue;
    if (const auto next = h.index_at(t + 1.0)) worst = std::max(worst, h.F_series[*next] - h.F_series[i]);
  }
  return std::isfinite(worst) ? worst : 0.0;
}

}  // namespace lojlab::harness
