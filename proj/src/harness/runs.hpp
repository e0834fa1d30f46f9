#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lojlab/harness/config.hpp"
#include "lojlab/rescaled_mcf.hpp"

namespace lojlab::harness {

struct FlowRun {
  std::string label;
  mcf::CloseConfig config;
  std::optional<mcf::FlowHistory> history;
  /// Set when the integrator raised a blow-up error.
  std::string failure;
};

/// One config per entry of `amplitudes` (or the single `amplitude`).
std::vector<mcf::CloseConfig> expand_sweep(const KeyValueConfig& cfg);

std::string run_label(const std::string& base, const mcf::CloseConfig& c, bool sweep);

FlowRun run_flow(const mcf::CloseConfig& c, std::string label);

/// Largest F(t+1) - F(t) over consecutive integer times (negative when decreasing).
double max_unit_increase(const mcf::FlowHistory& h);

}  // namespace lojlab::harness
