#pragma once

// JSON views of the report types, CSV exports and atomic file output.

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lojlab/analytic_flows.hpp"
#include "lojlab/cylinder_geometry.hpp"
#include "lojlab/rescaled_mcf.hpp"
#include "lojlab/sequence_certificates.hpp"

namespace lojlab::harness {

using json = nlohmann::ordered_json;

json to_json(const seq::DiscreteHypothesisReport& r);
json to_json(const seq::ConstructiveBound& b);
json to_json(const seq::Certificate& c);
json to_json(const flows::EffectiveBoundReport& r);
json to_json(const flows::SqrtSumResult& r);
json to_json(const cyl::DistanceReport& d);
json to_json(const cyl::AreaReport& a);
json to_json(const mcf::LojasiewiczFit& f);
json to_json(const mcf::CloseConfig& c);
json to_json(const mcf::CloseReport& r);

/// Columns t, F, dist_R1, dist_R2, max|u| for every stored state.
void write_history_csv(std::ostream& out, const mcf::FlowHistory& hist, double R1, double R2);

/// Writes to a temporary sibling, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Two-space indented dump with a trailing newline.
std::string dump(const json& j);

}  // namespace lojlab::harness
