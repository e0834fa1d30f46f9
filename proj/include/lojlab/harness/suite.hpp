#pragma once

// Acceptance suite shared by verify-all and the acceptance test binary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lojlab/harness/reports.hpp"

namespace lojlab::harness {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool checks_passed = false;
  double budget_seconds = 0.0;
  double seconds = 0.0;
  json measured;

  bool within_budget() const { return seconds < budget_seconds; }
  bool passed() const { return checks_passed && within_budget(); }
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  bool all_passed() const;
};

/// Criteria 1-10. Determinism (11) compares two manifests and lives with the caller.
SuiteResult run_suite(std::uint64_t seed, std::ostream* log);

/// Deterministic summary: no wall-clock values, only pass/fail and measurements.
json manifest_of(const SuiteResult& r, std::uint64_t seed);

/// Wall-clock seconds per criterion.
json timings_of(const SuiteResult& r);

}  // namespace lojlab::harness
