#pragma once

#include <string>
#include <vector>

#include "lorenzlab/experiment.hpp"

namespace lorenzlab::checks {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double bound = 0.0;
  std::string detail;
};

// Shared heavy state for the verification suite.
struct CheckContext {
  experiment::RunContext run;
  experiment::Artifacts art;
  std::vector<int> symbols;  // generator table symbols (top branches by measure)
};

CheckContext make_check_context(const experiment::RunContext& run, bool prefer_load);

// Per-module invariants and properties.
std::vector<CheckResult> run_module_invariants(const CheckContext& ctx);

// The acceptance suite: one result per criterion, in order.
std::vector<CheckResult> run_acceptance_criteria(const CheckContext& ctx);

std::string format_result_line(const CheckResult& r);

// Full verification: builds the context (reusing artifacts on disk when
// present), runs everything, prints one line per check, writes verify.json.
// Returns true when every check passed.
bool run_verify(const experiment::RunContext& run);

}  // namespace lorenzlab::checks
