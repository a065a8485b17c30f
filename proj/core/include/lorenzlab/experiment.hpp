#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lorenzlab/config.hpp"
#include "lorenzlab/inducing.hpp"
#include "lorenzlab/lyapunov.hpp"
#include "lorenzlab/measure.hpp"

namespace lorenzlab::experiment {

struct ExperimentParams {
  long trials = 1000;
  std::vector<int> d_list = {2, 3};
  long n_iterates = 100000;
  double gap_tolerance = 1e-3;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 1;

  static ExperimentParams from_config(const Config& cfg);
  void validate() const;
};

struct RunContext {
  Config config;
  ExperimentParams exp;
  std::filesystem::path out;
  std::string config_hash_hex;
};

RunContext make_context(Config cfg, std::optional<std::filesystem::path> out_override,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override);

// Builds everything the later commands read: system summary, inducing scheme,
// invariant density, each with a provenance header.
void cmd_build(const RunContext& ctx);

void cmd_density(const RunContext& ctx);

struct Artifacts {
  model::GeometricLorenzSystem sys;
  inducing::InducingScheme scheme;
  measure::DensityEstimate density;
  std::vector<double> branch_probs;
  bool loaded_from_disk = false;
};

// Loads scheme.csv/density.csv from the output directory when present (with
// full re-validation), otherwise rebuilds them from the configuration.
Artifacts load_or_build_artifacts(const RunContext& ctx, bool prefer_load);

// Branch indices ranked by measure, largest first; generator tables live on
// these symbols with the fallback entry covering the tail of the alphabet.
std::vector<int> top_symbols(const std::vector<double>& probs, int count);

struct TrialRow {
  std::uint64_t seed = 0;
  int d = 0;
  std::vector<double> exponents;
  double min_gap = 0.0;
  bool simple = false;
  double bunching_margin = 0.0;
  std::string error;  // empty on success
};

struct DimensionSummary {
  int d = 0;
  long trials = 0;
  long failures = 0;
  double fraction_simple = 0.0;
  std::array<double, 5> min_gap_quantiles{};   // p05 p25 p50 p75 p95
  std::array<double, 5> margin_quantiles{};
  double mean_return_time = 0.0;
  double mean_return_half_width = 0.0;
};

struct TypicalityReport {
  std::vector<DimensionSummary> dims;
  std::vector<TrialRow> rows;
};

// Randomized sweep over fiber-bunched generators; writes typicality.json and
// trials.csv. Trials are pure functions of (config, trial seed), so the
// thread count never changes the output files.
TypicalityReport run_typicality(const RunContext& ctx);

// Recomputes one trial row from its seed (reproducibility hook).
TrialRow replay_trial(const RunContext& ctx, const Artifacts& art, int d, long trial_index);

struct PerturbationRow {
  int direction = 0;  // 0 is the unperturbed baseline
  int level = -1;     // epsilon * 2^-level; -1 for the baseline
  double epsilon = 0.0;
  double min_gap = 0.0;
  bool simple = false;
};

struct PerturbationReport {
  std::vector<PerturbationRow> rows;
  double baseline_min_gap = 0.0;
  double median_loglog_slope = 0.0;  // of min_gap against epsilon, regained trials
};

PerturbationReport run_perturbation(const RunContext& ctx, std::uint64_t degenerate_seed);

void cmd_spectrum(const RunContext& ctx, std::optional<std::uint64_t> gen_seed,
                  std::optional<std::filesystem::path> gen_json);

int cmd_verify(const RunContext& ctx);  // 0 when every check passes, 1 otherwise

}  // namespace lorenzlab::experiment
