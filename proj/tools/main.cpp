// lorenzlab command-line front end: builds the geometric model artifacts and
// drives the randomized spectrum experiments.
//
//   lorenzlab build       construct system summary, inducing scheme, density
//   lorenzlab density     invariant density only
//   lorenzlab spectrum    one cocycle spectrum report (sampled or from JSON)
//   lorenzlab typicality  randomized sweep over fiber-bunched cocycles
//   lorenzlab perturb     perturbation probe around a degenerate cocycle
//   lorenzlab verify      full invariant + acceptance check suite
//
// Exit codes: 0 success, 1 invariant failure, 2 configuration error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lorenzlab/checks.hpp"
#include "lorenzlab/config.hpp"
#include "lorenzlab/errors.hpp"
#include "lorenzlab/experiment.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/version.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

lorenzlab::experiment::RunContext build_context(const GlobalOptions& g) {
  lorenzlab::Config cfg =
      g.config_path.empty() ? lorenzlab::default_config() : lorenzlab::Config::load(g.config_path);
  std::optional<std::filesystem::path> out;
  if (g.out) out = *g.out;
  return lorenzlab::experiment::make_context(cfg, out, g.seed, g.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for Lyapunov spectra of fiber-bunched cocycles "
               "over the geometric Lorenz attractor"};
  app.set_version_flag("--version", lorenzlab::kVersion);
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "configuration file (key = value sections)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");
  std::string out_value;
  auto* out_opt = app.add_option("--out", out_value, "output directory override");
  int threads_value = 0;
  auto* threads_opt = app.add_option("--threads", threads_value, "worker threads for trials");

  auto* cmd_build = app.add_subcommand("build", "construct and persist the model artifacts");
  auto* cmd_density = app.add_subcommand("density", "estimate and persist the invariant density");
  auto* cmd_spectrum = app.add_subcommand("spectrum", "single-cocycle spectrum report");
  std::uint64_t gen_seed_value = 0;
  auto* gen_seed_opt =
      cmd_spectrum->add_option("--gen-seed", gen_seed_value, "seed for the sampled generator");
  std::string gen_json;
  auto* gen_json_opt =
      cmd_spectrum->add_option("--generator", gen_json, "generator JSON file to load");
  auto* cmd_typicality =
      app.add_subcommand("typicality", "randomized simplicity sweep over bunched cocycles");
  auto* cmd_perturb =
      app.add_subcommand("perturb", "perturbation probe around a degenerate cocycle");
  std::uint64_t degenerate_seed = 7;
  cmd_perturb->add_option("--degenerate-seed", degenerate_seed,
                          "seed of the degenerate base cocycle");
  auto* cmd_verify = app.add_subcommand("verify", "run every invariant and acceptance check");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seed_opt) g.seed = seed_value;
    if (*out_opt) g.out = out_value;
    if (*threads_opt) g.threads = threads_value;
    const auto ctx = build_context(g);

    if (cmd_build->parsed()) {
      lorenzlab::experiment::cmd_build(ctx);
      std::printf("build artifacts written to %s\n", ctx.out.string().c_str());
      return 0;
    }
    if (cmd_density->parsed()) {
      lorenzlab::experiment::cmd_density(ctx);
      std::printf("density written to %s\n", (ctx.out / "density.csv").string().c_str());
      return 0;
    }
    if (cmd_spectrum->parsed()) {
      std::optional<std::uint64_t> gs;
      if (*gen_seed_opt) gs = gen_seed_value;
      std::optional<std::filesystem::path> gj;
      if (*gen_json_opt) gj = gen_json;
      lorenzlab::experiment::cmd_spectrum(ctx, gs, gj);
      std::printf("spectrum written to %s\n", (ctx.out / "spectrum.json").string().c_str());
      return 0;
    }
    if (cmd_typicality->parsed()) {
      const auto report = lorenzlab::experiment::run_typicality(ctx);
      for (const auto& dim : report.dims) {
        std::printf("d=%d  trials=%ld  fraction_simple=%s  failures=%ld\n", dim.d, dim.trials,
                    lorenzlab::format_double(dim.fraction_simple).c_str(), dim.failures);
      }
      std::printf("reports written to %s\n", ctx.out.string().c_str());
      return 0;
    }
    if (cmd_perturb->parsed()) {
      const auto report = lorenzlab::experiment::run_perturbation(ctx, degenerate_seed);
      std::printf("baseline min_gap=%s (degenerate)\n",
                  lorenzlab::format_double(report.baseline_min_gap).c_str());
      std::printf("median log-log slope of min_gap against epsilon: %s\n",
                  lorenzlab::format_double(report.median_loglog_slope).c_str());
      std::printf("plot data written to %s\n",
                  (ctx.out / "perturbation.csv").string().c_str());
      return 0;
    }
    if (cmd_verify->parsed()) {
      const int rc = lorenzlab::experiment::cmd_verify(ctx);
      std::printf("verify: %s (report %s)\n", rc == 0 ? "all checks passed" : "FAILURES",
                  (ctx.out / "verify.json").string().c_str());
      return rc;
    }
  } catch (const lorenzlab::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
