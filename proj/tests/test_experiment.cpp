#include <filesystem>
#include <map>

#include <doctest.h>

#include <nlohmann/json.hpp>

#include "lorenzlab/config.hpp"
#include "lorenzlab/errors.hpp"
#include "lorenzlab/experiment.hpp"
#include "lorenzlab/io.hpp"
#include "test_fixtures.hpp"

using namespace lorenzlab;
namespace fs = std::filesystem;

namespace {

// small configuration so experiment-level tests stay quick
Config small_config() {
  Config c = default_config();
  c.set_int("inducing", "max_time", 14);
  c.set_double("inducing", "min_length", 1e-6);
  c.set_int("measure", "bins", 256);
  c.set_int("measure", "mc_samples", 100);
  c.set_int("experiment", "trials", 8);
  c.set_int("experiment", "n_iterates", 2000);
  c.set("experiment", "d_list", "2");
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lorenzlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const std::string text =
      "# comment\n"
      "[lorenz]\n"
      "rho = 0.8\n"
      "scale=1.9\n"
      "\n"
      "[experiment]\n"
      "d_list = 2, 3 ,4\n"
      "seed = 9\n";
  const Config cfg = Config::parse(text);
  CHECK(cfg.get_double("lorenz", "rho", 0.0) == 0.8);
  CHECK(cfg.get_double("lorenz", "scale", 0.0) == 1.9);
  CHECK(cfg.get_int_list("experiment", "d_list", {}) == std::vector<int>{2, 3, 4});
  CHECK(cfg.get_int("experiment", "seed", 0) == 9);
  CHECK(cfg.get("missing", "key", "dflt") == "dflt");

  CHECK_THROWS_AS(Config::parse("[a\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("key = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a]\nnonsense\n"), ConfigError);

  // canonical form is stable and hashes deterministically
  const Config a = Config::parse("[b]\nk = 1\n[a]\nz = 2\ny = 3\n");
  const Config b = Config::parse("[a]\ny = 3\nz = 2\n[b]\nk = 1\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
}

TEST_CASE("experiment params validation") {
  Config c = default_config();
  c.set_int("experiment", "trials", 0);
  CHECK_THROWS_AS(experiment::ExperimentParams::from_config(c), ConfigError);
  c = default_config();
  c.set("experiment", "d_list", "2,99");
  CHECK_THROWS_AS(experiment::ExperimentParams::from_config(c), ConfigError);
  c = default_config();
  c.set_double("experiment", "gap_tolerance", -1.0);
  CHECK_THROWS_AS(experiment::ExperimentParams::from_config(c), ConfigError);
}

TEST_CASE("make_context applies overrides") {
  const auto ctx = experiment::make_context(small_config(), fs::path("somewhere"), 123u, 3);
  CHECK(ctx.exp.seed == 123u);
  CHECK(ctx.exp.threads == 3);
  CHECK(ctx.out == fs::path("somewhere"));
  CHECK(ctx.config_hash_hex.size() == 16);
}

TEST_CASE("build artifacts and reload") {
  const auto dir = fresh_dir("build");
  const auto ctx = experiment::make_context(small_config(), dir, std::nullopt, std::nullopt);
  experiment::cmd_build(ctx);
  CHECK(fs::exists(dir / "system.json"));
  CHECK(fs::exists(dir / "scheme.csv"));
  CHECK(fs::exists(dir / "density.csv"));

  const auto j = nlohmann::json::parse(read_text_file(dir / "system.json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["scheme"]["coverage"].get<double>() > 0.9);
  CHECK(j["lorenz"]["min_derivative"].get<double>() == 1.5);

  const auto art = experiment::load_or_build_artifacts(ctx, true);
  CHECK(art.loaded_from_disk);
  CHECK(art.scheme.coverage > 0.9);
  CHECK(art.branch_probs.size() == art.scheme.branches.size());
}

TEST_CASE("typicality sweep: degenerate control and reproducibility") {
  const auto dir = fresh_dir("typ");
  Config c = small_config();
  c.set_int("experiment", "trials", 3);
  c.set_double("cocycle", "epsilon", 0.0);  // constant identity cocycles
  const auto ctx = experiment::make_context(c, dir, std::nullopt, std::nullopt);
  experiment::cmd_build(ctx);
  const auto report = experiment::run_typicality(ctx);
  REQUIRE(report.dims.size() == 1);
  CHECK(report.dims[0].fraction_simple == 0.0);  // all exponents equal for d >= 2
  for (const auto& row : report.rows) {
    CHECK_FALSE(row.simple);
    CHECK(row.min_gap <= 1e-9);
  }
  CHECK(fs::exists(dir / "typicality.json"));
  CHECK(fs::exists(dir / "trials.csv"));

  // a random sweep with reproducible rows
  const auto dir2 = fresh_dir("typ2");
  const auto ctx2 =
      experiment::make_context(small_config(), dir2, std::nullopt, std::nullopt);
  experiment::cmd_build(ctx2);
  const auto rep2 = experiment::run_typicality(ctx2);
  const auto art = experiment::load_or_build_artifacts(ctx2, true);
  const auto replay = experiment::replay_trial(ctx2, art, 2, 1);
  bool matched = false;
  for (const auto& row : rep2.rows) {
    if (row.seed == replay.seed) {
      matched = true;
      CHECK(row.exponents == replay.exponents);
      CHECK(row.simple == replay.simple);
      CHECK(row.min_gap == replay.min_gap);
    }
  }
  CHECK(matched);
}

TEST_CASE("typicality is thread-count independent") {
  const auto dir_a = fresh_dir("thr_a");
  const auto dir_b = fresh_dir("thr_b");
  Config c = small_config();
  const auto ctx_a = experiment::make_context(c, dir_a, std::nullopt, 1);
  const auto ctx_b = experiment::make_context(c, dir_b, std::nullopt, 4);
  experiment::cmd_build(ctx_a);
  experiment::cmd_build(ctx_b);
  experiment::run_typicality(ctx_a);
  experiment::run_typicality(ctx_b);
  // thread count is part of the config hash, so compare the data files only
  CHECK(read_text_file(dir_a / "trials.csv") == read_text_file(dir_b / "trials.csv"));
}

TEST_CASE("spectrum command emits a valid report") {
  const auto dir = fresh_dir("spec");
  const auto ctx = experiment::make_context(small_config(), dir, std::nullopt, std::nullopt);
  experiment::cmd_build(ctx);
  experiment::cmd_spectrum(ctx, 5u, std::nullopt);
  const auto j = nlohmann::json::parse(read_text_file(dir / "spectrum.json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["exponents"].size() == 2);
  CHECK(j["half_widths"].size() == 2);
  CHECK(j.contains("min_gap"));
  CHECK(j.contains("mean_T"));
  CHECK(j["flow"].contains("max_relative_gap"));
}

TEST_CASE("perturbation probe") {
  const auto dir = fresh_dir("perturb");
  Config c = small_config();
  c.set_int("experiment", "n_iterates", 1500);
  const auto ctx = experiment::make_context(c, dir, std::nullopt, std::nullopt);
  experiment::cmd_build(ctx);
  const auto report = experiment::run_perturbation(ctx, 7);
  // the unperturbed cocycle is degenerate by construction
  CHECK(report.baseline_min_gap <= 1e-9);
  REQUIRE(!report.rows.empty());
  CHECK(report.rows.front().direction == 0);
  CHECK_FALSE(report.rows.front().simple);
  long regained_large = 0, total_large = 0, total = 0;
  for (const auto& row : report.rows) {
    if (row.direction == 0) continue;
    ++total;
    if (row.level <= 1) {  // the two largest perturbation sizes
      ++total_large;
      if (row.simple) ++regained_large;
    }
  }
  CHECK(total == 40 * 9);
  // large perturbations overwhelmingly restore simplicity; tiny ones fall
  // under the gap tolerance by design (the min_gap scales with epsilon)
  CHECK(static_cast<double>(regained_large) / total_large >= 0.9);
  CHECK(fs::exists(dir / "perturbation.csv"));
  const auto t = read_csv(dir / "perturbation.csv");
  CHECK(t.header ==
        std::vector<std::string>{"direction", "level", "epsilon", "min_gap", "simple"});
  CHECK(t.rows.size() == static_cast<std::size_t>(total) + 1);
}

TEST_CASE("build determinism at unit scale") {
  // rerun into the same directory with the same config: bytes must match
  const auto dir = fresh_dir("det");
  const Config c = small_config();
  const auto ctx = experiment::make_context(c, dir, std::nullopt, std::nullopt);
  std::map<std::string, std::string> first;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(dir);
    experiment::cmd_build(ctx);
    experiment::cmd_spectrum(ctx, 5u, std::nullopt);
    for (const char* name : {"system.json", "scheme.csv", "density.csv", "spectrum.json"}) {
      const std::string text = read_text_file(dir / name);
      if (round == 0) {
        first[name] = text;
      } else {
        CHECK(first[name] == text);
      }
    }
  }
}
