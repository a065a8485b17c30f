#include "lorenzlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include "lorenzlab/checks.hpp"
#include "lorenzlab/cocycle.hpp"
#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/rng.hpp"
#include "lorenzlab/version.hpp"

namespace lorenzlab::experiment {

using json = nlohmann::ordered_json;

ExperimentParams ExperimentParams::from_config(const Config& cfg) {
  ExperimentParams p;
  p.trials = cfg.get_int("experiment", "trials", p.trials);
  p.d_list = cfg.get_int_list("experiment", "d_list", p.d_list);
  p.n_iterates = cfg.get_int("experiment", "n_iterates", p.n_iterates);
  p.gap_tolerance = cfg.get_double("experiment", "gap_tolerance", p.gap_tolerance);
  p.seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", 1));
  p.output_dir = cfg.get("experiment", "output_dir", p.output_dir);
  p.threads = static_cast<int>(cfg.get_int("experiment", "threads", p.threads));
  p.validate();
  return p;
}

void ExperimentParams::validate() const {
  if (trials < 1) throw ConfigError("[experiment] trials must be at least 1");
  if (d_list.empty()) throw ConfigError("[experiment] d_list must not be empty");
  for (const int d : d_list) {
    if (d < 1 || d > 16) throw ConfigError("[experiment] dimensions must lie in [1,16]");
  }
  if (n_iterates < 1) throw ConfigError("[experiment] n_iterates must be positive");
  if (!(gap_tolerance > 0.0)) throw ConfigError("[experiment] gap_tolerance must be positive");
  if (threads < 1 || threads > 256) throw ConfigError("[experiment] threads must lie in [1,256]");
}

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

std::vector<std::string> provenance(const RunContext& ctx) {
  return {std::string("lorenzlab v") + kVersion, "config " + ctx.config_hash_hex,
          "seed " + format_int(static_cast<long long>(ctx.exp.seed))};
}

json provenance_json(const RunContext& ctx) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = kVersion;
  j["config_hash"] = ctx.config_hash_hex;
  j["seed"] = ctx.exp.seed;
  return j;
}

std::array<double, 5> quantiles(std::vector<double> v) {
  std::array<double, 5> q{};
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  const std::array<double, 5> ps = {0.05, 0.25, 0.5, 0.75, 0.95};
  for (int i = 0; i < 5; ++i) {
    const double pos = ps[static_cast<std::size_t>(i)] * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    q[static_cast<std::size_t>(i)] = v[lo] * (1.0 - frac) + v[hi] * frac;
  }
  return q;
}

}  // namespace

RunContext make_context(Config cfg, std::optional<std::filesystem::path> out_override,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override) {
  if (seed_override) cfg.set_int("experiment", "seed", static_cast<long long>(*seed_override));
  if (threads_override) cfg.set_int("experiment", "threads", *threads_override);
  if (out_override) cfg.set("experiment", "output_dir", out_override->string());
  RunContext ctx;
  ctx.exp = ExperimentParams::from_config(cfg);
  ctx.config = std::move(cfg);
  ctx.out = ctx.exp.output_dir;
  ctx.config_hash_hex = hash_hex(ctx.config.hash());
  return ctx;
}

void cmd_build(const RunContext& ctx) {
  const auto sys = model::GeometricLorenzSystem::from_config(ctx.config);
  const auto sp = inducing::SchemeParams::from_config(ctx.config);
  const auto scheme = inducing::build_inducing_scheme(sys.map, sp);
  std::filesystem::create_directories(ctx.out);
  inducing::write_scheme_csv(ctx.out / "scheme.csv", scheme, provenance(ctx));

  const int bins = static_cast<int>(ctx.config.get_int("measure", "bins", 2048));
  const int mc = static_cast<int>(ctx.config.get_int("measure", "mc_samples", 100));
  const auto density =
      measure::ulam_density(sys.map, bins, mc, derive_seed(ctx.exp.seed, "density"));
  measure::write_density_csv(ctx.out / "density.csv", density, provenance(ctx));

  const auto expansion = model::verify_expansion(sys.map);
  const auto equilibrium = model::equilibrium_eigenvalues(sys.ode);

  json j = provenance_json(ctx);
  json lorenz;
  lorenz["rho"] = sys.map.rho;
  lorenz["scale"] = sys.map.scale;
  lorenz["beta"] = sys.skew.beta;
  lorenz["gamma"] = sys.skew.gamma;
  lorenz["theta"] = sys.skew.theta;
  lorenz["roof_c0"] = sys.roof.c0;
  lorenz["roof_c1"] = sys.roof.c1;
  lorenz["min_derivative"] = expansion.min_derivative;
  lorenz["expansion_exceeds_sqrt2"] = expansion.exceeds_sqrt2;
  j["lorenz"] = std::move(lorenz);
  json eq;
  eq["eigenvalues"] = equilibrium.eigenvalues;
  eq["discriminant"] = equilibrium.discriminant;
  eq["expansion_exceeds_weak_contraction"] = equilibrium.expansion_exceeds_weak_contraction;
  eq["expansion_exceeds_strong_contraction"] = equilibrium.expansion_exceeds_strong_contraction;
  eq["saddle_value_positive"] = equilibrium.saddle_value_positive;
  j["equilibrium"] = std::move(eq);
  json sc;
  sc["branches"] = scheme.branches.size();
  sc["coverage"] = scheme.coverage;
  sc["truncated_mass"] = scheme.truncated_mass;
  sc["pruned_mass"] = scheme.pruned_mass;
  sc["min_induced_derivative"] = scheme.min_induced_derivative;
  sc["metric_theta"] = inducing::metric_theta(scheme, sys.skew);
  sc["max_time"] = scheme.max_time;
  sc["delta"] = scheme.delta;
  j["scheme"] = std::move(sc);
  json de;
  de["bins"] = density.bins();
  de["fixed_point_residual"] = density.fixed_point_residual;
  j["density"] = std::move(de);
  write_text_file(ctx.out / "system.json", j.dump(2) + "\n");
}

void cmd_density(const RunContext& ctx) {
  const auto sys = model::GeometricLorenzSystem::from_config(ctx.config);
  const auto sp = inducing::SchemeParams::from_config(ctx.config);
  const int bins = static_cast<int>(ctx.config.get_int("measure", "bins", 2048));
  const int mc = static_cast<int>(ctx.config.get_int("measure", "mc_samples", 100));
  const auto density =
      measure::ulam_density(sys.map, bins, mc, derive_seed(ctx.exp.seed, "density"));
  std::filesystem::create_directories(ctx.out);
  measure::write_density_csv(ctx.out / "density.csv", density, provenance(ctx));

  // product-structure density on cylinder pairs, over an orbit whose length
  // is the module's whole Monte-Carlo budget
  const int depth = static_cast<int>(ctx.config.get_int("measure", "depth", 2));
  const int n_trunc = static_cast<int>(ctx.config.get_int("measure", "n_truncation", 30));
  const long orbit_length = static_cast<long>(bins) * mc;
  const auto scheme_path = ctx.out / "scheme.csv";
  const auto scheme = std::filesystem::exists(scheme_path)
                          ? inducing::read_scheme_csv(sys.map, sp, scheme_path)
                          : inducing::build_inducing_scheme(sys.map, sp);
  const auto pd = measure::product_density(scheme, depth, std::max<long>(orbit_length, 10000),
                                           derive_seed(ctx.exp.seed, "product"), n_trunc);
  measure::write_product_density_csv(ctx.out / "product_density.csv", pd);
}

Artifacts load_or_build_artifacts(const RunContext& ctx, bool prefer_load) {
  Artifacts art;
  art.sys = model::GeometricLorenzSystem::from_config(ctx.config);
  const auto sp = inducing::SchemeParams::from_config(ctx.config);
  const auto scheme_path = ctx.out / "scheme.csv";
  const auto density_path = ctx.out / "density.csv";
  if (prefer_load && std::filesystem::exists(scheme_path) &&
      std::filesystem::exists(density_path)) {
    art.scheme = inducing::read_scheme_csv(art.sys.map, sp, scheme_path);
    art.density = measure::read_density_csv(density_path);
    art.loaded_from_disk = true;
  } else {
    art.scheme = inducing::build_inducing_scheme(art.sys.map, sp);
    const int bins = static_cast<int>(ctx.config.get_int("measure", "bins", 2048));
    const int mc = static_cast<int>(ctx.config.get_int("measure", "mc_samples", 100));
    art.density =
        measure::ulam_density(art.sys.map, bins, mc, derive_seed(ctx.exp.seed, "density"));
  }
  art.branch_probs = measure::branch_measure(art.scheme, art.density);
  return art;
}

std::vector<int> top_symbols(const std::vector<double>& probs, int count) {
  std::vector<int> idx(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) idx[i] = static_cast<int>(i) + 1;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double pa = probs[static_cast<std::size_t>(a - 1)];
    const double pb = probs[static_cast<std::size_t>(b - 1)];
    if (pa != pb) return pa > pb;
    return a < b;
  });
  if (static_cast<int>(idx.size()) > count) idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

struct CocycleConfig {
  int d = 2;
  int depth = 1;
  double epsilon = 0.3;
  double eta = 1.0;
  double tau = 0.95;
};

CocycleConfig cocycle_config(const Config& cfg) {
  CocycleConfig c;
  c.d = static_cast<int>(cfg.get_int("cocycle", "d", c.d));
  c.depth = static_cast<int>(cfg.get_int("cocycle", "depth", c.depth));
  c.epsilon = cfg.get_double("cocycle", "epsilon", c.epsilon);
  c.eta = cfg.get_double("cocycle", "eta", c.eta);
  c.tau = cfg.get_double("cocycle", "tau", c.tau);
  return c;
}

TrialRow run_one_trial(const Artifacts& art, const measure::OrbitSource& src,
                       const std::vector<int>& symbols, const CocycleConfig& cc, int d,
                       double gap_tolerance, long n_iterates, std::uint64_t trial_seed) {
  TrialRow row;
  row.seed = trial_seed;
  row.d = d;
  try {
    const auto gen = cocycle::sample_fiber_bunched(trial_seed, d, cc.depth, symbols, cc.epsilon,
                                                   art.sys.skew.theta, cc.eta, cc.tau);
    const auto bunching =
        cocycle::fiber_bunching_check(gen, art.sys.skew.theta, cc.eta, cc.tau);
    row.bunching_margin = cc.tau - bunching.worst_product;
    const auto spec =
        lyapunov::qr_spectrum(gen, src, n_iterates, derive_seed(trial_seed, "orbit"));
    const auto verdict = lyapunov::simplicity_check(spec, gap_tolerance);
    row.exponents = spec.exponents;
    row.min_gap = verdict.min_gap;
    row.simple = verdict.simple;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

TrialRow replay_trial(const RunContext& ctx, const Artifacts& art, int d, long trial_index) {
  const CocycleConfig cc = cocycle_config(ctx.config);
  const auto src = measure::OrbitSource::bernoulli(&art.scheme, art.branch_probs);
  const std::vector<int> symbols = top_symbols(art.branch_probs, 64);
  const std::uint64_t trial_seed =
      derive_seed(ctx.exp.seed, "typicality", static_cast<std::uint64_t>(d),
                  static_cast<std::uint64_t>(trial_index));
  return run_one_trial(art, src, symbols, cc, d, ctx.exp.gap_tolerance, ctx.exp.n_iterates,
                       trial_seed);
}

TypicalityReport run_typicality(const RunContext& ctx) {
  const Artifacts art = load_or_build_artifacts(ctx, true);
  const CocycleConfig cc = cocycle_config(ctx.config);
  const auto src = measure::OrbitSource::bernoulli(&art.scheme, art.branch_probs);
  const std::vector<int> symbols = top_symbols(art.branch_probs, 64);

  TypicalityReport report;
  const auto mean_T =
      measure::birkhoff_average(measure::Observable::total_return_time, art.sys, art.scheme, src,
                                std::min<long>(ctx.exp.n_iterates, 200000),
                                derive_seed(ctx.exp.seed, "typicality.mean_T"));

  for (const int d : ctx.exp.d_list) {
    std::vector<TrialRow> rows(static_cast<std::size_t>(ctx.exp.trials));
    auto worker = [&](long begin, long end) {
      for (long t = begin; t < end; ++t) {
        const std::uint64_t trial_seed =
            derive_seed(ctx.exp.seed, "typicality", static_cast<std::uint64_t>(d),
                        static_cast<std::uint64_t>(t));
        rows[static_cast<std::size_t>(t)] = run_one_trial(
            art, src, symbols, cc, d, ctx.exp.gap_tolerance, ctx.exp.n_iterates, trial_seed);
      }
    };
    const int nthreads = std::max(1, std::min<int>(ctx.exp.threads,
                                                   static_cast<int>(ctx.exp.trials)));
    if (nthreads == 1) {
      worker(0, ctx.exp.trials);
    } else {
      std::vector<std::thread> pool;
      const long chunk = (ctx.exp.trials + nthreads - 1) / nthreads;
      for (int k = 0; k < nthreads; ++k) {
        const long b = k * chunk;
        const long e = std::min(ctx.exp.trials, b + chunk);
        if (b >= e) break;
        pool.emplace_back(worker, b, e);
      }
      for (auto& th : pool) th.join();
    }

    DimensionSummary dim;
    dim.d = d;
    dim.trials = ctx.exp.trials;
    dim.mean_return_time = mean_T.mean;
    dim.mean_return_half_width = mean_T.half_width;
    std::vector<double> gaps, margins;
    long simple_count = 0;
    for (const TrialRow& r : rows) {
      if (!r.error.empty()) {
        ++dim.failures;
        continue;
      }
      if (r.simple) ++simple_count;
      gaps.push_back(r.min_gap);
      margins.push_back(r.bunching_margin);
    }
    const long ok = ctx.exp.trials - dim.failures;
    dim.fraction_simple = ok > 0 ? static_cast<double>(simple_count) / ok : 0.0;
    dim.min_gap_quantiles = quantiles(gaps);
    dim.margin_quantiles = quantiles(margins);
    report.dims.push_back(dim);
    for (TrialRow& r : rows) report.rows.push_back(std::move(r));
  }

  // trials.csv
  std::filesystem::create_directories(ctx.out);
  const int d_max = *std::max_element(ctx.exp.d_list.begin(), ctx.exp.d_list.end());
  {
    CsvWriter w(ctx.out / "trials.csv");
    std::vector<std::string> header = {"seed", "d"};
    for (int i = 1; i <= d_max; ++i) header.push_back("lambda_" + format_int(i));
    header.insert(header.end(), {"min_gap", "simple", "bunching_margin", "error"});
    w.row(header);
    for (const TrialRow& r : report.rows) {
      std::vector<std::string> cells = {format_int(static_cast<long long>(r.seed)),
                                        format_int(r.d)};
      for (int i = 0; i < d_max; ++i) {
        cells.push_back(i < static_cast<int>(r.exponents.size())
                            ? format_double(r.exponents[static_cast<std::size_t>(i)])
                            : std::string());
      }
      cells.push_back(format_double(r.min_gap));
      cells.push_back(r.simple ? "1" : "0");
      cells.push_back(format_double(r.bunching_margin));
      cells.push_back(r.error.empty() ? std::string() : "\"" + r.error + "\"");
      w.row(cells);
    }
    w.close();
  }

  // typicality.json
  json j = provenance_json(ctx);
  j["gap_tolerance"] = ctx.exp.gap_tolerance;
  j["n_iterates"] = ctx.exp.n_iterates;
  json dims = json::array();
  for (const DimensionSummary& dim : report.dims) {
    json dj;
    dj["d"] = dim.d;
    dj["trials"] = dim.trials;
    dj["failures"] = dim.failures;
    dj["fraction_simple"] = dim.fraction_simple;
    dj["min_gap_quantiles"] = dim.min_gap_quantiles;
    dj["bunching_margin_quantiles"] = dim.margin_quantiles;
    dj["mean_return_time"] = dim.mean_return_time;
    dj["mean_return_half_width"] = dim.mean_return_half_width;
    json fails = json::array();
    for (const TrialRow& r : report.rows) {
      if (r.d == dim.d && !r.error.empty()) {
        json f;
        f["seed"] = r.seed;
        f["error"] = r.error;
        fails.push_back(std::move(f));
      }
    }
    dj["failures_with_seeds"] = std::move(fails);
    dims.push_back(std::move(dj));
  }
  j["per_dimension"] = std::move(dims);
  write_text_file(ctx.out / "typicality.json", j.dump(2) + "\n");
  return report;
}

PerturbationReport run_perturbation(const RunContext& ctx, std::uint64_t degenerate_seed) {
  const Artifacts art = load_or_build_artifacts(ctx, true);
  const CocycleConfig cc = cocycle_config(ctx.config);
  const auto src = measure::OrbitSource::bernoulli(&art.scheme, art.branch_probs);
  const std::vector<int> symbols = top_symbols(art.branch_probs, 64);

  // degenerate base: every entry the same scalar multiple of a unitary, so
  // all exponents coincide at log(scale)
  const int d = cc.d;
  Rng rng(derive_seed(degenerate_seed, "degenerate"));
  CMatrix gauss(d);
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj) gauss.at(i, jj) = {rng.gaussian(), rng.gaussian()};
  const CMatrix unitary = qr_positive(gauss).q;
  const double scale = 1.25;
  cocycle::CocycleGenerator base;
  base.d = d;
  base.depth = cc.depth;
  base.fallback = unitary.scaled(scale);
  if (cc.depth > 0) {
    std::vector<cocycle::Word> words;
    for (const int s : symbols) words.push_back(cocycle::Word{s});
    if (cc.depth == 1) {
      for (const auto& w : words) base.table.emplace(w, base.fallback);
    }
  }

  const long n = ctx.exp.n_iterates;
  const int directions = 40;
  const int levels = 9;

  PerturbationReport report;
  {
    const auto spec = lyapunov::qr_spectrum(base, src, n, derive_seed(degenerate_seed, "orbit"));
    const auto verdict = lyapunov::simplicity_check(spec, ctx.exp.gap_tolerance);
    report.baseline_min_gap = verdict.min_gap;
    report.rows.push_back({0, -1, 0.0, verdict.min_gap, verdict.simple});
  }

  std::vector<double> slopes;
  for (int m = 1; m <= directions; ++m) {
    // one random direction: a table of unit-disc matrices scaled to operator
    // norm one across all entries
    Rng drng(derive_seed(degenerate_seed, "direction", static_cast<std::uint64_t>(m)));
    auto draw = [&]() {
      CMatrix dm(d);
      for (int i = 0; i < d; ++i)
        for (int jj = 0; jj < d; ++jj) dm.at(i, jj) = drng.unit_disc();
      return dm;
    };
    CMatrix dir_fallback = draw();
    std::map<cocycle::Word, CMatrix> dir_table;
    double max_norm = operator_norm(dir_fallback);
    for (const auto& [w, mat] : base.table) {
      (void)mat;
      CMatrix dm = draw();
      max_norm = std::max(max_norm, operator_norm(dm));
      dir_table.emplace(w, std::move(dm));
    }
    const double inv = 1.0 / max_norm;

    std::vector<double> xs, ys;
    for (int j = 0; j < levels; ++j) {
      const double eps = cc.epsilon * std::pow(2.0, -j);
      cocycle::CocycleGenerator pert = base;
      pert.fallback = base.fallback + dir_fallback.scaled(eps * inv);
      for (auto& [w, mat] : pert.table) {
        mat = mat + dir_table.at(w).scaled(eps * inv);
      }
      PerturbationRow row;
      row.direction = m;
      row.level = j;
      row.epsilon = eps;
      try {
        const auto spec =
            lyapunov::qr_spectrum(pert, src, n, derive_seed(degenerate_seed, "orbit"));
        const auto verdict = lyapunov::simplicity_check(spec, ctx.exp.gap_tolerance);
        row.min_gap = verdict.min_gap;
        row.simple = verdict.simple;
      } catch (const std::exception&) {
        row.min_gap = 0.0;
        row.simple = false;
      }
      if (row.simple) {
        xs.push_back(std::log(eps));
        ys.push_back(std::log(row.min_gap));
      }
      report.rows.push_back(row);
    }
    if (xs.size() >= 3) {  // least-squares slope for this direction
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      double num = 0, den = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
      }
      if (den > 0) slopes.push_back(num / den);
    }
  }
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    report.median_loglog_slope = slopes[slopes.size() / 2];
  }

  std::filesystem::create_directories(ctx.out);
  CsvWriter w(ctx.out / "perturbation.csv");
  for (const std::string& line : provenance(ctx)) w.comment(line);
  w.row({"direction", "level", "epsilon", "min_gap", "simple"});
  for (const PerturbationRow& r : report.rows) {
    w.row({format_int(r.direction), format_int(r.level), format_double(r.epsilon),
           format_double(r.min_gap), r.simple ? "1" : "0"});
  }
  w.close();
  return report;
}

void cmd_spectrum(const RunContext& ctx, std::optional<std::uint64_t> gen_seed,
                  std::optional<std::filesystem::path> gen_json) {
  const Artifacts art = load_or_build_artifacts(ctx, true);
  const CocycleConfig cc = cocycle_config(ctx.config);
  const auto src = measure::OrbitSource::bernoulli(&art.scheme, art.branch_probs);

  cocycle::CocycleGenerator gen;
  if (gen_json) {
    gen = cocycle::generator_from_json(read_text_file(*gen_json));
  } else {
    const std::vector<int> symbols = top_symbols(art.branch_probs, 64);
    gen = cocycle::sample_fiber_bunched(gen_seed.value_or(ctx.exp.seed), cc.d, cc.depth, symbols,
                                        cc.epsilon, art.sys.skew.theta, cc.eta, cc.tau);
  }

  cocycle::SuspensionCocycle susp;
  susp.generator = gen;
  susp.system = std::make_shared<model::GeometricLorenzSystem>(art.sys);
  susp.scheme = std::make_shared<inducing::InducingScheme>(art.scheme);
  const auto rel = lyapunov::flow_spectrum_relation(susp, src, ctx.exp.n_iterates,
                                                    derive_seed(ctx.exp.seed, "spectrum"));
  const auto verdict = lyapunov::simplicity_check(rel.induced, ctx.exp.gap_tolerance);

  json j = provenance_json(ctx);
  j["d"] = gen.d;
  j["depth"] = gen.depth;
  j["n_used"] = rel.induced.n_used;
  j["time_scale"] = "per-return";
  j["exponents"] = rel.induced.exponents;
  j["half_widths"] = rel.induced.half_widths;
  j["simple"] = verdict.simple;
  j["min_gap"] = verdict.min_gap;
  j["gap_tolerance"] = ctx.exp.gap_tolerance;
  j["mean_T"] = rel.mean_return_time;
  json flow;
  flow["time_scale"] = "per-flow-time";
  flow["exponents"] = rel.flow.exponents;
  flow["half_widths"] = rel.flow.half_widths;
  flow["max_relative_gap"] = rel.max_relative_gap;
  j["flow"] = std::move(flow);
  std::filesystem::create_directories(ctx.out);
  write_text_file(ctx.out / "spectrum.json", j.dump(2) + "\n");
}

int cmd_verify(const RunContext& ctx) {
  return checks::run_verify(ctx) ? 0 : 1;
}

}  // namespace lorenzlab::experiment
