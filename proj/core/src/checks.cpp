#include "lorenzlab/checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>

#include <nlohmann/json.hpp>

#include "lorenzlab/cocycle.hpp"
#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/rng.hpp"
#include "lorenzlab/version.hpp"

namespace lorenzlab::checks {

using json = nlohmann::ordered_json;
using cocycle::CocycleGenerator;

namespace {

double elapsed_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CheckResult make(std::string module, std::string name, bool passed, double observed,
                 double bound, std::string detail = {}) {
  return {std::move(module), std::move(name), passed, observed, bound, std::move(detail)};
}

CMatrix diag_matrix(std::initializer_list<double> entries) {
  CMatrix m(static_cast<int>(entries.size()));
  int i = 0;
  for (const double v : entries) {
    m.at(i, i) = v;
    ++i;
  }
  return m;
}

CocycleGenerator constant_generator(const CMatrix& m) {
  CocycleGenerator g;
  g.d = m.dim();
  g.depth = 0;
  g.fallback = m;
  return g;
}

CMatrix plain_transpose(const CMatrix& m) {
  CMatrix out(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) out.at(j, i) = m.at(i, j);
  return out;
}

double max_entry_rel_error(const CMatrix& a, const CMatrix& b) {
  double worst = 0.0;
  double scale = std::max(a.frobenius_norm(), b.frobenius_norm());
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / scale);
  }
  return worst;
}

std::vector<int> random_word(Rng& rng, const std::vector<int>& symbols, int len) {
  std::vector<int> w(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    w[static_cast<std::size_t>(i)] =
        symbols[static_cast<std::size_t>(rng.uniform_index(static_cast<long>(symbols.size())))];
  }
  return w;
}

}  // namespace

CheckContext make_check_context(const experiment::RunContext& run, bool prefer_load) {
  CheckContext ctx{run, experiment::load_or_build_artifacts(run, prefer_load), {}};
  ctx.symbols = experiment::top_symbols(ctx.art.branch_probs, 64);
  return ctx;
}

// ---------------------------------------------------------------------------
// acceptance criteria
// ---------------------------------------------------------------------------

namespace {

struct OracleTrialData {
  std::vector<lyapunov::LyapunovSpectrum> qr;
  std::vector<lyapunov::LyapunovSpectrum> brute;
  std::vector<CocycleGenerator> gens;
  std::vector<std::vector<int>> symbol_streams;
  double elapsed = 0.0;
};

OracleTrialData run_oracle_trials(const CheckContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto src = measure::OrbitSource::bernoulli(&ctx.art.scheme, ctx.art.branch_probs);
  OracleTrialData data;
  const long n = 200;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + (t % 3);
    const double eps = 0.6 / d;
    const std::uint64_t trial_seed =
        derive_seed(ctx.run.exp.seed, "oracle", static_cast<std::uint64_t>(t));
    auto gen = cocycle::sample_fiber_bunched(trial_seed, d, 1, ctx.symbols, eps,
                                             ctx.art.sys.skew.theta, 1.0, 0.95);
    auto symbols = src.symbols(derive_seed(trial_seed, "orbit"), n + 1);
    data.qr.push_back(lyapunov::qr_spectrum_symbols(gen, symbols, n));
    data.brute.push_back(lyapunov::brute_force_spectrum_symbols(gen, symbols, n));
    data.gens.push_back(std::move(gen));
    data.symbol_streams.push_back(std::move(symbols));
  }
  data.elapsed = elapsed_seconds(t0);
  return data;
}

CheckResult criterion_spectrum_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto gen = constant_generator(diag_matrix({2.0, 1.0, 0.5}));
  const auto src = measure::OrbitSource::fixed_symbol(1);
  const auto spec = lyapunov::qr_spectrum(gen, src, 1000, 1);
  const double expected[3] = {std::log(2.0), 0.0, -std::log(2.0)};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    worst = std::max(worst, std::abs(spec.exponents[static_cast<std::size_t>(i)] - expected[i]));
  }
  const double secs = elapsed_seconds(t0);
  return make("acceptance", "01_spectrum_exactness", worst <= 1e-10 && secs < 1.0, worst, 1e-10,
              "constant diag(2,1,1/2), n=1000, " + format_double(secs) + " s");
}

CheckResult criterion_oracle_equivalence(const OracleTrialData& data) {
  double worst = 0.0;
  for (std::size_t t = 0; t < data.qr.size(); ++t) {
    for (std::size_t i = 0; i < data.qr[t].exponents.size(); ++i) {
      worst = std::max(worst, std::abs(data.qr[t].exponents[i] - data.brute[t].exponents[i]));
    }
  }
  const bool ok = worst <= 1e-6 && data.elapsed < 30.0;
  return make("acceptance", "02_oracle_equivalence", ok, worst, 1e-6,
              "100 trials, d in {2,3,4}, n=200, " + format_double(data.elapsed) + " s");
}

CheckResult criterion_determinant_conservation(const OracleTrialData& data) {
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_diff = 0.0, worst_bound = 0.0;
  for (std::size_t t = 0; t < data.qr.size(); ++t) {
    const auto& gen = data.gens[t];
    const auto& symbols = data.symbol_streams[t];
    const long n = data.qr[t].n_used;
    std::vector<double> det_series(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
      const std::span<const int> lead(symbols.data() + j, symbols.size() - static_cast<std::size_t>(j));
      det_series[static_cast<std::size_t>(j)] = std::log(std::abs(determinant(gen.value(lead))));
    }
    const auto det_est = measure::birkhoff_average(det_series);
    double hw_sum = det_est.half_width;
    for (const double hw : data.qr[t].half_widths) hw_sum += hw;
    const double diff = std::abs(data.qr[t].sum() - det_est.mean);
    if (diff - hw_sum > worst_excess) {
      worst_excess = diff - hw_sum;
      worst_diff = diff;
      worst_bound = hw_sum;
    }
  }
  return make("acceptance", "03_determinant_conservation", worst_excess <= 0.0, worst_diff,
              worst_bound, "max |sum(lambda) - mean log|det|| against combined half-widths");
}

CheckResult criterion_expansion_bound(const CheckContext& ctx) {
  const auto rep = model::verify_expansion(ctx.art.sys.map);
  const bool exact = rep.min_derivative == ctx.art.sys.map.scale * ctx.art.sys.map.rho;
  const bool ok = exact && rep.min_derivative > 1.41422 && rep.exceeds_sqrt2;
  return make("acceptance", "04_expansion_bound", ok, rep.min_derivative, 1.41422,
              "closed-form min |g'| = scale * rho");
}

CheckResult criterion_scheme_validity(const CheckContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sp = inducing::SchemeParams::from_config(ctx.run.config);
  const auto scheme = inducing::build_inducing_scheme(ctx.art.sys.map, sp);
  const double secs = elapsed_seconds(t0);
  double worst_residual = 0.0;
  for (const auto& b : scheme.branches) {
    worst_residual = std::max(worst_residual, b.endpoint_residual);
  }
  const bool ok = worst_residual <= 1e-8 && scheme.coverage >= 0.99 && secs < 60.0;
  return make("acceptance", "05_scheme_validity", ok, scheme.coverage, 0.99,
              format_int(static_cast<long long>(scheme.branches.size())) +
                  " branches, worst endpoint residual " + format_double(worst_residual) + ", " +
                  format_double(secs) + " s");
}

CheckResult criterion_distortion(const CheckContext& ctx) {
  const auto train = inducing::check_distortion_global(
      ctx.art.scheme, 10000, derive_seed(ctx.run.exp.seed, "dist.train"), true);
  const auto val = inducing::check_distortion_global(
      ctx.art.scheme, 10000, derive_seed(ctx.run.exp.seed, "dist.val"), false);
  bool bound_holds = true;
  double worst_ratio = 0.0;
  for (std::size_t n = 1; n < val.bin_max.size(); ++n) {
    if (val.pair_counts[n] == 0) continue;
    const double cap = std::pow(train.c_fit, static_cast<double>(n));
    worst_ratio = std::max(worst_ratio, val.bin_max[n] / cap);
    if (val.bin_max[n] > cap + 1e-12) bound_holds = false;
  }
  const bool ok = train.c_fit < 1.0 && bound_holds;
  return make("acceptance", "06_distortion", ok, train.c_fit, 1.0,
              "c_fit from 1e4 pairs + endpoints; fresh 1e4-pair validation ratio " +
                  format_double(worst_ratio));
}

CheckResult criterion_coding_roundtrip(const CheckContext& ctx) {
  const auto& s = ctx.art.scheme;
  Rng rng(derive_seed(ctx.run.exp.seed, "roundtrip"));
  const double bound = 2.0 * s.delta * std::pow(1.5, -15.0);
  long done = 0, attempts = 0;
  double worst_len = 0.0;
  bool contained = true;
  while (done < 1000 && attempts < 20000) {
    ++attempts;
    const double x = rng.uniform(-s.delta, s.delta);
    inducing::Itinerary it;
    try {
      it = inducing::encode(s, x, 15);
    } catch (const PartialItineraryError&) {
      continue;  // gap orbit: draw another point
    }
    const auto dec = inducing::decode(s, it, 15);
    if (!(dec.lo <= x && x <= dec.hi)) contained = false;
    worst_len = std::max(worst_len, dec.length());
    ++done;
  }
  const bool ok = contained && done == 1000 && worst_len <= bound;
  return make("acceptance", "07_coding_roundtrip", ok, worst_len, bound,
              format_int(done) + " points, n=15, containment " +
                  (contained ? "holds" : "VIOLATED"));
}

CheckResult criterion_density_fixed_point(const CheckContext& ctx) {
  const auto& d = ctx.art.density;
  double min_w = std::numeric_limits<double>::infinity();
  for (const double w : d.weights) min_w = std::min(min_w, w);
  const long samples = 20000;
  const auto s1 = measure::lift_pushforward(ctx.art.sys, d, 10, samples,
                                            derive_seed(ctx.run.exp.seed, "lift", 1));
  const auto s2 = measure::lift_pushforward(ctx.art.sys, d, 10, samples,
                                            derive_seed(ctx.run.exp.seed, "lift", 2));
  double worst_gap = 0.0;
  for (const auto& tf : measure::test_function_dictionary()) {
    worst_gap = std::max(worst_gap, std::abs(measure::integrate(s1, tf) - measure::integrate(s2, tf)));
  }
  const double stat_bound = 3.0 / std::sqrt(static_cast<double>(samples));
  const bool ok =
      d.fixed_point_residual <= 1e-10 && min_w > 0.0 && worst_gap <= stat_bound;
  return make("acceptance", "08_density_fixed_point", ok, worst_gap, stat_bound,
              "residual " + format_double(d.fixed_point_residual) + ", min weight " +
                  format_double(min_w));
}

CheckResult criterion_product_structure(const CheckContext& ctx) {
  const auto pd = measure::product_density(ctx.art.scheme, 2, 1000000,
                                           derive_seed(ctx.run.exp.seed, "product"), 30);
  bool ok = std::isfinite(pd.bound_c) && pd.bound_c >= 1.0;
  double worst_sigma = 0.0;  // |ratio - omega| in units of 5/sqrt(count)
  for (const auto& e : pd.entries) {
    const double tol = 5.0 / std::sqrt(static_cast<double>(e.count));
    worst_sigma = std::max(worst_sigma, std::abs(e.empirical_ratio - e.omega) / tol);
    if (std::abs(e.empirical_ratio - e.omega) > tol) ok = false;
    if (!(e.omega >= 1.0 / pd.bound_c - 1e-12 && e.omega <= pd.bound_c + 1e-12)) ok = false;
  }
  return make("acceptance", "09_product_structure", ok, worst_sigma, 1.0,
              "C = " + format_double(pd.bound_c) + ", " +
                  format_int(static_cast<long long>(pd.entries.size())) +
                  " depth-2 cylinder pairs, cross-check in units of 5/sqrt(count)");
}

CheckResult criterion_pushforward_cauchy(const CheckContext& ctx) {
  double worst_ratio = 0.0;
  bool ok = true;
  for (const auto& tf : measure::test_function_dictionary()) {
    const auto gaps = measure::pushforward_gaps(ctx.art.sys, ctx.art.density, tf, 15, 20000,
                                                derive_seed(ctx.run.exp.seed, "cauchy"));
    const double c = tf.lip_y * ctx.art.sys.skew.gamma;
    for (int n = 1; n <= 15; ++n) {
      const double cap = c * std::pow(ctx.art.sys.skew.beta, n) + 1e-12;
      const double g = gaps[static_cast<std::size_t>(n)];
      if (cap > 0.0) worst_ratio = std::max(worst_ratio, g / cap);
      if (g > cap) ok = false;
    }
  }
  return make("acceptance", "10_pushforward_cauchy", ok, worst_ratio, 1.0,
              "coupled gaps against Lip_y * gamma * beta^n, n = 1..15, all 10 test functions");
}

CheckResult criterion_flow_relation(const CheckContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto src = measure::OrbitSource::bernoulli(&ctx.art.scheme, ctx.art.branch_probs);
  const double eps = ctx.run.config.get_double("cocycle", "epsilon", 0.3);
  const int d = static_cast<int>(ctx.run.config.get_int("cocycle", "d", 2));
  auto gen = cocycle::sample_fiber_bunched(derive_seed(ctx.run.exp.seed, "flowgen"), d, 1,
                                           ctx.symbols, eps, ctx.art.sys.skew.theta, 1.0, 0.95);
  cocycle::SuspensionCocycle susp;
  susp.generator = std::move(gen);
  susp.system = std::make_shared<model::GeometricLorenzSystem>(ctx.art.sys);
  susp.scheme = std::make_shared<inducing::InducingScheme>(ctx.art.scheme);
  const auto rel = lyapunov::flow_spectrum_relation(susp, src, 100000,
                                                    derive_seed(ctx.run.exp.seed, "floworbit"));
  const double secs = elapsed_seconds(t0);
  const bool ok = rel.max_relative_gap <= 0.02 && secs < 120.0;
  return make("acceptance", "11_flow_relation", ok, rel.max_relative_gap, 0.02,
              "mean_T " + format_double(rel.mean_return_time) + " vs orbit " +
                  format_double(rel.orbit_mean_return_time) + ", " + format_double(secs) + " s");
}

CheckResult criterion_bunching_checker() {
  const auto id_rep =
      cocycle::fiber_bunching_check(constant_generator(CMatrix::identity(2)), 0.25, 1.0, 0.95);
  const auto bad_rep =
      cocycle::fiber_bunching_check(constant_generator(diag_matrix({2.0, 0.5})), 0.25, 1.0, 0.95);
  const bool ok = std::abs(id_rep.worst_product - 0.25) <= 1e-12 && id_rep.passed &&
                  std::abs(bad_rep.worst_product - 1.0) <= 1e-12 && !bad_rep.passed;
  return make("acceptance", "12_bunching_checker", ok, bad_rep.worst_product, 1.0,
              "identity worst " + format_double(id_rep.worst_product) +
                  " passes; diag(2,1/2) worst " + format_double(bad_rep.worst_product) +
                  " fails");
}

std::pair<CheckResult, experiment::TypicalityReport> criterion_typicality(
    const CheckContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = experiment::run_typicality(ctx.run);
  const double secs = elapsed_seconds(t0);
  bool ok = secs < 1800.0;
  double min_fraction = 1.0;
  std::string detail;
  for (const auto& dim : report.dims) {
    min_fraction = std::min(min_fraction, dim.fraction_simple);
    if (dim.fraction_simple < 0.99) ok = false;
    if (dim.failures * 100 > dim.trials) ok = false;  // > 1% trial errors
    detail += "d=" + format_int(dim.d) + ": " + format_double(dim.fraction_simple) + " ";
  }
  // reproducibility: replay a few trials and compare bitwise
  for (const long t : {0L, ctx.run.exp.trials / 2, ctx.run.exp.trials - 1}) {
    const int d = ctx.run.exp.d_list.front();
    const auto replay = experiment::replay_trial(ctx.run, ctx.art, d, t);
    bool found = false;
    for (const auto& row : report.rows) {
      if (row.d == d && row.seed == replay.seed) {
        found = true;
        if (row.exponents != replay.exponents || row.simple != replay.simple) ok = false;
        break;
      }
    }
    if (!found) ok = false;
  }
  detail += "(" + format_double(secs) + " s)";
  return {make("acceptance", "13_typicality", ok, min_fraction, 0.99, detail), report};
}

CheckResult criterion_determinism(const CheckContext& ctx) {
  namespace fs = std::filesystem;
  Config small = ctx.run.config;
  small.set_int("experiment", "trials", 20);
  small.set_int("experiment", "n_iterates", 2000);
  small.set_int("experiment", "threads", 2);  // output must not depend on threading
  small.set_int("inducing", "max_time", 16);  // rerun economy; any config qualifies
  small.set_double("inducing", "min_length", 1e-7);
  small.set_int("measure", "bins", 256);
  const fs::path dir = ctx.run.out / "determinism";
  std::vector<std::string> mismatch;
  const std::vector<std::string> files = {"system.json", "scheme.csv",  "density.csv",
                                          "typicality.json", "trials.csv", "spectrum.json"};
  // identical config and seed, rerun into the same directory
  const auto run = experiment::make_context(small, dir, std::nullopt, std::nullopt);
  std::vector<std::string> contents_a;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(dir);
    experiment::cmd_build(run);
    experiment::run_typicality(run);
    experiment::cmd_spectrum(run, std::nullopt, std::nullopt);
    for (std::size_t i = 0; i < files.size(); ++i) {
      const std::string text = read_text_file(dir / files[i]);
      if (round == 0) {
        contents_a.push_back(text);
      } else if (contents_a[i] != text) {
        mismatch.push_back(files[i]);
      }
    }
  }
  const bool ok = mismatch.empty();
  std::string detail = "build + typicality + spectrum rerun byte-compare";
  for (const auto& f : mismatch) detail += " DIFF:" + f;
  return make("acceptance", "14_determinism", ok, static_cast<double>(mismatch.size()), 0.0,
              detail);
}

}  // namespace

std::vector<CheckResult> run_acceptance_criteria(const CheckContext& ctx) {
  std::vector<CheckResult> out;
  out.push_back(criterion_spectrum_exactness());
  const auto oracle = run_oracle_trials(ctx);
  out.push_back(criterion_oracle_equivalence(oracle));
  out.push_back(criterion_determinant_conservation(oracle));
  out.push_back(criterion_expansion_bound(ctx));
  out.push_back(criterion_scheme_validity(ctx));
  out.push_back(criterion_distortion(ctx));
  out.push_back(criterion_coding_roundtrip(ctx));
  out.push_back(criterion_density_fixed_point(ctx));
  out.push_back(criterion_product_structure(ctx));
  out.push_back(criterion_pushforward_cauchy(ctx));
  out.push_back(criterion_flow_relation(ctx));
  out.push_back(criterion_bunching_checker());
  auto [typ_result, typ_report] = criterion_typicality(ctx);
  out.push_back(typ_result);
  out.push_back(criterion_determinism(ctx));
  return out;
}

// ---------------------------------------------------------------------------
// module invariants
// ---------------------------------------------------------------------------

namespace {

void lorenz_invariants(const CheckContext& ctx, std::vector<CheckResult>& out) {
  const auto& map = ctx.art.sys.map;
  const auto& sys = ctx.art.sys;
  Rng rng(derive_seed(ctx.run.exp.seed, "lorenz_invariants"));

  {  // odd symmetry, bit-identical
    bool ok = true;
    long bad = 0;
    for (long i = 0; i < 1000000; ++i) {
      double x = rng.uniform(-1.0, 1.0);
      if (std::abs(x) <= model::kSingularTolerance) continue;
      if (model::lorenz_map_eval(map, -x) != -model::lorenz_map_eval(map, x)) {
        ok = false;
        ++bad;
      }
    }
    out.push_back(make("lorenz", "odd_symmetry", ok, static_cast<double>(bad), 0.0,
                       "1e6 samples, bit-identical"));
  }
  {  // expansion
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (long i = 0; i < 1000000; ++i) {
      double x = rng.uniform(-1.0, 1.0);
      if (std::abs(x) <= model::kSingularTolerance) continue;
      const double d = model::lorenz_map_derivative(map, x);
      worst = std::min(worst, d);
      if (d < map.min_derivative()) ok = false;
    }
    ok = ok && map.min_derivative() > std::numbers::sqrt2;
    out.push_back(make("lorenz", "expansion_samples", ok, worst, map.min_derivative(),
                       "1e6 samples of |g'|"));
  }
  {  // semiconjugacy g(pi(x)) = pi(P(x)), exact
    bool ok = true;
    for (long i = 0; i < 100000; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double y = rng.uniform(-1.0, 1.0);
      if (std::abs(x) <= model::kSingularTolerance) continue;
      if (model::poincare_eval(sys, {x, y}).x != model::lorenz_map_eval(map, x)) ok = false;
    }
    out.push_back(make("lorenz", "semiconjugacy", ok, 0.0, 0.0, "1e5 samples, exact"));
  }
  {  // fiber contraction |P(x,y1).y - P(x,y2).y| = beta |y1 - y2|
    double worst = 0.0;
    for (long i = 0; i < 100000; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      if (std::abs(x) <= model::kSingularTolerance) continue;
      const double y1 = rng.uniform(-1.0, 1.0);
      const double y2 = rng.uniform(-1.0, 1.0);
      const double lhs =
          std::abs(model::poincare_eval(sys, {x, y1}).y - model::poincare_eval(sys, {x, y2}).y);
      const double rhs = sys.skew.beta * std::abs(y1 - y2);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    // exact up to one rounding of each fiber image (|h| <= 1)
    out.push_back(make("lorenz", "fiber_contraction", worst <= 2e-15, worst, 2e-15,
                       "absolute, one rounding each side"));
  }
  {  // equilibrium eigenvalue identities
    const auto rep = model::equilibrium_eigenvalues(sys.ode);
    // the two quadratic-block eigenvalues are the extremes when c separates
    std::array<double, 3> ev = rep.eigenvalues;
    double lam_ss = ev[0], lam_u = ev[2];
    const double sum = lam_ss + lam_u;
    const double prod = lam_ss * lam_u;
    const double sum_expect = -(sys.ode.a + 1.0);
    const double prod_expect = -sys.ode.a * (sys.ode.b - 1.0);
    const double e1 = std::abs(sum - sum_expect) / std::max(std::abs(sum_expect), 1.0);
    const double e2 = std::abs(prod - prod_expect) / std::max(std::abs(prod_expect), 1.0);
    const bool ok = e1 <= 1e-12 && e2 <= 1e-12 && rep.saddle_value_positive &&
                    rep.expansion_exceeds_weak_contraction;
    out.push_back(make("lorenz", "equilibrium_identities", ok, std::max(e1, e2), 1e-12,
                       "trace/determinant of the planar block; weak ordering holds"));
  }
  {  // integrator order: global error ratio under dt halving
    const model::Vec3 x0{1.0, 1.0, 1.0};
    const double T = 0.4;
    auto endpoint = [&](double dt) {
      const long steps = static_cast<long>(std::llround(T / dt));
      return model::integrate_flow(sys.ode, x0, dt, steps).back().state;
    };
    const auto ref = endpoint(0.0005);
    auto err = [&](double dt) {
      const auto e = endpoint(dt);
      return std::sqrt((e.x - ref.x) * (e.x - ref.x) + (e.y - ref.y) * (e.y - ref.y) +
                       (e.z - ref.z) * (e.z - ref.z));
    };
    const double ratio = err(0.004) / err(0.002);
    out.push_back(make("lorenz", "integrator_order", ratio >= 14.0 && ratio <= 18.0, ratio, 16.0,
                       "global error ratio under dt halving at T=0.4"));
  }
}

void inducing_invariants(const CheckContext& ctx, std::vector<CheckResult>& out) {
  const auto& s = ctx.art.scheme;
  {  // full branch property
    double worst = 0.0;
    for (const auto& b : s.branches) worst = std::max(worst, b.endpoint_residual);
    out.push_back(make("inducing", "full_branch", worst <= 1e-8, worst, 1e-8,
                       "onto-endpoint residual over all branches"));
  }
  {  // Markov disjointness (sorted sweep)
    bool ok = true;
    for (std::size_t i = 0; i + 1 < s.branches.size(); ++i) {
      if (s.branches[i].right > s.branches[i + 1].left + 1e-15) ok = false;
    }
    out.push_back(make("inducing", "markov_disjointness", ok, 0.0, 0.0,
                       format_int(static_cast<long long>(s.branches.size())) + " branches"));
  }
  {  // metric contraction: backward shift scales the distance by exactly theta
    const double theta = inducing::metric_theta(s, ctx.art.sys.skew);
    const inducing::SymbolicMetric metric{theta};
    Rng rng(derive_seed(ctx.run.exp.seed, "metric"));
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto shared_past = random_word(rng, ctx.symbols, 6);
      auto fa = random_word(rng, ctx.symbols, 8);
      auto fb = fa;
      const int split = static_cast<int>(rng.uniform_index(7)) + 1;
      fb[static_cast<std::size_t>(split)] =
          fb[static_cast<std::size_t>(split)] == ctx.symbols[0] ? ctx.symbols[1] : ctx.symbols[0];
      auto a = inducing::Itinerary::make_bilateral(shared_past, fa);
      auto b = inducing::Itinerary::make_bilateral(shared_past, fb);
      const double d0 = symbolic_distance(metric, a, b);
      const double d1 = symbolic_distance(metric, a.shifted_backward(), b.shifted_backward());
      worst = std::max(worst, std::abs(d1 - theta * d0) / (theta * d0));
    }
    out.push_back(make("inducing", "metric_contraction", worst <= 1e-14, worst, 1e-14,
                       "condition (ii) under one backward shift, relative"));
  }
  {  // induced expansion via the chain rule
    Rng rng(derive_seed(ctx.run.exp.seed, "chain"));
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20000; ++i) {
      const double x = rng.uniform(-s.delta, s.delta);
      const int idx = s.branch_at(x);
      if (idx < 0) continue;
      const auto& b = s.branch(idx);
      const double logd = s.induced_log_derivative(b, x);
      const double floor_log =
          b.time * std::log(ctx.art.sys.map.min_derivative()) - 1e-12;
      worst = std::min(worst, logd - floor_log);
      if (logd < floor_log) ok = false;
    }
    out.push_back(make("inducing", "induced_expansion", ok, worst, 0.0,
                       "log |ghat'| >= time * log(min |g'|), 2e4 samples"));
  }
}

void measure_invariants(const CheckContext& ctx, std::vector<CheckResult>& out) {
  {  // normalization
    const double integral = ctx.art.density.integral();
    out.push_back(make("measure", "normalization", std::abs(integral - 1.0) <= 1e-12,
                       std::abs(integral - 1.0), 1e-12, "density integrates to 1"));
  }
  {  // jacobian ratio Cauchy increments
    const auto train = inducing::check_distortion_global(
        ctx.art.scheme, 4000, derive_seed(ctx.run.exp.seed, "dist.jc"), true);
    const auto src = measure::OrbitSource::induced(&ctx.art.scheme);
    const auto orb = src.orbit(derive_seed(ctx.run.exp.seed, "jc.orbit"), 3000);
    Rng rng(derive_seed(ctx.run.exp.seed, "jc.pick"));
    std::vector<int> ref(40, 1);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const long i = 60 + rng.uniform_index(2000);
      std::vector<int> past, future;
      for (long k = 1; k <= 30; ++k) past.push_back(orb.symbols[static_cast<std::size_t>(i - k)]);
      for (long k = 0; k < 30; ++k) future.push_back(orb.symbols[static_cast<std::size_t>(i + k)]);
      const auto x = inducing::Itinerary::make_bilateral(past, future);
      const auto x_hat = inducing::Itinerary::unilateral(ref);
      const auto y_hat = inducing::Itinerary::unilateral(future);
      double prev = std::log(measure::jacobian_ratio(ctx.art.scheme, x_hat, y_hat, x, 1));
      for (int n = 2; n <= 25; ++n) {
        const double cur = std::log(measure::jacobian_ratio(ctx.art.scheme, x_hat, y_hat, x, n));
        const double inc = std::abs(cur - prev);
        const double cap = std::pow(train.c_fit, static_cast<double>(n));
        worst = std::max(worst, cap > 0 ? inc / cap : 0.0);
        if (inc > cap + 1e-12) ok = false;
        prev = cur;
      }
    }
    out.push_back(make("measure", "jacobian_cauchy", ok, worst, 1.0,
                       "|log J(n) - log J(n-1)| against c_fit^n, n <= 25"));
  }
  {  // Birkhoff consistency for T: dynamic orbit against stratified draws
    const auto src = measure::OrbitSource::induced(&ctx.art.scheme);
    const auto est_a = measure::birkhoff_average(measure::Observable::total_return_time,
                                                 ctx.art.sys, ctx.art.scheme, src, 200000,
                                                 derive_seed(ctx.run.exp.seed, "tconsA"));
    Rng rng(derive_seed(ctx.run.exp.seed, "tconsB"));
    std::vector<double> draws;
    draws.reserve(200000);
    long guard = 0;
    while (draws.size() < 200000 && guard < 4000000) {
      ++guard;
      const double x = ctx.art.density.sample(rng);
      if (x < -ctx.art.scheme.delta || x > ctx.art.scheme.delta) continue;
      if (ctx.art.scheme.branch_at(x) < 0) continue;
      draws.push_back(inducing::total_return_time_T(ctx.art.sys, ctx.art.scheme, {x, 0.0}));
    }
    const auto est_b = measure::birkhoff_average(draws);
    const double diff = std::abs(est_a.mean - est_b.mean);
    const double bound = 3.0 * (est_a.half_width + est_b.half_width);
    out.push_back(make("measure", "return_time_consistency", diff <= bound, diff, bound,
                       "int T dmu via orbit vs stratified density draws, 3 sigma"));
  }
}

void cocycle_invariants(const CheckContext& ctx, std::vector<CheckResult>& out) {
  Rng rng(derive_seed(ctx.run.exp.seed, "cocycle_inv"));
  auto gen = cocycle::sample_fiber_bunched(derive_seed(ctx.run.exp.seed, "cocycle_gen"), 3, 1,
                                           ctx.symbols, 0.2, ctx.art.sys.skew.theta, 1.0, 0.95);
  {  // cocycle law
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int m = 1 + static_cast<int>(rng.uniform_index(10));
      const int n = 1 + static_cast<int>(rng.uniform_index(10));
      const auto word = random_word(rng, ctx.symbols, m + n + 2);
      const auto it = inducing::Itinerary::unilateral(word);
      const auto lhs = cocycle::cocycle_product(gen, it, m + n);
      auto shifted = it;
      for (int k = 0; k < n; ++k) shifted = shifted.shifted_forward();
      const auto rhs =
          cocycle::cocycle_product(gen, shifted, m) * cocycle::cocycle_product(gen, it, n);
      worst = std::max(worst, max_entry_rel_error(lhs, rhs));
    }
    out.push_back(make("cocycle", "cocycle_law", worst <= 1e-10, worst, 1e-10,
                       "A^{m+n}(x) = A^m(f^n x) A^n(x), 1000 trials"));
  }
  {  // inverse law
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform_index(8));
      const auto past = random_word(rng, ctx.symbols, n);
      const auto future = random_word(rng, ctx.symbols, 10);
      const auto it = inducing::Itinerary::make_bilateral(past, future);
      auto shifted = it;
      for (int k = 0; k < n; ++k) shifted = shifted.shifted_backward();
      const auto prod = cocycle::cocycle_inverse_product(gen, it, n) *
                        cocycle::cocycle_product(gen, shifted, n);
      worst = std::max(worst, max_entry_rel_error(prod, CMatrix::identity(gen.d)));
    }
    out.push_back(make("cocycle", "inverse_law", worst <= 1e-10, worst, 1e-10,
                       "A^{-n}(x) A^n(f^{-n} x) = id, 500 trials"));
  }
  {  // bunching openness with the provable radius m / (4 max(|A|,|A^-1|)^2)
    bool ok = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
      auto g = cocycle::sample_fiber_bunched(
          derive_seed(ctx.run.exp.seed, "open", static_cast<std::uint64_t>(trial)), 2, 1,
          ctx.symbols, 0.25, ctx.art.sys.skew.theta, 1.0, 0.95);
      const auto rep = cocycle::fiber_bunching_check(g, ctx.art.sys.skew.theta, 1.0, 0.95);
      const double margin = rep.tau - rep.worst_product;
      double big = 1.0;
      auto update = [&](const CMatrix& m) {
        big = std::max({big, operator_norm(m), operator_norm(inverse(m))});
      };
      update(g.fallback);
      for (const auto& [w, m] : g.table) update(m);
      const double radius = margin / (4.0 * big * big);
      cocycle::CocycleGenerator pert = g;
      auto bump = [&](CMatrix& m) {
        CMatrix e(m.dim());
        for (int i = 0; i < m.dim(); ++i)
          for (int j = 0; j < m.dim(); ++j) e.at(i, j) = rng.unit_disc();
        const double norm = operator_norm(e);
        m = m + e.scaled(0.999 * radius / norm);
      };
      bump(pert.fallback);
      for (auto& [w, m] : pert.table) bump(m);
      const auto rep2 = cocycle::fiber_bunching_check(pert, ctx.art.sys.skew.theta, 1.0, 0.95);
      min_margin = std::min(min_margin, rep2.tau - rep2.worst_product);
      if (!rep2.passed) ok = false;
    }
    out.push_back(make("cocycle", "bunching_openness", ok, min_margin, 0.0,
                       "perturbations within m/(4 max(|A|,|A^-1|)^2) keep the condition"));
  }
  {  // suspension consistency at cumulative return times
    cocycle::SuspensionCocycle susp;
    susp.generator = gen;
    susp.system = std::make_shared<model::GeometricLorenzSystem>(ctx.art.sys);
    susp.scheme = std::make_shared<inducing::InducingScheme>(ctx.art.scheme);
    bool ok = true;
    int tested = 0;
    for (int trial = 0; trial < 50 && tested < 20; ++trial) {
      const double x = rng.uniform(-ctx.art.scheme.delta, ctx.art.scheme.delta);
      try {
        const auto it = inducing::encode(ctx.art.scheme, x, 3 + gen.depth);
        // s_3 accumulated in the same order the suspension walks the orbit
        double s3 = 0.0;
        model::SectionPoint p{x, 0.3};
        for (int k = 0; k < 3; ++k) {
          s3 += inducing::total_return_time_T(ctx.art.sys, ctx.art.scheme, p);
          const auto step = inducing::induced_eval(ctx.art.scheme, p.x);
          const auto& b = ctx.art.scheme.branch(step.branch_index);
          double y = p.y, xc = p.x;
          for (int j = 0; j < b.time; ++j) {
            y = ctx.art.sys.skew.beta * y +
                (xc > 0.0 ? ctx.art.sys.skew.gamma : -ctx.art.sys.skew.gamma);
            xc = model::lorenz_map_eval(ctx.art.sys.map, xc);
          }
          p = {step.image, y};
        }
        const auto direct = cocycle::cocycle_product(gen, it, 3);
        const auto via_susp = cocycle::suspension_eval(susp, {x, 0.3}, s3);
        if (!(direct == via_susp)) ok = false;
        ++tested;
      } catch (const std::exception&) {
        continue;  // gap orbits are fine to skip here
      }
    }
    out.push_back(make("cocycle", "suspension_consistency", ok && tested >= 20,
                       static_cast<double>(tested), 20.0,
                       "suspension_eval at s_3 equals the 3-factor product, bitwise"));
  }
  {  // Holder bound from the computed seminorm
    const double theta = inducing::metric_theta(ctx.art.scheme, ctx.art.sys.skew);
    const inducing::SymbolicMetric metric{theta};
    const double eta = 1.0;
    const double semi = cocycle::holder_seminorm(gen, metric, eta, 20000,
                                                 derive_seed(ctx.run.exp.seed, "seminorm"));
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
      const auto wa = random_word(rng, ctx.symbols, 3);
      auto wb = wa;
      if (trial % 2 == 0) wb = random_word(rng, ctx.symbols, 3);
      const auto a = inducing::Itinerary::unilateral(wa);
      const auto b = inducing::Itinerary::unilateral(wb);
      const double dist = symbolic_distance(metric, a, b);
      const double lhs =
          operator_norm(cocycle::generator_eval(gen, a) - cocycle::generator_eval(gen, b));
      if (dist == 0.0) {
        if (lhs != 0.0) worst = std::max(worst, 1e9);
        continue;
      }
      worst = std::max(worst, lhs / (semi * std::pow(dist, eta)));
    }
    out.push_back(make("cocycle", "holder_bound", worst <= 1.0 + 1e-12, worst, 1.0,
                       "||A(x)-A(y)|| <= seminorm * d(x,y)^eta on sampled pairs"));
  }
}

void lyapunov_invariants(const CheckContext& ctx, std::vector<CheckResult>& out) {
  const auto src = measure::OrbitSource::bernoulli(&ctx.art.scheme, ctx.art.branch_probs);
  {  // inversion antisymmetry on the sigma route
    Rng rng(derive_seed(ctx.run.exp.seed, "invanti"));
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 2 + trial % 3;
      auto gen = cocycle::sample_fiber_bunched(
          derive_seed(ctx.run.exp.seed, "invanti", static_cast<std::uint64_t>(trial)), d,
          trial % 2, ctx.symbols, 0.4 / d, ctx.art.sys.skew.theta, 1.0, 0.95);
      cocycle::CocycleGenerator inv_gen = gen;
      inv_gen.fallback = plain_transpose(inverse(gen.fallback));
      for (auto& [w, m] : inv_gen.table) m = plain_transpose(inverse(gen.table.at(w)));
      // n stays small enough that the globally assembled product retains its
      // smallest singular direction in double precision
      const auto symbols = src.symbols(derive_seed(ctx.run.exp.seed, "invanti_orbit"), 61);
      const auto sa = lyapunov::brute_force_spectrum_symbols(gen, symbols, 60);
      const auto sb = lyapunov::brute_force_spectrum_symbols(inv_gen, symbols, 60);
      for (int i = 0; i < d; ++i) {
        const double want = -sa.singular_exponents[static_cast<std::size_t>(d - 1 - i)];
        worst = std::max(worst,
                         std::abs(sb.singular_exponents[static_cast<std::size_t>(i)] - want));
      }
    }
    (void)rng;
    out.push_back(make("lyapunov", "inversion_antisymmetry", worst <= 1e-9, worst, 1e-9,
                       "inverse-transpose entries negate and reverse the spectrum"));
  }
  {  // scaling equivariance with an exact power-of-two scalar
    auto gen = cocycle::sample_fiber_bunched(derive_seed(ctx.run.exp.seed, "scaling"), 3, 1,
                                             ctx.symbols, 0.2, ctx.art.sys.skew.theta, 1.0, 0.95);
    cocycle::CocycleGenerator scaled = gen;
    scaled.fallback = gen.fallback.scaled(2.0);
    for (auto& [w, m] : scaled.table) m = gen.table.at(w).scaled(2.0);
    const auto symbols = src.symbols(derive_seed(ctx.run.exp.seed, "scaling_orbit"), 501);
    const auto sa = lyapunov::qr_spectrum_symbols(gen, symbols, 500);
    const auto sb = lyapunov::qr_spectrum_symbols(scaled, symbols, 500);
    double worst = 0.0;
    for (std::size_t i = 0; i < sa.exponents.size(); ++i) {
      worst = std::max(worst, std::abs(sb.exponents[i] - sa.exponents[i] - std::log(2.0)));
    }
    out.push_back(make("lyapunov", "scaling_equivariance", worst <= 1e-12, worst, 1e-12,
                       "doubling every entry shifts each exponent by log 2"));
  }
}

void experiment_invariants(const CheckContext& ctx, std::vector<CheckResult>& out) {
  // schema stability of the emitted reports
  namespace fs = std::filesystem;
  Config small = ctx.run.config;
  small.set_int("experiment", "trials", 5);
  small.set_int("experiment", "n_iterates", 1000);
  small.set_int("inducing", "max_time", 16);
  small.set_double("inducing", "min_length", 1e-7);
  small.set_int("measure", "bins", 256);
  const fs::path dir = ctx.run.out / "schema_probe";
  fs::remove_all(dir);
  const auto run = experiment::make_context(small, dir, std::nullopt, std::nullopt);
  experiment::cmd_build(run);
  experiment::run_typicality(run);
  experiment::cmd_spectrum(run, std::nullopt, std::nullopt);
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<std::string, std::vector<std::string>>> expectations = {
      {"system.json", {"schema_version", "version", "config_hash", "seed", "lorenz", "scheme"}},
      {"typicality.json", {"schema_version", "per_dimension", "gap_tolerance"}},
      {"spectrum.json", {"schema_version", "exponents", "half_widths", "min_gap", "mean_T"}},
  };
  for (const auto& [file, keys] : expectations) {
    json j;
    try {
      j = json::parse(read_text_file(dir / file));
    } catch (const std::exception&) {
      ok = false;
      detail += " unreadable:" + file;
      continue;
    }
    if (j.value("schema_version", -1) != kSchemaVersion) ok = false;
    for (const auto& key : keys) {
      if (!j.contains(key)) {
        ok = false;
        detail += " missing:" + file + ":" + key;
      }
    }
  }
  out.push_back(make("experiment", "report_schema", ok, 0.0, 0.0,
                     detail.empty() ? "all reports carry schema_version and required keys"
                                    : detail));
}

}  // namespace

std::vector<CheckResult> run_module_invariants(const CheckContext& ctx) {
  std::vector<CheckResult> out;
  lorenz_invariants(ctx, out);
  inducing_invariants(ctx, out);
  measure_invariants(ctx, out);
  cocycle_invariants(ctx, out);
  lyapunov_invariants(ctx, out);
  experiment_invariants(ctx, out);
  return out;
}

std::string format_result_line(const CheckResult& r) {
  std::string line = r.passed ? "[PASS] " : "[FAIL] ";
  line += r.module + "/" + r.name;
  line += "  observed=" + format_double(r.observed) + " bound=" + format_double(r.bound);
  if (!r.detail.empty()) line += "  (" + r.detail + ")";
  return line;
}

bool run_verify(const experiment::RunContext& run) {
  std::vector<CheckResult> results;
  bool context_ok = true;
  try {
    const CheckContext ctx = make_check_context(run, true);
    results = run_module_invariants(ctx);
    const auto acceptance = run_acceptance_criteria(ctx);
    results.insert(results.end(), acceptance.begin(), acceptance.end());
  } catch (const InconsistencyError& e) {
    context_ok = false;
    results.push_back(make("experiment", "artifact_validation", false, 0.0, 0.0, e.what()));
  } catch (const IoError& e) {
    context_ok = false;
    results.push_back(make("experiment", "artifact_validation", false, 0.0, 0.0, e.what()));
  }
  bool all = context_ok;
  for (const auto& r : results) {
    std::puts(format_result_line(r).c_str());
    if (!r.passed) all = false;
  }
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = run.config_hash_hex;
  j["seed"] = run.exp.seed;
  j["passed"] = all;
  json checks = json::array();
  for (const auto& r : results) {
    json c;
    c["module"] = r.module;
    c["name"] = r.name;
    c["passed"] = r.passed;
    c["observed"] = r.observed;
    c["bound"] = r.bound;
    c["detail"] = r.detail;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  std::filesystem::create_directories(run.out);
  write_text_file(run.out / "verify.json", j.dump(2) + "\n");
  return all;
}

}  // namespace lorenzlab::checks
