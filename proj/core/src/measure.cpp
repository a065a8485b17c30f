#include "lorenzlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"

namespace lorenzlab::measure {

double DensityEstimate::integral() const {
  double s = 0.0;
  for (const double w : weights) s += w;
  return s * bin_width();
}

double DensityEstimate::value_at(double x) const {
  if (x < lo || x > hi) return 0.0;
  const double h = bin_width();
  int i = static_cast<int>((x - lo) / h);
  i = std::min(std::max(i, 0), bins() - 1);
  return weights[static_cast<std::size_t>(i)];
}

double DensityEstimate::sample(Rng& rng) const {
  const double h = bin_width();
  double u = rng.uniform() * integral() / h;  // in units of summed weights
  std::size_t i = 0;
  for (; i + 1 < weights.size(); ++i) {
    if (u < weights[i]) break;
    u -= weights[i];
  }
  const double frac = weights[i] > 0.0 ? std::min(u / weights[i], 1.0) : rng.uniform();
  return lo + h * (static_cast<double>(i) + frac);
}

DensityEstimate ulam_density_of(const std::function<double(double)>& map1d, double lo, double hi,
                                int bins, int mc_samples, std::uint64_t seed) {
  if (bins < 2) throw ConfigError("ulam_density: bins must be at least 2");
  if (mc_samples < 1) throw ConfigError("ulam_density: mc_samples must be positive");
  const double h = (hi - lo) / bins;
  Rng rng(derive_seed(seed, "ulam"));
  // sparse column-stochastic transition matrix from per-bin image sampling
  std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(bins));
  long skipped = 0;
  std::vector<int> hits(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    std::fill(hits.begin(), hits.end(), 0);
    int kept = 0;
    for (int k = 0; k < mc_samples; ++k) {
      const double x = lo + h * (static_cast<double>(i) + rng.uniform());
      double y;
      try {
        y = map1d(x);
      } catch (const std::domain_error&) {
        ++skipped;
        continue;
      }
      int j = static_cast<int>((y - lo) / h);
      j = std::min(std::max(j, 0), bins - 1);
      ++hits[static_cast<std::size_t>(j)];
      ++kept;
    }
    if (kept == 0) throw ConvergenceError("ulam_density: empty column " + format_int(i), 0.0);
    auto& col = cols[static_cast<std::size_t>(i)];
    for (int j = 0; j < bins; ++j) {
      if (hits[static_cast<std::size_t>(j)] > 0) {
        col.emplace_back(j, static_cast<double>(hits[static_cast<std::size_t>(j)]) / kept);
      }
    }
  }
  // power iteration on bin masses
  std::vector<double> mass(static_cast<std::size_t>(bins), 1.0 / bins);
  std::vector<double> next(static_cast<std::size_t>(bins));
  const double target = 1e-12;
  double residual = 1.0;
  const int max_iter = 200000;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < bins; ++i) {
      const double m = mass[static_cast<std::size_t>(i)];
      if (m == 0.0) continue;
      for (const auto& [j, pr] : cols[static_cast<std::size_t>(i)]) {
        next[static_cast<std::size_t>(j)] += pr * m;
      }
    }
    double total = 0.0;
    for (const double v : next) total += v;
    for (double& v : next) v /= total;
    residual = 0.0;
    for (int j = 0; j < bins; ++j) {
      residual += std::abs(next[static_cast<std::size_t>(j)] - mass[static_cast<std::size_t>(j)]);
    }
    mass.swap(next);
    if (residual <= target) break;
  }
  if (residual > target) {
    throw ConvergenceError("ulam_density: power iteration stalled, residual = " +
                               format_double(residual),
                           residual);
  }
  DensityEstimate d;
  d.lo = lo;
  d.hi = hi;
  d.weights.resize(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    d.weights[static_cast<std::size_t>(i)] = mass[static_cast<std::size_t>(i)] / h;
  }
  d.fixed_point_residual = residual;
  d.skipped_samples = skipped;
  return d;
}

DensityEstimate ulam_density(const model::LorenzMapParams& map, int bins, int mc_samples,
                             std::uint64_t seed) {
  map.validate();
  return ulam_density_of([&map](double x) { return model::lorenz_map_eval(map, x); }, -1.0, 1.0,
                         bins, mc_samples, seed);
}

std::vector<double> branch_measure(const inducing::InducingScheme& s, const DensityEstimate& d) {
  const double h = d.bin_width();
  std::vector<double> out(s.branches.size(), 0.0);
  double total = 0.0;
  for (std::size_t bi = 0; bi < s.branches.size(); ++bi) {
    const auto& b = s.branches[bi];
    const int j_lo = std::max(0, static_cast<int>(std::floor((b.left - d.lo) / h)));
    const int j_hi = std::min(d.bins() - 1, static_cast<int>(std::floor((b.right - d.lo) / h)));
    double m = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double bin_l = d.lo + h * j;
      const double bin_r = bin_l + h;
      const double overlap = std::min(bin_r, b.right) - std::max(bin_l, b.left);
      if (overlap > 0.0) m += overlap * d.weights[static_cast<std::size_t>(j)];
    }
    out[bi] = m;
    total += m;
  }
  if (!(total > 0.0)) throw ConvergenceError("branch_measure: zero mass on the scheme", 0.0);
  for (double& v : out) v /= total;
  return out;
}

SectionMeasureSample lift_pushforward(const model::GeometricLorenzSystem& sys,
                                      const DensityEstimate& density, int n, long samples,
                                      std::uint64_t seed) {
  if (n < 0) throw ConfigError("lift_pushforward: n must be nonnegative");
  if (samples < 1) throw ConfigError("lift_pushforward: samples must be positive");
  Rng rng(derive_seed(seed, "lift", static_cast<std::uint64_t>(n)));
  SectionMeasureSample out;
  out.generation = n;
  out.points.reserve(static_cast<std::size_t>(samples));
  for (long k = 0; k < samples; ++k) {
    model::SectionPoint p{density.sample(rng), 0.0};
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      if (std::abs(p.x) <= model::kSingularTolerance) {
        ok = false;
        break;
      }
      p = model::poincare_eval(sys, p);
    }
    if (!ok) {
      ++out.skipped;
      continue;
    }
    out.points.push_back(p);
  }
  if (out.points.empty()) {
    throw ConvergenceError("lift_pushforward: every sample hit the singular leaf", 0.0);
  }
  out.weights.assign(out.points.size(), 1.0 / static_cast<double>(out.points.size()));
  return out;
}

namespace {

double tf_y(double, double y) { return y; }
double tf_xy(double x, double y) { return x * y; }
double tf_y2(double, double y) { return y * y; }
double tf_cos_pi_y(double, double y) { return std::cos(std::numbers::pi * y); }
double tf_sin_pi_y(double, double y) { return std::sin(std::numbers::pi * y); }
double tf_x_plus_y(double x, double y) { return 0.5 * (x + y); }
double tf_abs_y(double, double y) { return std::abs(y) - 0.5; }
double tf_exp_ym1(double, double y) { return std::exp(y - 1.0); }
double tf_x(double x, double) { return x; }
double tf_sin_pi_x(double x, double) { return std::sin(std::numbers::pi * x); }

constexpr TestFunction kDictionary[] = {
    {"y", tf_y, 1.0},
    {"xy", tf_xy, 1.0},
    {"y2", tf_y2, 2.0},
    {"cos_pi_y", tf_cos_pi_y, std::numbers::pi},
    {"sin_pi_y", tf_sin_pi_y, std::numbers::pi},
    {"x_plus_y", tf_x_plus_y, 0.5},
    {"abs_y", tf_abs_y, 1.0},
    {"exp_ym1", tf_exp_ym1, 1.0},
    {"x", tf_x, 0.0},
    {"sin_pi_x", tf_sin_pi_x, 0.0},
};

}  // namespace

std::span<const TestFunction> test_function_dictionary() { return kDictionary; }

double integrate(const SectionMeasureSample& sample, const TestFunction& tf) {
  double s = 0.0;
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    s += sample.weights[i] * tf.f(sample.points[i].x, sample.points[i].y);
  }
  return s;
}

std::vector<double> pushforward_gaps(const model::GeometricLorenzSystem& sys,
                                     const DensityEstimate& density, const TestFunction& tf,
                                     int n_max, long samples, std::uint64_t seed) {
  if (n_max < 0) throw ConfigError("pushforward_gaps: n_max must be nonnegative");
  Rng rng(derive_seed(seed, "pushforward_gaps"));
  std::vector<double> acc(static_cast<std::size_t>(n_max) + 1, 0.0);
  long kept = 0;
  for (long k = 0; k < samples; ++k) {
    const double x0 = density.sample(rng);
    if (std::abs(x0) <= model::kSingularTolerance) continue;
    // both chains start on the leaf of g(x0): one carries the fiber offset of
    // one extra application of P, the other starts at the leaf midpoint
    model::SectionPoint a = model::poincare_eval(sys, {x0, 0.0});
    model::SectionPoint b{a.x, 0.0};
    bool ok = true;
    for (int n = 0; n <= n_max; ++n) {
      acc[static_cast<std::size_t>(n)] += tf.f(a.x, a.y) - tf.f(b.x, b.y);
      if (n == n_max) break;
      if (std::abs(a.x) <= model::kSingularTolerance) {
        ok = false;
        break;
      }
      a = model::poincare_eval(sys, a);
      b = model::poincare_eval(sys, b);
    }
    if (ok) ++kept;
  }
  if (kept == 0) throw ConvergenceError("pushforward_gaps: no surviving samples", 0.0);
  for (double& v : acc) v = std::abs(v) / static_cast<double>(kept);
  return acc;
}

double jacobian_ratio(const inducing::InducingScheme& s, const inducing::Itinerary& x_hat,
                      const inducing::Itinerary& y_hat, const inducing::Itinerary& x, int n) {
  if (n < 0) throw ConfigError("jacobian_ratio: n must be nonnegative");
  if (static_cast<int>(x.past.size()) < n) {
    throw LengthError("jacobian_ratio: x carries fewer than n past symbols");
  }
  const int depth_x = std::min<int>(static_cast<int>(x_hat.future.size()), 48);
  const int depth_y = std::min<int>(static_cast<int>(y_hat.future.size()), 48);
  double p = decode(s, x_hat, depth_x).point;
  double q = decode(s, y_hat, depth_y).point;
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) {
    const inducing::Branch& b = s.branch(x.past[static_cast<std::size_t>(i - 1)]);
    p = s.induced_inverse(b, p);
    q = s.induced_inverse(b, q);
    acc += s.induced_log_derivative(b, p) - s.induced_log_derivative(b, q);
  }
  return std::exp(acc);
}

namespace {

struct WordStats {
  long count = 0;
  std::vector<long> positions;  // first occurrences, capped
};

}  // namespace

ProductDensityEstimate product_density(const inducing::InducingScheme& s, int depth,
                                       long mc_samples, std::uint64_t seed, int n_truncation) {
  if (depth < 1) throw ConfigError("product_density: depth must be at least 1");
  if (n_truncation < 1 || n_truncation > 48) {
    throw ConfigError("product_density: n_truncation must lie in [1, 48]");
  }
  if (mc_samples < 1000) throw ConfigError("product_density: mc_samples too small");

  const OrbitSource src = OrbitSource::induced(&s);
  const SymbolicOrbit orb = src.orbit(derive_seed(seed, "product_density"), mc_samples);
  const long n = static_cast<long>(orb.symbols.size());

  // log ghat' along the orbit; the backward pullbacks of an orbit point
  // through its own past are just earlier orbit points, valid only across
  // links where the orbit did not restart after a gap hit
  std::vector<double> logd(static_cast<std::size_t>(n));
  std::vector<long> dirty_prefix(static_cast<std::size_t>(n) + 1, 0);
  for (long i = 0; i < n; ++i) {
    const inducing::Branch& b = s.branch(orb.symbols[static_cast<std::size_t>(i)]);
    logd[static_cast<std::size_t>(i)] =
        s.induced_log_derivative(b, orb.points[static_cast<std::size_t>(i)]);
    long dirty = 0;
    if (i + 1 < n) {
      const double image = s.induced_map(b, orb.points[static_cast<std::size_t>(i)]);
      if (image != orb.points[static_cast<std::size_t>(i + 1)]) dirty = 1;
    }
    dirty_prefix[static_cast<std::size_t>(i) + 1] = dirty_prefix[static_cast<std::size_t>(i)] + dirty;
  }
  const auto links_clean = [&](long a, long b) {  // links a .. b-1
    return dirty_prefix[static_cast<std::size_t>(b)] == dirty_prefix[static_cast<std::size_t>(a)];
  };

  // reference future: the periodic itinerary of the leftmost branch
  std::vector<int> ref_syms(48, 1);
  const double ref_point = decode(s, inducing::Itinerary::unilateral(ref_syms), 48).point;

  const long start = n_truncation + depth;
  const long stop = n - depth;
  if (stop <= start) throw ConfigError("product_density: orbit too short for the window scan");

  std::map<std::vector<int>, WordStats> pair_stats;   // (s-word | u-word) concatenated
  std::map<std::vector<int>, WordStats> s_stats;      // past words
  std::map<std::vector<int>, long> s_counts, u_counts;
  const std::size_t pair_position_cap = 256;
  const std::size_t s_position_cap = 2048;

  std::vector<int> sw(static_cast<std::size_t>(depth));
  std::vector<int> uw(static_cast<std::size_t>(depth));
  std::vector<int> key(static_cast<std::size_t>(2 * depth));
  long scanned = 0;
  for (long i = start; i < stop; ++i) {
    if (!links_clean(i - n_truncation, i + depth - 1)) continue;
    for (int k = 0; k < depth; ++k) {
      sw[static_cast<std::size_t>(k)] = orb.symbols[static_cast<std::size_t>(i - depth + k)];
      uw[static_cast<std::size_t>(k)] = orb.symbols[static_cast<std::size_t>(i + k)];
      key[static_cast<std::size_t>(k)] = sw[static_cast<std::size_t>(k)];
      key[static_cast<std::size_t>(depth + k)] = uw[static_cast<std::size_t>(k)];
    }
    ++scanned;
    ++s_counts[sw];
    ++u_counts[uw];
    WordStats& ps = pair_stats[key];
    ++ps.count;
    if (ps.positions.size() < pair_position_cap) ps.positions.push_back(i);
    WordStats& ss = s_stats[sw];
    ++ss.count;
    if (ss.positions.size() < s_position_cap) ss.positions.push_back(i);
  }

  // omega_hat at an occurrence: n-term ratio of the reference pullback
  // against the orbit's own pullback along the same realized past
  auto omega_hat_at = [&](long i) {
    double p = ref_point;
    double acc = 0.0;
    for (int j = 1; j <= n_truncation; ++j) {
      const int sym = orb.symbols[static_cast<std::size_t>(i - j)];
      const inducing::Branch& b = s.branch(sym);
      p = s.induced_inverse(b, p);
      acc += s.induced_log_derivative(b, p) - logd[static_cast<std::size_t>(i - j)];
    }
    return std::exp(acc);
  };

  // occurrence floor scales with the scan so small budgets still report,
  // while large runs only keep well-resolved cylinders
  const long floor_count = std::max<long>(32, scanned / 5000);
  std::vector<std::pair<long, std::vector<int>>> ranked;
  for (const auto& [k, st] : pair_stats) {
    if (st.count >= floor_count) ranked.emplace_back(st.count, k);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (ranked.size() > 64) ranked.resize(64);
  if (ranked.empty()) {
    throw ConvergenceError("product_density: no cylinder pair reached the occurrence floor",
                           static_cast<double>(floor_count));
  }

  std::map<std::vector<int>, double> z_cache;
  auto z_of = [&](const std::vector<int>& sword) {
    const auto it = z_cache.find(sword);
    if (it != z_cache.end()) return it->second;
    const WordStats& st = s_stats.at(sword);
    double acc = 0.0;
    for (const long i : st.positions) acc += omega_hat_at(i);
    const double z = acc / static_cast<double>(st.positions.size());
    z_cache[sword] = z;
    return z;
  };

  ProductDensityEstimate pd;
  pd.depth = depth;
  pd.orbit_length = n;
  pd.scanned_positions = scanned;
  pd.n_truncation = n_truncation;
  double c_bound = 1.0;
  for (const auto& [count, k] : ranked) {
    ProductDensityEntry e;
    e.s_word.assign(k.begin(), k.begin() + depth);
    e.u_word.assign(k.begin() + depth, k.end());
    e.count = count;
    const WordStats& ps = pair_stats.at(k);
    double acc = 0.0;
    for (const long i : ps.positions) acc += omega_hat_at(i);
    e.omega_hat = acc / static_cast<double>(ps.positions.size());
    e.z_s = z_of(e.s_word);
    e.omega = e.omega_hat / e.z_s;
    const double ps_m = static_cast<double>(s_counts.at(e.s_word)) / scanned;
    const double pu_m = static_cast<double>(u_counts.at(e.u_word)) / scanned;
    const double p4 = static_cast<double>(count) / scanned;
    e.empirical_ratio = p4 / (ps_m * pu_m);
    if (!(e.omega > 0.0) || !std::isfinite(e.omega)) {
      throw ConvergenceError("product_density: non-positive omega estimate", e.omega);
    }
    c_bound = std::max({c_bound, e.omega, 1.0 / e.omega});
    pd.entries.push_back(std::move(e));
  }
  pd.bound_c = c_bound;
  return pd;
}

BirkhoffEstimate birkhoff_average(std::span<const double> values, int blocks) {
  if (values.empty()) throw ConfigError("birkhoff_average: empty series");
  BirkhoffEstimate est;
  est.n = static_cast<long>(values.size());
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  est.mean = mean;
  const int nb = std::min<long>(blocks, static_cast<long>(values.size()));
  const std::size_t block_len = values.size() / static_cast<std::size_t>(nb);
  if (nb < 2 || block_len == 0) {
    est.half_width = 0.0;
    return est;
  }
  double bm_mean = 0.0;
  std::vector<double> bm(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < block_len; ++i) {
      s += values[static_cast<std::size_t>(b) * block_len + i];
    }
    bm[static_cast<std::size_t>(b)] = s / static_cast<double>(block_len);
    bm_mean += bm[static_cast<std::size_t>(b)];
  }
  bm_mean /= nb;
  double var = 0.0;
  for (const double v : bm) var += (v - bm_mean) * (v - bm_mean);
  var /= (nb - 1);
  est.half_width = std::sqrt(var / nb);
  return est;
}

std::vector<double> observable_series(const model::GeometricLorenzSystem& sys,
                                      const inducing::InducingScheme& s,
                                      const SymbolicOrbit& orbit, Observable obs) {
  std::vector<double> out(orbit.symbols.size());
  for (std::size_t i = 0; i < orbit.symbols.size(); ++i) {
    switch (obs) {
      case Observable::one:
        out[i] = 1.0;
        break;
      case Observable::return_time:
        out[i] = static_cast<double>(s.branch(orbit.symbols[i]).time);
        break;
      case Observable::total_return_time:
        out[i] = inducing::total_return_time_T(sys, s, {orbit.points[i], 0.0});
        break;
    }
  }
  return out;
}

BirkhoffEstimate birkhoff_average(Observable obs, const model::GeometricLorenzSystem& sys,
                                  const inducing::InducingScheme& s, const OrbitSource& src,
                                  long n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("birkhoff_average: n must be positive");
  const SymbolicOrbit orbit = src.orbit(seed, n);
  const std::vector<double> series = observable_series(sys, s, orbit, obs);
  return birkhoff_average(series);
}

void write_density_csv(const std::filesystem::path& path, const DensityEstimate& d,
                       const std::vector<std::string>& provenance) {
  CsvWriter w(path);
  for (const std::string& line : provenance) w.comment(line);
  w.row({"bin_left", "bin_right", "weight"});
  const double h = d.bin_width();
  for (int i = 0; i < d.bins(); ++i) {
    const double l = d.lo + h * i;
    w.row({format_double(l), format_double(l + h),
           format_double(d.weights[static_cast<std::size_t>(i)])});
  }
  w.close();
}

DensityEstimate read_density_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"bin_left", "bin_right", "weight"}) {
    throw IoError("density csv: unexpected header");
  }
  if (t.rows.empty()) throw IoError("density csv: no bins");
  DensityEstimate d;
  d.lo = parse_double(t.rows.front()[0]);
  d.hi = parse_double(t.rows.back()[1]);
  d.weights.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    if (row.size() != 3) throw IoError("density csv: malformed row");
    d.weights.push_back(parse_double(row[2]));
  }
  const double total = d.integral();
  if (std::abs(total - 1.0) > 1e-9) {
    throw InconsistencyError("density csv: integral " + format_double(total) + " is not 1");
  }
  return d;
}

void write_product_density_csv(const std::filesystem::path& path,
                               const ProductDensityEstimate& pd) {
  CsvWriter w(path);
  w.row({"s_word", "u_word", "count", "omega", "omega_hat", "z_s", "empirical_ratio"});
  auto join = [](const std::vector<int>& word) {
    std::string s;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (i) s += '|';
      s += format_int(word[i]);
    }
    return s;
  };
  for (const auto& e : pd.entries) {
    w.row({join(e.s_word), join(e.u_word), format_int(e.count), format_double(e.omega),
           format_double(e.omega_hat), format_double(e.z_s),
           format_double(e.empirical_ratio)});
  }
  w.close();
}

}  // namespace lorenzlab::measure
