#include "lorenzlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/measure.hpp"

namespace lorenzlab::lyapunov {

double LyapunovSpectrum::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (const double v : gaps) g = std::min(g, v);
  return gaps.empty() ? 0.0 : g;
}

double LyapunovSpectrum::sum() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0.0);
}

namespace {

// Sort exponent streams by their means (descending) and fill gaps.
void finalize(LyapunovSpectrum& spec, const std::vector<std::vector<double>>& streams, long n) {
  const int d = static_cast<int>(streams.size());
  std::vector<int> order(static_cast<std::size_t>(d));
  std::vector<double> means(static_cast<std::size_t>(d));
  std::vector<double> hws(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto est = measure::birkhoff_average(streams[static_cast<std::size_t>(i)]);
    means[static_cast<std::size_t>(i)] = est.mean;
    hws[static_cast<std::size_t>(i)] = est.half_width;
    order[static_cast<std::size_t>(i)] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return means[static_cast<std::size_t>(a)] > means[static_cast<std::size_t>(b)]; });
  spec.exponents.resize(static_cast<std::size_t>(d));
  spec.half_widths.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    spec.exponents[static_cast<std::size_t>(i)] = means[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    spec.half_widths[static_cast<std::size_t>(i)] = hws[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  spec.gaps.resize(d > 1 ? static_cast<std::size_t>(d - 1) : 0);
  for (int i = 0; i + 1 < d; ++i) {
    spec.gaps[static_cast<std::size_t>(i)] =
        spec.exponents[static_cast<std::size_t>(i)] - spec.exponents[static_cast<std::size_t>(i + 1)];
  }
  spec.n_used = n;
}

std::span<const int> lead_at(std::span<const int> symbols, long j, int depth) {
  if (depth == 0) return {};
  return symbols.subspan(static_cast<std::size_t>(j));
}

void require_symbols(std::span<const int> symbols, long n, int depth, const char* who) {
  if (n < 1) throw ConfigError(std::string(who) + ": n must be positive");
  if (depth > 0 && static_cast<long>(symbols.size()) < n - 1 + depth) {
    throw LengthError(std::string(who) + ": symbol stream shorter than n - 1 + depth");
  }
}

}  // namespace

LyapunovSpectrum qr_spectrum_symbols(const cocycle::CocycleGenerator& g,
                                     std::span<const int> symbols, long n) {
  require_symbols(symbols, n, g.depth, "qr_spectrum");
  const int d = g.d;
  CMatrix q = CMatrix::identity(d);
  std::vector<std::vector<double>> streams(static_cast<std::size_t>(d));
  for (auto& s : streams) s.reserve(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    const CMatrix& a = g.value(lead_at(symbols, j, g.depth));
    const auto qr = qr_positive(a * q);
    q = qr.q;
    for (int i = 0; i < d; ++i) {
      const double rii = qr.r.at(i, i).real();
      if (!(rii > 1e-300)) {
        throw UnderflowError("qr_spectrum: R diagonal underflow at step " + format_int(j) +
                             "; reduce n or rescale the generator");
      }
      streams[static_cast<std::size_t>(i)].push_back(std::log(rii));
    }
  }
  LyapunovSpectrum spec;
  spec.time_scale = TimeScale::per_return;
  finalize(spec, streams, n);
  return spec;
}

LyapunovSpectrum qr_spectrum(const cocycle::CocycleGenerator& g, const measure::OrbitSource& src,
                             long n, std::uint64_t seed) {
  const std::vector<int> symbols = src.symbols(seed, n - 1 + std::max(g.depth, 1));
  return qr_spectrum_symbols(g, symbols, n);
}

LyapunovSpectrum brute_force_spectrum_symbols(const cocycle::CocycleGenerator& g,
                                              std::span<const int> symbols, long n) {
  require_symbols(symbols, n, g.depth, "brute_force_spectrum");
  if (n > 2000) {
    throw ConfigError("brute_force_spectrum: n capped at 2000 (cost guard)");
  }
  const int d = g.d;
  // Raw 20-factor blocks, triangulated only at block boundaries: the flag
  // volumes are extracted from directly assembled products, which is the
  // independent path checked against the per-step recursion. A single global
  // product cannot hold the smallest direction once the spread exceeds the
  // double-precision range, so the block boundary also factors the frame out.
  CMatrix frame = CMatrix::identity(d);
  std::vector<double> flag_logs(static_cast<std::size_t>(d), 0.0);
  CMatrix block = CMatrix::identity(d);
  // sigma route: global product with the largest singular value factored out
  // into a log accumulator every 20 factors
  CMatrix prod = CMatrix::identity(d);
  double log_acc = 0.0;
  auto checkpoint = [&]() {
    const auto qr = qr_positive(block * frame);
    frame = qr.q;
    for (int i = 0; i < d; ++i) {
      const double rii = qr.r.at(i, i).real();
      if (!(rii > 1e-300)) {
        throw UnderflowError("brute_force_spectrum: block underflow; reduce n");
      }
      flag_logs[static_cast<std::size_t>(i)] += std::log(rii);
    }
    block = CMatrix::identity(d);
  };
  for (long j = 0; j < n; ++j) {
    const CMatrix& a = g.value(lead_at(symbols, j, g.depth));
    block = a * block;
    prod = a * prod;
    if ((j + 1) % 20 == 0) {
      checkpoint();
      const double smax = operator_norm(prod);
      if (!(smax > 1e-300)) {
        throw UnderflowError("brute_force_spectrum: product underflow at step " +
                             format_int(j));
      }
      prod = prod.scaled(1.0 / smax);
      log_acc += std::log(smax);
    }
  }
  if (n % 20 != 0) checkpoint();

  LyapunovSpectrum spec;
  spec.time_scale = TimeScale::per_return;
  spec.n_used = n;
  const std::vector<double> sv = singular_values(prod);
  spec.singular_exponents.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double s = sv[static_cast<std::size_t>(i)];
    if (!(s > 1e-300)) {
      throw UnderflowError("brute_force_spectrum: vanishing singular value; reduce n");
    }
    spec.singular_exponents[static_cast<std::size_t>(i)] =
        (log_acc + std::log(s)) / static_cast<double>(n);
  }
  spec.exponents.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    spec.exponents[static_cast<std::size_t>(i)] =
        flag_logs[static_cast<std::size_t>(i)] / static_cast<double>(n);
  }
  std::sort(spec.exponents.begin(), spec.exponents.end(), std::greater<double>());
  spec.half_widths.assign(static_cast<std::size_t>(d), 0.0);
  spec.gaps.resize(d > 1 ? static_cast<std::size_t>(d - 1) : 0);
  for (int i = 0; i + 1 < d; ++i) {
    spec.gaps[static_cast<std::size_t>(i)] =
        spec.exponents[static_cast<std::size_t>(i)] - spec.exponents[static_cast<std::size_t>(i + 1)];
  }
  return spec;
}

LyapunovSpectrum brute_force_spectrum(const cocycle::CocycleGenerator& g,
                                      const measure::OrbitSource& src, long n,
                                      std::uint64_t seed) {
  const std::vector<int> symbols = src.symbols(seed, n - 1 + std::max(g.depth, 1));
  return brute_force_spectrum_symbols(g, symbols, n);
}

SimplicityVerdict simplicity_check(const LyapunovSpectrum& spec, double gap_tolerance) {
  if (!(gap_tolerance > 0.0)) {
    throw ConfigError("simplicity_check: gap_tolerance must be positive");
  }
  SimplicityVerdict v;
  v.gap_tolerance = gap_tolerance;
  v.min_gap = spec.min_gap();
  int run = 1;
  for (const double g : spec.gaps) {
    if (g <= gap_tolerance) {
      ++run;  // same cluster under the transitive closure
    } else {
      v.multiplicity_pattern.push_back(run);
      run = 1;
    }
  }
  if (!spec.exponents.empty()) v.multiplicity_pattern.push_back(run);
  v.simple = true;
  for (const int m : v.multiplicity_pattern) {
    if (m != 1) v.simple = false;
  }
  if (spec.exponents.size() <= 1) v.simple = spec.exponents.size() == 1;
  return v;
}

FlowSpectrumRelation flow_spectrum_relation(const cocycle::SuspensionCocycle& susp,
                                            const measure::OrbitSource& src, long n,
                                            std::uint64_t seed,
                                            const FlowRelationOptions& opts) {
  if (n < 1) throw ConfigError("flow_spectrum_relation: n must be positive");
  const auto& g = susp.generator;
  const measure::SymbolicOrbit orbit = src.orbit(seed, n - 1 + std::max(g.depth, 1));

  FlowSpectrumRelation rel;
  rel.induced = qr_spectrum_symbols(g, orbit.symbols, n);

  // elapsed flow time along the same orbit
  double s_n = 0.0;
  if (opts.constant_roof) {
    s_n = *opts.constant_roof * static_cast<double>(n);
  } else {
    for (long j = 0; j < n; ++j) {
      s_n += inducing::total_return_time_T(*susp.system, *susp.scheme,
                                           {orbit.points[static_cast<std::size_t>(j)], 0.0});
    }
  }
  rel.orbit_mean_return_time = s_n / static_cast<double>(n);

  // measure-level mean return time from an independently seeded orbit
  if (opts.constant_roof) {
    rel.mean_return_time = *opts.constant_roof;
    rel.mean_return_half_width = 0.0;
  } else {
    const auto est = measure::birkhoff_average(measure::Observable::total_return_time,
                                               *susp.system, *susp.scheme, src, n,
                                               derive_seed(seed, "mean_T"));
    rel.mean_return_time = est.mean;
    rel.mean_return_half_width = est.half_width;
  }

  rel.flow = rel.induced;
  rel.flow.time_scale = TimeScale::per_flow_time;
  for (std::size_t i = 0; i < rel.flow.exponents.size(); ++i) {
    rel.flow.exponents[i] = rel.induced.exponents[i] / rel.mean_return_time;
    rel.flow.half_widths[i] = rel.induced.half_widths[i] / rel.mean_return_time;
  }
  for (std::size_t i = 0; i < rel.flow.gaps.size(); ++i) {
    rel.flow.gaps[i] = rel.induced.gaps[i] / rel.mean_return_time;
  }

  // direct route: the same accumulated log growth divided by s_n
  double scale = 0.0;
  double worst = 0.0;
  std::vector<double> direct(rel.induced.exponents.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    direct[i] = rel.induced.exponents[i] * static_cast<double>(n) / s_n;
    scale = std::max(scale, std::abs(direct[i]));
  }
  for (std::size_t i = 0; i < direct.size(); ++i) {
    worst = std::max(worst, std::abs(rel.flow.exponents[i] - direct[i]));
  }
  rel.max_relative_gap = scale > 0.0 ? worst / scale : 0.0;
  return rel;
}

}  // namespace lorenzlab::lyapunov
