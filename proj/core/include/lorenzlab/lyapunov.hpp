#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lorenzlab/cocycle.hpp"
#include "lorenzlab/orbit.hpp"

namespace lorenzlab::lyapunov {

enum class TimeScale { per_return, per_flow_time };

struct LyapunovSpectrum {
  std::vector<double> exponents;    // sorted descending
  std::vector<double> half_widths;  // batch-means error estimates, same order
  std::vector<double> gaps;         // consecutive differences, size d-1
  TimeScale time_scale = TimeScale::per_return;
  long n_used = 0;

  // only the assembled-product oracle fills this: (1/n) log singular values
  std::vector<double> singular_exponents;

  double min_gap() const;
  double sum() const;
};

// Discrete QR (Benettin) recursion: Q_{j+1} R_{j+1} = A(f^j x) Q_j from
// Q_0 = id, accumulating the logs of the R diagonal.
LyapunovSpectrum qr_spectrum(const cocycle::CocycleGenerator& g, const measure::OrbitSource& src,
                             long n, std::uint64_t seed);

// Same recursion over an explicit symbol stream (symbols.size() >= n-1+depth).
LyapunovSpectrum qr_spectrum_symbols(const cocycle::CocycleGenerator& g,
                                     std::span<const int> symbols, long n);

// Desk-scale oracle: assembles the full product with a scalar renormalization
// every 20 factors, then reads the exponents from one factorization of the
// result. `exponents` carries the flag-volume (R-diagonal) extraction, which
// measures the same functional as the QR recursion; `singular_exponents`
// carries (1/n) log sigma_i of the assembled product.
LyapunovSpectrum brute_force_spectrum(const cocycle::CocycleGenerator& g,
                                      const measure::OrbitSource& src, long n,
                                      std::uint64_t seed);

LyapunovSpectrum brute_force_spectrum_symbols(const cocycle::CocycleGenerator& g,
                                              std::span<const int> symbols, long n);

struct SimplicityVerdict {
  bool simple = false;
  double min_gap = 0.0;
  double gap_tolerance = 0.0;
  std::vector<int> multiplicity_pattern;  // cluster sizes, top exponent first
};

// Clusters exponents whose consecutive distance is <= gap_tolerance
// (transitive closure); simple iff every cluster is a singleton.
SimplicityVerdict simplicity_check(const LyapunovSpectrum& spec, double gap_tolerance);

struct FlowRelationOptions {
  std::optional<double> constant_roof;  // degenerate test roof T == const
};

struct FlowSpectrumRelation {
  LyapunovSpectrum induced;            // per-return
  LyapunovSpectrum flow;               // induced / mean_T, per flow time
  double mean_return_time = 0.0;       // measure-level estimate, independent orbit
  double mean_return_half_width = 0.0;
  double orbit_mean_return_time = 0.0;  // s_n / n along the spectrum orbit
  double max_relative_gap = 0.0;        // between the two flow-time routes
};

// Computes the induced spectrum and the flow-time spectrum two ways: scaling
// by an independently estimated mean return time, and dividing the same log
// growth by the orbit's own elapsed flow time s_n. The relative discrepancy
// is the finite-n content of the limit-exchange step.
FlowSpectrumRelation flow_spectrum_relation(const cocycle::SuspensionCocycle& susp,
                                            const measure::OrbitSource& src, long n,
                                            std::uint64_t seed,
                                            const FlowRelationOptions& opts = {});

}  // namespace lorenzlab::lyapunov
