#pragma once

#include <cstdint>
#include <vector>

#include "lorenzlab/inducing.hpp"
#include "lorenzlab/rng.hpp"

namespace lorenzlab::measure {

// A finite stretch of a symbolic orbit together with the interval points
// realizing it: points[k] lies in branch symbols[k] and maps to points[k+1]
// under the induced map.
struct SymbolicOrbit {
  std::vector<int> symbols;
  std::vector<double> points;
};

// Seeded orbit generator over the induced system.
//
// bernoulli: symbols are drawn i.i.d. from the supplied branch distribution
// (estimated branch measure); the realizing points are produced by backward
// pullback from a padded tail, which is exact to within the padding
// contraction and never iterates through the expansion blow-up near the
// singular leaf.
//
// induced: honest forward iteration of the induced map from a seeded start;
// gap hits restart the orbit and are counted.
class OrbitSource {
 public:
  static OrbitSource bernoulli(const inducing::InducingScheme* scheme,
                               std::vector<double> branch_probs);
  static OrbitSource induced(const inducing::InducingScheme* scheme);
  // degenerate single-symbol source for constant-generator tests
  static OrbitSource fixed_symbol(int symbol, int alphabet = 1);

  std::vector<int> symbols(std::uint64_t seed, long n) const;
  SymbolicOrbit orbit(std::uint64_t seed, long n) const;

  const inducing::InducingScheme* scheme() const { return scheme_; }
  long restarts(std::uint64_t seed, long n) const;  // induced mode diagnostics

 private:
  enum class Mode { bernoulli, induced, fixed };
  Mode mode_ = Mode::fixed;
  const inducing::InducingScheme* scheme_ = nullptr;
  std::vector<double> cdf_;  // bernoulli mode
  int fixed_symbol_ = 1;

  int draw_symbol(lorenzlab::Rng& rng) const;
  SymbolicOrbit induced_orbit(std::uint64_t seed, long n, long* restarts) const;
};

}  // namespace lorenzlab::measure
