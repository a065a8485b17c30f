#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lorenzlab/inducing.hpp"
#include "lorenzlab/matrix.hpp"

namespace lorenzlab::cocycle {

using Word = std::vector<int>;

// Matrix-valued generator over the shift, locally constant at a fixed depth:
// the value at a point is the table entry of its leading `depth` symbols, or
// the fallback entry for words outside the table. Locally constant maps are
// Holder for every exponent and keep the bunching and seminorm computations
// exact over the finite table.
struct CocycleGenerator {
  int d = 1;
  int depth = 0;
  std::map<Word, CMatrix> table;
  CMatrix fallback;

  const CMatrix& value(std::span<const int> leading) const;
  void validate() const;  // every entry invertible (|det| > 1e-12), finite
};

CMatrix generator_eval(const CocycleGenerator& g, const inducing::Itinerary& it);

// Ordered product A(f^{n-1}x) ... A(f x) A(x); A^0 = id.
CMatrix cocycle_product(const CocycleGenerator& g, const inducing::Itinerary& it, int n);

// A^{-n}(x) = (A^n(f^{-n}x))^{-1}; needs n past symbols.
CMatrix cocycle_inverse_product(const CocycleGenerator& g, const inducing::Itinerary& it, int n);

// sup over word pairs of ||A(w1) - A(w2)|| / theta^(eta * s(w1, w2)); exact
// enumeration for small tables, seeded sampling against the enumerated
// upper bound otherwise.
double holder_seminorm(const CocycleGenerator& g, const inducing::SymbolicMetric& metric,
                       double eta, long sample_pairs, std::uint64_t seed);

enum class BunchingMode { exact, sampled };

struct BunchingReport {
  double theta = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  double worst_product = 0.0;  // sup ||A|| ||A^-1|| theta^eta over entries
  Word worst_word;             // empty = fallback entry
  bool passed = false;
};

BunchingReport fiber_bunching_check(const CocycleGenerator& g, double theta, double eta,
                                    double tau, BunchingMode mode = BunchingMode::exact);

// Random generator identity + epsilon * (entries in the unit disc) over the
// given table symbols; re-checks the bunching inequality and resamples on the
// rare failure, so the returned generator always passes.
CocycleGenerator sample_fiber_bunched(std::uint64_t seed, int d, int depth,
                                      std::span<const int> symbols, double epsilon, double theta,
                                      double eta, double tau);

// Cocycle over the suspension flow, represented through its induced generator:
// identity between returns, one generator factor per completed return.
struct SuspensionCocycle {
  CocycleGenerator generator;
  std::shared_ptr<const model::GeometricLorenzSystem> system;
  std::shared_ptr<const inducing::InducingScheme> scheme;
};

// Evaluation at the first-return time; equals the generator value by
// construction.
CMatrix induced_from_suspension(const SuspensionCocycle& susp, model::SectionPoint x);

// Piecewise product up to flow time t: factors accumulate at each return time
// s_1 < s_2 < ... crossed (cadlag: the factor at s_n is included at t = s_n).
CMatrix suspension_eval(const SuspensionCocycle& susp, model::SectionPoint x, double t);

// Bit-exact JSON round trip (shortest round-trip number formatting).
std::string generator_to_json(const CocycleGenerator& g);
CocycleGenerator generator_from_json(const std::string& text);

}  // namespace lorenzlab::cocycle
