#include "lorenzlab/orbit.hpp"

#include <algorithm>
#include <cmath>

#include "lorenzlab/errors.hpp"

namespace lorenzlab::measure {

OrbitSource OrbitSource::bernoulli(const inducing::InducingScheme* scheme,
                                   std::vector<double> branch_probs) {
  if (scheme == nullptr) throw ConfigError("OrbitSource::bernoulli: scheme required");
  if (branch_probs.size() != scheme->branches.size()) {
    throw ConfigError("OrbitSource::bernoulli: one probability per branch required");
  }
  OrbitSource src;
  src.mode_ = Mode::bernoulli;
  src.scheme_ = scheme;
  src.cdf_.resize(branch_probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < branch_probs.size(); ++i) {
    if (branch_probs[i] < 0.0) throw ConfigError("OrbitSource: negative branch probability");
    acc += branch_probs[i];
    src.cdf_[i] = acc;
  }
  if (!(acc > 0.0)) throw ConfigError("OrbitSource: branch probabilities sum to zero");
  for (double& c : src.cdf_) c /= acc;
  src.cdf_.back() = 1.0;
  return src;
}

OrbitSource OrbitSource::induced(const inducing::InducingScheme* scheme) {
  if (scheme == nullptr) throw ConfigError("OrbitSource::induced: scheme required");
  OrbitSource src;
  src.mode_ = Mode::induced;
  src.scheme_ = scheme;
  return src;
}

OrbitSource OrbitSource::fixed_symbol(int symbol, int alphabet) {
  (void)alphabet;
  OrbitSource src;
  src.mode_ = Mode::fixed;
  src.fixed_symbol_ = symbol;
  return src;
}

int OrbitSource::draw_symbol(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  return static_cast<int>(std::min(i, cdf_.size() - 1)) + 1;
}

std::vector<int> OrbitSource::symbols(std::uint64_t seed, long n) const {
  if (n < 0) throw ConfigError("OrbitSource: n must be nonnegative");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  switch (mode_) {
    case Mode::fixed: {
      out.assign(static_cast<std::size_t>(n), fixed_symbol_);
      break;
    }
    case Mode::bernoulli: {
      Rng rng(derive_seed(seed, "orbit.symbols"));
      for (long k = 0; k < n; ++k) out.push_back(draw_symbol(rng));
      break;
    }
    case Mode::induced: {
      out = induced_orbit(seed, n, nullptr).symbols;
      break;
    }
  }
  return out;
}

SymbolicOrbit OrbitSource::orbit(std::uint64_t seed, long n) const {
  if (n < 0) throw ConfigError("OrbitSource: n must be nonnegative");
  switch (mode_) {
    case Mode::fixed:
      throw ConfigError("OrbitSource: fixed-symbol source has no realizing points");
    case Mode::induced:
      return induced_orbit(seed, n, nullptr);
    case Mode::bernoulli:
      break;
  }
  // backward pullback: pad the symbol stream, seed the tail at the padded
  // branch midpoint, and pull back; padding contraction (< min |ghat'|^-1 per
  // step) makes the retained points exact to double precision
  const int pad = 48;
  Rng rng(derive_seed(seed, "orbit.symbols"));
  std::vector<int> syms;
  syms.reserve(static_cast<std::size_t>(n) + pad);
  for (long k = 0; k < n + pad; ++k) syms.push_back(draw_symbol(rng));
  SymbolicOrbit orb;
  orb.symbols.assign(syms.begin(), syms.begin() + n);
  orb.points.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return orb;
  const auto& s = *scheme_;
  double y = 0.0;
  {
    const inducing::Branch& last = s.branch(syms.back());
    y = 0.5 * (last.left + last.right);
  }
  for (long k = n + pad - 2; k >= 0; --k) {
    const inducing::Branch& b = s.branch(syms[static_cast<std::size_t>(k)]);
    y = s.induced_inverse(b, y);
    if (k < n) orb.points[static_cast<std::size_t>(k)] = y;
  }
  return orb;
}

SymbolicOrbit OrbitSource::induced_orbit(std::uint64_t seed, long n, long* restarts) const {
  Rng rng(derive_seed(seed, "orbit.induced"));
  const auto& s = *scheme_;
  SymbolicOrbit orb;
  orb.symbols.reserve(static_cast<std::size_t>(n));
  orb.points.reserve(static_cast<std::size_t>(n));
  long restart_count = 0;
  // the induced map expands by min |ghat'| > 4 per step, so a short burn-in
  // mixes fully; gap hits restart the orbit and must not demand an
  // uninterrupted run (the truncated alphabet makes long clean runs rare)
  const long burn_target = 64;
  long burned = 0;
  double x = 0.0;
  int branch = -1;
  auto restart = [&]() {
    do {
      x = rng.uniform(-s.delta, s.delta);
      branch = s.branch_at(x);
    } while (branch < 0);
    burned = 0;
  };
  restart();
  while (static_cast<long>(orb.symbols.size()) < n) {
    if (branch < 0) {
      ++restart_count;
      restart();
      continue;
    }
    if (burned < burn_target) {
      x = s.induced_map(s.branch(branch), x);
      branch = s.branch_at(x);
      ++burned;
      continue;
    }
    orb.symbols.push_back(branch);
    orb.points.push_back(x);
    x = s.induced_map(s.branch(branch), x);
    branch = s.branch_at(x);
  }
  if (restarts != nullptr) *restarts = restart_count;
  return orb;
}

long OrbitSource::restarts(std::uint64_t seed, long n) const {
  if (mode_ != Mode::induced) return 0;
  long r = 0;
  induced_orbit(seed, n, &r);
  return r;
}

}  // namespace lorenzlab::measure
