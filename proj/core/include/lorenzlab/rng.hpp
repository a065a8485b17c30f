#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace lorenzlab {

// Deterministic random source. mt19937_64 is fully pinned by the standard and
// the floating-point draws below avoid std::uniform_real_distribution, whose
// output is implementation-defined; identical seeds give identical streams on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // uniform in [0, 1), 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  long uniform_index(long n) {  // in [0, n)
    return static_cast<long>(eng_() % static_cast<std::uint64_t>(n));
  }

  // standard normal via Box-Muller
  double gaussian();

  // uniform on the closed unit disc of the complex plane
  std::complex<double> unit_disc();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable stream derivation: mixes a master seed with a textual tag and two
// indices so that independent consumers never share a stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace lorenzlab
