#include "lorenzlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace lorenzlab {

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  do {
    u = uniform();
  } while (u <= 0.0);
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double a = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::complex<double> Rng::unit_disc() {
  const double r = std::sqrt(uniform());
  const double a = 2.0 * std::numbers::pi * uniform();
  return {r * std::cos(a), r * std::sin(a)};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the tag
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  h = splitmix64(h ^ splitmix64(master));
  h = splitmix64(h ^ splitmix64(a * 0x9e3779b97f4a7c15ull + 1));
  h = splitmix64(h ^ splitmix64(b * 0xd1342543de82ef95ull + 2));
  return h;
}

}  // namespace lorenzlab
