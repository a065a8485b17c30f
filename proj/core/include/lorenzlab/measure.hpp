#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "lorenzlab/inducing.hpp"
#include "lorenzlab/lorenz_model.hpp"
#include "lorenzlab/orbit.hpp"

namespace lorenzlab::measure {

// Piecewise-constant density on an equal-bin grid; weights are density values,
// so sum(weights) * bin_width == 1.
struct DensityEstimate {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> weights;
  double fixed_point_residual = 0.0;  // L1 residual of the discrete transfer operator
  long skipped_samples = 0;

  int bins() const { return static_cast<int>(weights.size()); }
  double bin_width() const { return (hi - lo) / static_cast<double>(weights.size()); }
  double integral() const;
  double value_at(double x) const;
  double sample(Rng& rng) const;  // inverse-CDF draw
};

// Ulam discretization of the transfer operator with Monte-Carlo column
// sampling, solved by power iteration to residual 1e-12.
DensityEstimate ulam_density(const model::LorenzMapParams& map, int bins, int mc_samples,
                             std::uint64_t seed);

// Generic core used by the Lorenz entry point and by test stubs with known
// invariant densities.
DensityEstimate ulam_density_of(const std::function<double(double)>& map1d, double lo, double hi,
                                int bins, int mc_samples, std::uint64_t seed);

// mu-hat weight of every branch: the density mass over the branch domain,
// normalized across branches.
std::vector<double> branch_measure(const inducing::InducingScheme& s, const DensityEstimate& d);

struct SectionMeasureSample {
  std::vector<model::SectionPoint> points;
  std::vector<double> weights;  // sum to 1
  int generation = 0;
  long skipped = 0;
};

// Places density-distributed mass on the leaf y = 0 and pushes it forward n
// times through the Poincare map.
SectionMeasureSample lift_pushforward(const model::GeometricLorenzSystem& sys,
                                      const DensityEstimate& density, int n, long samples,
                                      std::uint64_t seed);

struct TestFunction {
  const char* name;
  double (*f)(double, double);
  double lip_y;  // Lipschitz constant in the fiber coordinate
};

std::span<const TestFunction> test_function_dictionary();  // 10 entries, |f| <= 1

double integrate(const SectionMeasureSample& sample, const TestFunction& tf);

// Coupled estimate of |∫f d(P^{n+1}_* m) - ∫f d(P^n_* m)| for n = 0..n_max:
// each sample pair shares its leaf, so every gap is surely bounded by
// lip_y * gamma * beta^n.
std::vector<double> pushforward_gaps(const model::GeometricLorenzSystem& sys,
                                     const DensityEstimate& density, const TestFunction& tf,
                                     int n_max, long samples, std::uint64_t seed);

// n-term product of induced-derivative ratios along the common past of x:
// the two pullback chains start from the decoded x_hat and y_hat futures.
double jacobian_ratio(const inducing::InducingScheme& s, const inducing::Itinerary& x_hat,
                      const inducing::Itinerary& y_hat, const inducing::Itinerary& x, int n);

struct ProductDensityEntry {
  std::vector<int> s_word;  // past word, most recent symbol last
  std::vector<int> u_word;  // future word
  long count = 0;           // occurrences along the orbit
  double omega_hat = 0.0;   // unnormalized density at the cylinder
  double z_s = 0.0;         // conditional normalizer of the past word
  double omega = 0.0;       // omega_hat / z_s
  double empirical_ratio = 0.0;  // mu[s,u] / (mu_s[s] mu_u[u]) from counting
};

struct ProductDensityEstimate {
  int depth = 0;
  long orbit_length = 0;
  long scanned_positions = 0;
  int n_truncation = 30;
  double bound_c = 0.0;  // all omegas lie in [1/bound_c, bound_c]
  std::vector<ProductDensityEntry> entries;
};

// Estimates the product-structure density on depth-k cylinder pairs observed
// along a long induced orbit. omega_hat averages the n_truncation-term
// jacobian ratio against the reference future over the empirical cylinder
// representatives; z_s is its conditional average over the past word alone.
ProductDensityEstimate product_density(const inducing::InducingScheme& s, int depth,
                                       long mc_samples, std::uint64_t seed,
                                       int n_truncation = 30);

struct BirkhoffEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  long n = 0;
};

// Batch-means estimate: mean of the series with a half-width from the spread
// of (up to) `blocks` block averages.
BirkhoffEstimate birkhoff_average(std::span<const double> values, int blocks = 30);

enum class Observable { one, return_time, total_return_time };

std::vector<double> observable_series(const model::GeometricLorenzSystem& sys,
                                      const inducing::InducingScheme& s,
                                      const SymbolicOrbit& orbit, Observable obs);

BirkhoffEstimate birkhoff_average(Observable obs, const model::GeometricLorenzSystem& sys,
                                  const inducing::InducingScheme& s, const OrbitSource& src,
                                  long n, std::uint64_t seed);

void write_density_csv(const std::filesystem::path& path, const DensityEstimate& d,
                       const std::vector<std::string>& provenance = {});
DensityEstimate read_density_csv(const std::filesystem::path& path);

void write_product_density_csv(const std::filesystem::path& path,
                               const ProductDensityEstimate& pd);

}  // namespace lorenzlab::measure
