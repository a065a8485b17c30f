#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lorenzlab/config.hpp"

namespace lorenzlab::model {

// Vector field parameters of the classical three-dimensional system.
struct OdeParams {
  double a = 10.0;
  double b = 28.0;
  double c = 8.0 / 3.0;
  void validate() const;
};

// One-dimensional quotient map g(x) = sign(x) * (scale*|x|^rho - 1) on
// I = [-1,1]: odd, expanding with min |g'| = scale*rho attained at |x| = 1,
// two-valued at the discontinuity with g(0+) = -1, g(0-) = +1 and infinite
// one-sided derivatives there.
struct LorenzMapParams {
  double rho = 0.75;   // branch exponent, in (1/2, 1)
  double scale = 2.0;  // branch amplitude, in (0, 2]
  double min_derivative() const { return scale * rho; }
  void validate() const;
};

// Fiber contraction h(x,y) = beta*y + gamma*sign(x). The two image strips
// [gamma-beta, gamma+beta] and [-gamma-beta, -gamma+beta] must be disjoint
// and contained in [-1,1].
struct SkewParams {
  double beta = 0.2;
  double gamma = 0.5;
  double theta = 0.25;  // global contraction constant, beta <= theta < 1
  void validate() const;
};

// Return time to the cross section: R(x) = c0 + c1 * (-log|x|), blowing up
// logarithmically on the singular leaf x = 0.
struct RoofParams {
  double c0 = 1.0;
  double c1 = 0.5;
  void validate() const;
};

struct GeometricLorenzSystem {
  LorenzMapParams map;
  SkewParams skew;
  RoofParams roof;
  OdeParams ode;

  void validate() const;
  static GeometricLorenzSystem from_config(const Config& cfg);
  void to_config(Config& cfg) const;
};

// Points within this distance of the singular leaf x = 0 are treated as on it;
// the map derivative and the roof blow up there.
inline constexpr double kSingularTolerance = 1e-14;

double lorenz_map_eval(const LorenzMapParams& p, double x);
double lorenz_map_derivative(const LorenzMapParams& p, double x);

struct ExpansionReport {
  double min_derivative;    // infimum of |g'| over I, attained at |x| = 1
  bool exceeds_sqrt2;
};
ExpansionReport verify_expansion(const LorenzMapParams& p);

struct SectionPoint {
  double x = 0.0;
  double y = 0.0;
};

SectionPoint poincare_eval(const GeometricLorenzSystem& sys, SectionPoint p);

double roof_eval(const RoofParams& p, double x);

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

Vec3 ode_vector_field(const OdeParams& p, const Vec3& s);

struct EquilibriumReport {
  std::array<double, 3> eigenvalues;  // ascending
  double discriminant;
  // 0 < -alpha_s < alpha_u: expansion dominates the weak contraction
  bool expansion_exceeds_weak_contraction;
  // 0 < -alpha_ss < alpha_u: expansion dominates the strong contraction
  bool expansion_exceeds_strong_contraction;
  bool saddle_value_positive;  // alpha_s + alpha_u > 0
};

// Linearization at the origin: the (x,y) block contributes the roots of
// t^2 + (a+1) t - a(b-1) = 0 and the z axis contributes -c.
EquilibriumReport equilibrium_eigenvalues(const OdeParams& p);

struct TrajectoryPoint {
  Vec3 state;
  double t;
};

// Fixed-step classical 4th-order integration; throws IntegrationError with
// the offending step index when the state leaves the finite range.
std::vector<TrajectoryPoint> integrate_flow(const OdeParams& p, Vec3 start, double dt, long steps);

struct AttractorSample {
  std::vector<SectionPoint> points;
  long skipped = 0;  // near-singular iterates discarded and restarted
};

AttractorSample sample_attractor(const GeometricLorenzSystem& sys, std::uint64_t seed,
                                 long n_iterates, long burn_in);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryPoint>& traj);
void write_section_csv(const std::filesystem::path& path,
                       const std::vector<SectionPoint>& points);

}  // namespace lorenzlab::model
