#include "lorenzlab/lorenz_model.hpp"

#include <cmath>
#include <numbers>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/rng.hpp"

namespace lorenzlab::model {

void OdeParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) {
    throw ConfigError("[lorenz] ode parameters must be positive");
  }
}

void LorenzMapParams::validate() const {
  if (!(min_derivative() > std::numbers::sqrt2)) {
    throw ConfigError("[lorenz] expansion bound violated: min |g'| = scale*rho = " +
                      format_double(min_derivative()) + " must exceed sqrt(2)");
  }
  if (!(rho > 0.5) || !(rho < 1.0)) {
    throw ConfigError("[lorenz] rho must lie in (1/2, 1)");
  }
  if (!(scale > 0.0) || scale > 2.0) {
    // scale > 2 would push g(1) = scale - 1 outside I
    throw ConfigError("[lorenz] scale must lie in (0, 2]");
  }
}

void SkewParams::validate() const {
  if (!(beta > 0.0) || !(beta < 1.0)) throw ConfigError("[lorenz] beta must lie in (0,1)");
  if (!(theta < 1.0) || !(beta <= theta)) {
    throw ConfigError("[lorenz] theta must satisfy beta <= theta < 1");
  }
  if (!(gamma > beta)) {
    throw ConfigError("[lorenz] image strips overlap: need gamma > beta");
  }
  if (!(gamma + beta <= 1.0)) {
    throw ConfigError("[lorenz] image strips leave [-1,1]: need gamma + beta <= 1");
  }
}

void RoofParams::validate() const {
  if (!(c0 > 0.0) || !(c1 > 0.0)) {
    throw ConfigError("[lorenz] roof coefficients must be positive");
  }
}

void GeometricLorenzSystem::validate() const {
  map.validate();
  skew.validate();
  roof.validate();
  ode.validate();
}

GeometricLorenzSystem GeometricLorenzSystem::from_config(const Config& cfg) {
  GeometricLorenzSystem sys;
  sys.map.rho = cfg.get_double("lorenz", "rho", sys.map.rho);
  sys.map.scale = cfg.get_double("lorenz", "scale", sys.map.scale);
  sys.skew.beta = cfg.get_double("lorenz", "beta", sys.skew.beta);
  sys.skew.gamma = cfg.get_double("lorenz", "gamma", sys.skew.gamma);
  sys.skew.theta = cfg.get_double("lorenz", "theta", sys.skew.theta);
  sys.roof.c0 = cfg.get_double("lorenz", "roof_c0", sys.roof.c0);
  sys.roof.c1 = cfg.get_double("lorenz", "roof_c1", sys.roof.c1);
  sys.ode.a = cfg.get_double("lorenz", "ode_a", sys.ode.a);
  sys.ode.b = cfg.get_double("lorenz", "ode_b", sys.ode.b);
  sys.ode.c = cfg.get_double("lorenz", "ode_c", sys.ode.c);
  sys.validate();
  return sys;
}

void GeometricLorenzSystem::to_config(Config& cfg) const {
  cfg.set_double("lorenz", "rho", map.rho);
  cfg.set_double("lorenz", "scale", map.scale);
  cfg.set_double("lorenz", "beta", skew.beta);
  cfg.set_double("lorenz", "gamma", skew.gamma);
  cfg.set_double("lorenz", "theta", skew.theta);
  cfg.set_double("lorenz", "roof_c0", roof.c0);
  cfg.set_double("lorenz", "roof_c1", roof.c1);
  cfg.set_double("lorenz", "ode_a", ode.a);
  cfg.set_double("lorenz", "ode_b", ode.b);
  cfg.set_double("lorenz", "ode_c", ode.c);
}

namespace {

void require_off_singular_leaf(double x) {
  if (std::abs(x) <= kSingularTolerance) {
    throw std::domain_error("point lies on the singular leaf x = 0");
  }
  if (std::abs(x) > 1.0) {
    throw std::domain_error("point outside I = [-1, 1]");
  }
}

}  // namespace

double lorenz_map_eval(const LorenzMapParams& p, double x) {
  require_off_singular_leaf(x);
  const double ax = std::abs(x);
  const double v = p.scale * std::pow(ax, p.rho) - 1.0;
  return x > 0.0 ? v : -v;
}

double lorenz_map_derivative(const LorenzMapParams& p, double x) {
  require_off_singular_leaf(x);
  return p.scale * p.rho * std::pow(std::abs(x), p.rho - 1.0);
}

ExpansionReport verify_expansion(const LorenzMapParams& p) {
  const double m = p.min_derivative();
  return {m, m > std::numbers::sqrt2};
}

SectionPoint poincare_eval(const GeometricLorenzSystem& sys, SectionPoint p) {
  if (std::abs(p.y) > 1.0) throw std::domain_error("section point outside [-1,1]^2");
  const double gx = lorenz_map_eval(sys.map, p.x);
  const double hy = sys.skew.beta * p.y + (p.x > 0.0 ? sys.skew.gamma : -sys.skew.gamma);
  return {gx, hy};
}

double roof_eval(const RoofParams& p, double x) {
  require_off_singular_leaf(x);
  return p.c0 + p.c1 * (-std::log(std::abs(x)));
}

Vec3 ode_vector_field(const OdeParams& p, const Vec3& s) {
  return {p.a * (s.y - s.x), p.b * s.x - s.y - s.x * s.z, s.x * s.y - p.c * s.z};
}

EquilibriumReport equilibrium_eigenvalues(const OdeParams& p) {
  // (x,y) block [[-a, a],[b, -1]]: t^2 + (a+1) t - a(b-1) = 0
  const double disc = (p.a + 1.0) * (p.a + 1.0) + 4.0 * p.a * (p.b - 1.0);
  if (disc < 0.0) {
    throw std::domain_error("equilibrium eigenvalues are complex: discriminant = " +
                            format_double(disc));
  }
  const double root = std::sqrt(disc);
  const double lam_plus = 0.5 * (-(p.a + 1.0) + root);
  const double lam_minus = 0.5 * (-(p.a + 1.0) - root);
  std::array<double, 3> ev = {lam_minus, -p.c, lam_plus};
  std::sort(ev.begin(), ev.end());
  EquilibriumReport rep;
  rep.eigenvalues = ev;
  rep.discriminant = disc;
  const double alpha_ss = ev[0];
  const double alpha_s = ev[1];
  const double alpha_u = ev[2];
  rep.expansion_exceeds_weak_contraction =
      alpha_s < 0.0 && 0.0 < -alpha_s && -alpha_s < alpha_u;
  rep.expansion_exceeds_strong_contraction =
      alpha_ss < 0.0 && 0.0 < -alpha_ss && -alpha_ss < alpha_u;
  rep.saddle_value_positive = alpha_s + alpha_u > 0.0;
  return rep;
}

namespace {

Vec3 axpy(const Vec3& s, double h, const Vec3& d) {
  return {s.x + h * d.x, s.y + h * d.y, s.z + h * d.z};
}

Vec3 rk4_step(const OdeParams& p, const Vec3& s, double dt) {
  const Vec3 k1 = ode_vector_field(p, s);
  const Vec3 k2 = ode_vector_field(p, axpy(s, 0.5 * dt, k1));
  const Vec3 k3 = ode_vector_field(p, axpy(s, 0.5 * dt, k2));
  const Vec3 k4 = ode_vector_field(p, axpy(s, dt, k3));
  return {s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
          s.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

bool finite(const Vec3& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z);
}

}  // namespace

std::vector<TrajectoryPoint> integrate_flow(const OdeParams& p, Vec3 start, double dt,
                                            long steps) {
  if (!(dt > 0.0)) throw ConfigError("integrate_flow: dt must be positive");
  if (steps < 0) throw ConfigError("integrate_flow: steps must be nonnegative");
  std::vector<TrajectoryPoint> traj;
  traj.reserve(static_cast<std::size_t>(steps) + 1);
  traj.push_back({start, 0.0});
  Vec3 s = start;
  for (long i = 0; i < steps; ++i) {
    s = rk4_step(p, s, dt);
    if (!finite(s)) {
      throw IntegrationError("integrate_flow: non-finite state at step " + format_int(i + 1),
                             i + 1);
    }
    traj.push_back({s, dt * static_cast<double>(i + 1)});
  }
  return traj;
}

AttractorSample sample_attractor(const GeometricLorenzSystem& sys, std::uint64_t seed,
                                 long n_iterates, long burn_in) {
  if (n_iterates < 0) throw ConfigError("sample_attractor: n_iterates must be nonnegative");
  if (burn_in < 0) throw ConfigError("sample_attractor: burn_in must be nonnegative");
  Rng rng(derive_seed(seed, "attractor"));
  AttractorSample out;
  out.points.reserve(static_cast<std::size_t>(n_iterates));
  SectionPoint p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  long burned = 0;
  while (static_cast<long>(out.points.size()) < n_iterates) {
    if (std::abs(p.x) <= kSingularTolerance) {
      ++out.skipped;  // landed on the singular leaf: restart the orbit
      p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      burned = 0;
      continue;
    }
    p = poincare_eval(sys, p);
    if (burned < burn_in) {
      ++burned;
      continue;
    }
    out.points.push_back(p);
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryPoint>& traj) {
  CsvWriter w(path);
  w.row({"x", "y", "z", "t"});
  for (const auto& tp : traj) {
    w.row({format_double(tp.state.x), format_double(tp.state.y), format_double(tp.state.z),
           format_double(tp.t)});
  }
  w.close();
}

void write_section_csv(const std::filesystem::path& path,
                       const std::vector<SectionPoint>& points) {
  CsvWriter w(path);
  w.row({"x", "y", "t"});
  long t = 0;
  for (const auto& p : points) {
    w.row({format_double(p.x), format_double(p.y), format_int(t)});
    ++t;
  }
  w.close();
}

}  // namespace lorenzlab::model
