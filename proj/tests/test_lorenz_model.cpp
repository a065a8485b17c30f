#include <cmath>

#include <doctest.h>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/lorenz_model.hpp"
#include "lorenzlab/rng.hpp"
#include "test_fixtures.hpp"

using namespace lorenzlab;
using namespace lorenzlab::model;

TEST_CASE("lorenz map values and symmetry") {
  const LorenzMapParams p;  // rho 0.75, scale 2
  CHECK(lorenz_map_eval(p, 1.0) == 1.0);
  CHECK(lorenz_map_eval(p, -1.0) == -1.0);
  // scalar oracle: 2 * 0.5^0.75 - 1
  CHECK(lorenz_map_eval(p, 0.5) == doctest::Approx(0.18920711500272107).epsilon(1e-14));
  CHECK_THROWS_AS(lorenz_map_eval(p, 0.0), std::domain_error);
  CHECK_THROWS_AS(lorenz_map_eval(p, 5e-15), std::domain_error);
  CHECK_THROWS_AS(lorenz_map_eval(p, 1.5), std::domain_error);

  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform(1e-12, 1.0);
    CHECK(lorenz_map_eval(p, -x) == -lorenz_map_eval(p, x));  // bit-identical
  }
}

TEST_CASE("lorenz map derivative") {
  const LorenzMapParams p;
  CHECK(lorenz_map_derivative(p, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(lorenz_map_derivative(p, -1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(lorenz_map_derivative(p, 1e-4) == doctest::Approx(15.0).epsilon(1e-13));
  CHECK_THROWS_AS(lorenz_map_derivative(p, 0.0), std::domain_error);

  Rng rng(4);
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform(1e-10, 1.0);
    CHECK(lorenz_map_derivative(p, x) >= p.min_derivative());
  }
}

TEST_CASE("verify_expansion closed form") {
  CHECK(verify_expansion({0.75, 2.0}).min_derivative == 1.5);
  CHECK(verify_expansion({0.75, 2.0}).exceeds_sqrt2);
  CHECK(verify_expansion({0.70, 2.0}).min_derivative == doctest::Approx(1.4));
  CHECK_FALSE(verify_expansion({0.70, 2.0}).exceeds_sqrt2);
  CHECK(verify_expansion({0.9, 2.0}).min_derivative == doctest::Approx(1.8));
  CHECK(verify_expansion({0.9, 2.0}).exceeds_sqrt2);
}

TEST_CASE("parameter validation messages") {
  LorenzMapParams bad{0.5, 2.0};
  CHECK_THROWS_WITH_AS(bad.validate(),
                       doctest::Contains("expansion bound"), ConfigError);
  LorenzMapParams bad2{0.75, 2.5};
  CHECK_THROWS_AS(bad2.validate(), ConfigError);
  SkewParams overlap{0.3, 0.25, 0.5};
  CHECK_THROWS_AS(overlap.validate(), ConfigError);
  SkewParams escape{0.3, 0.8, 0.5};
  CHECK_THROWS_AS(escape.validate(), ConfigError);
}

TEST_CASE("poincare map") {
  const auto& sys = test_system();
  const auto p1 = poincare_eval(sys, {1.0, 0.0});
  CHECK(p1.x == 1.0);
  CHECK(p1.y == 0.5);
  const auto p2 = poincare_eval(sys, {-1.0, 0.0});
  CHECK(p2.x == -1.0);
  CHECK(p2.y == -0.5);
  const auto p3 = poincare_eval(sys, {0.5, 1.0});
  CHECK(p3.x == doctest::Approx(lorenz_map_eval(sys.map, 0.5)));
  CHECK(p3.y == doctest::Approx(0.7));
  CHECK_THROWS_AS(poincare_eval(sys, {0.0, 0.3}), std::domain_error);

  // semiconjugacy and exact fiber contraction rate
  Rng rng(7);
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    if (std::abs(x) <= kSingularTolerance) continue;
    const double y1 = rng.uniform(-1.0, 1.0);
    const double y2 = rng.uniform(-1.0, 1.0);
    CHECK(poincare_eval(sys, {x, y1}).x == lorenz_map_eval(sys.map, x));
    const double lhs = std::abs(poincare_eval(sys, {x, y1}).y - poincare_eval(sys, {x, y2}).y);
    // exact up to one rounding of each fiber image
    CHECK(std::abs(lhs - sys.skew.beta * std::abs(y1 - y2)) <= 2e-15);
  }
}

TEST_CASE("roof function") {
  CHECK(roof_eval({1.0, 1.0}, 1.0) == doctest::Approx(1.0));
  CHECK(roof_eval({1.0, 1.0}, std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(roof_eval({1.0, 0.5}, 0.01) == doctest::Approx(3.302585092994046).epsilon(1e-14));
  CHECK_THROWS_AS(roof_eval({1.0, 0.5}, 0.0), std::domain_error);
}

TEST_CASE("ode vector field") {
  const OdeParams p;
  auto v0 = ode_vector_field(p, {0, 0, 0});
  CHECK((v0.x == 0.0 && v0.y == 0.0 && v0.z == 0.0));
  auto v1 = ode_vector_field(p, {1, 1, 0});
  CHECK(v1.x == 0.0);
  CHECK(v1.y == 27.0);
  CHECK(v1.z == 1.0);
  auto v2 = ode_vector_field(p, {0, 0, 1});
  CHECK(v2.x == 0.0);
  CHECK(v2.y == 0.0);
  CHECK(v2.z == doctest::Approx(-8.0 / 3.0));
}

TEST_CASE("equilibrium eigenvalues") {
  const auto rep = equilibrium_eigenvalues(OdeParams{});
  // characteristic-polynomial roots (-11 +- sqrt(1201))/2 and -8/3
  CHECK(rep.eigenvalues[0] == doctest::Approx(-22.827723451163456).epsilon(1e-12));
  CHECK(rep.eigenvalues[1] == doctest::Approx(-8.0 / 3.0).epsilon(1e-14));
  CHECK(rep.eigenvalues[2] == doctest::Approx(11.827723451163456).epsilon(1e-12));
  CHECK(rep.saddle_value_positive);  // alpha_s + alpha_u ~ 9.16 > 0
  CHECK(rep.expansion_exceeds_weak_contraction);
  CHECK_FALSE(rep.expansion_exceeds_strong_contraction);

  const auto rep2 = equilibrium_eigenvalues(OdeParams{1.0, 1.0, 1.0});
  CHECK(rep2.eigenvalues[0] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(rep2.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(rep2.eigenvalues[2]) < 1e-14);

  // complex pair: reachable only outside the validated parameter range
  CHECK_THROWS_WITH_AS(equilibrium_eigenvalues(OdeParams{1.0, -1.0, 1.0}),
                       doctest::Contains("discriminant"), std::domain_error);
}

TEST_CASE("integrate_flow") {
  const OdeParams p;
  const auto still = integrate_flow(p, {0, 0, 0}, 0.1, 5);
  for (const auto& tp : still) {
    CHECK(tp.state.x == 0.0);
    CHECK(tp.state.y == 0.0);
    CHECK(tp.state.z == 0.0);
  }

  // Richardson half-step oracle along ten steps
  const auto coarse = integrate_flow(p, {1, 1, 1}, 1e-3, 10);
  const auto fine = integrate_flow(p, {1, 1, 1}, 5e-4, 20);
  for (int k = 1; k <= 10; ++k) {
    const auto& a = coarse[static_cast<std::size_t>(k)].state;
    const auto& b = fine[static_cast<std::size_t>(2 * k)].state;
    const double err = std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                                 (a.z - b.z) * (a.z - b.z));
    CHECK(err <= 1e-8);
  }

  // closed-form linear decay when only the z equation is active
  const OdeParams decay{1e-300, 1e-300, 1.0};
  const auto traj = integrate_flow(decay, {0, 0, 1}, 0.01, 100);
  CHECK(traj.back().state.z == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(traj.back().state.x == 0.0);

  // determinism
  const auto again = integrate_flow(p, {1, 1, 1}, 1e-3, 10);
  for (int k = 0; k <= 10; ++k) {
    CHECK(coarse[static_cast<std::size_t>(k)].state.x ==
          again[static_cast<std::size_t>(k)].state.x);
  }
  CHECK_THROWS_AS(integrate_flow(p, {1, 1, 1}, -0.1, 10), ConfigError);
}

TEST_CASE("integrator is fourth order") {
  const OdeParams p;
  const model::Vec3 x0{1.0, 1.0, 1.0};
  auto endpoint = [&](double dt, double T) {
    return integrate_flow(p, x0, dt, static_cast<long>(std::llround(T / dt))).back().state;
  };
  const auto ref = endpoint(0.0005, 0.4);
  auto err = [&](double dt) {
    const auto e = endpoint(dt, 0.4);
    return std::sqrt((e.x - ref.x) * (e.x - ref.x) + (e.y - ref.y) * (e.y - ref.y) +
                     (e.z - ref.z) * (e.z - ref.z));
  };
  const double ratio = err(0.004) / err(0.002);
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
}

TEST_CASE("sample_attractor") {
  const auto& sys = test_system();
  CHECK(sample_attractor(sys, 1, 0, 10).points.empty());
  const auto sample = sample_attractor(sys, 42, 2000, 5);
  REQUIRE(sample.points.size() == 2000);
  const double g = sys.skew.gamma, b = sys.skew.beta;
  for (const auto& pt : sample.points) {
    const double ay = std::abs(pt.y);
    CHECK(ay >= g - b - 1e-12);
    CHECK(ay <= g + b + 1e-12);
    CHECK(std::abs(pt.x) <= 1.0);
  }
  const auto rerun = sample_attractor(sys, 42, 2000, 5);
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    CHECK(sample.points[i].x == rerun.points[i].x);
    CHECK(sample.points[i].y == rerun.points[i].y);
  }
}

TEST_CASE("trajectory and section csv") {
  const auto dir = std::filesystem::temp_directory_path() / "lorenzlab_test_csv";
  std::filesystem::create_directories(dir);
  const auto traj = integrate_flow(OdeParams{}, {1, 1, 1}, 0.01, 5);
  write_trajectory_csv(dir / "traj.csv", traj);
  const auto t = read_csv(dir / "traj.csv");
  CHECK(t.header == std::vector<std::string>{"x", "y", "z", "t"});
  CHECK(t.rows.size() == 6);

  const auto sample = sample_attractor(test_system(), 1, 10, 2);
  write_section_csv(dir / "section.csv", sample.points);
  const auto s = read_csv(dir / "section.csv");
  CHECK(s.header == std::vector<std::string>{"x", "y", "t"});
  CHECK(s.rows.size() == 10);
}

TEST_CASE("system config round trip") {
  Config cfg = default_config();
  const auto sys = GeometricLorenzSystem::from_config(cfg);
  Config cfg2;
  sys.to_config(cfg2);
  const auto sys2 = GeometricLorenzSystem::from_config(cfg2);
  CHECK(sys.map.rho == sys2.map.rho);
  CHECK(sys.skew.gamma == sys2.skew.gamma);
  CHECK(sys.roof.c1 == sys2.roof.c1);
  CHECK(sys.ode.c == sys2.ode.c);

  Config bad = default_config();
  bad.set_double("lorenz", "rho", 0.5);
  CHECK_THROWS_AS(GeometricLorenzSystem::from_config(bad), ConfigError);
}
