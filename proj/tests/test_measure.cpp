#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/measure.hpp"
#include "lorenzlab/orbit.hpp"
#include "lorenzlab/rng.hpp"
#include "test_fixtures.hpp"

using namespace lorenzlab;
using namespace lorenzlab::measure;

TEST_CASE("ulam on a map with uniform invariant density") {
  // doubling-type full map: both halves stretch affinely onto [-1,1)
  const auto stub = [](double x) { return x < 0.0 ? 2.0 * x + 1.0 : 2.0 * x - 1.0; };
  const auto d = ulam_density_of(stub, -1.0, 1.0, 64, 10000, 77);
  CHECK(std::abs(d.integral() - 1.0) <= 1e-12);
  CHECK(d.fixed_point_residual <= 1e-12);
  const double tol = 2.0 / std::sqrt(10000.0);
  for (const double w : d.weights) CHECK(std::abs(w - 0.5) <= tol);
}

TEST_CASE("ulam density for the lorenz map") {
  const auto& d = test_density();
  CHECK(std::abs(d.integral() - 1.0) <= 1e-12);
  CHECK(d.fixed_point_residual <= 1e-10);
  double mn = 1e300, mx = 0.0;
  for (const double w : d.weights) {
    mn = std::min(mn, w);
    mx = std::max(mx, w);
  }
  CHECK(mn > 0.0);        // strictly positive across the attractor core
  CHECK(std::isfinite(mx / mn));
  CHECK_THROWS_AS(ulam_density(test_system().map, 1, 100, 1), ConfigError);
}

TEST_CASE("density sampling and branch measure") {
  const auto& d = test_density();
  Rng rng(5);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += d.sample(rng);
  mean /= n;
  // the invariant density of an odd map is even, so the mean is near zero
  CHECK(std::abs(mean) <= 0.05);

  const auto& probs = test_branch_probs();
  double total = 0.0;
  for (const double p : probs) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lift pushforward") {
  const auto& sys = test_system();
  const auto& d = test_density();
  const auto s0 = lift_pushforward(sys, d, 0, 5000, 3);
  for (const auto& p : s0.points) CHECK(p.y == 0.0);
  double wsum = 0.0;
  for (const double w : s0.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

  const long samples = 20000;
  const auto a = lift_pushforward(sys, d, 10, samples, 31);
  const auto b = lift_pushforward(sys, d, 10, samples, 32);
  const double tol = 3.0 / std::sqrt(static_cast<double>(samples));
  for (const auto& tf : test_function_dictionary()) {
    CHECK(std::abs(integrate(a, tf) - integrate(b, tf)) <= tol);
  }
}

TEST_CASE("pushforward gaps obey the coupled contraction bound") {
  const auto& sys = test_system();
  const auto& d = test_density();
  for (const auto& tf : test_function_dictionary()) {
    const auto gaps = pushforward_gaps(sys, d, tf, 10, 4000, 11);
    for (int n = 1; n <= 10; ++n) {
      const double cap = tf.lip_y * sys.skew.gamma * std::pow(sys.skew.beta, n) + 1e-12;
      CHECK(gaps[static_cast<std::size_t>(n)] <= cap);
    }
  }
}

TEST_CASE("jacobian ratio") {
  const auto& s = test_scheme();
  const auto src = OrbitSource::induced(&s);
  const auto orb = src.orbit(404, 300);
  std::vector<int> past, future;
  for (int k = 1; k <= 40; ++k) past.push_back(orb.symbols[static_cast<std::size_t>(60 - k)]);
  for (int k = 0; k < 40; ++k) future.push_back(orb.symbols[static_cast<std::size_t>(60 + k)]);
  const auto x = inducing::Itinerary::make_bilateral(past, future);
  const auto ref = inducing::Itinerary::unilateral(std::vector<int>(40, 1));
  const auto own = inducing::Itinerary::unilateral(future);

  // identical futures give ratio exactly one at every order
  for (const int n : {1, 5, 25}) {
    CHECK(jacobian_ratio(s, ref, ref, x, n) == 1.0);
  }

  // geometric tail: |log J(20) - log J(30)| <= sum_{i>20} c^i
  const auto dist = inducing::check_distortion_global(s, 4000, 12, true);
  const double c = dist.c_fit;
  const double j20 = std::log(jacobian_ratio(s, ref, own, x, 20));
  const double j30 = std::log(jacobian_ratio(s, ref, own, x, 30));
  CHECK(std::abs(j30 - j20) <= std::pow(c, 21.0) / (1.0 - c) + 1e-12);

  CHECK_THROWS_AS(jacobian_ratio(s, ref, own, x, 60), LengthError);
}

TEST_CASE("product density") {
  const auto& s = test_scheme();
  const auto pd = product_density(s, 1, 300000, 2024, 30);
  REQUIRE(!pd.entries.empty());
  CHECK(pd.bound_c >= 1.0);
  CHECK(std::isfinite(pd.bound_c));
  for (const auto& e : pd.entries) {
    CHECK(e.omega > 0.0);
    CHECK(e.omega >= 1.0 / pd.bound_c - 1e-12);
    CHECK(e.omega <= pd.bound_c + 1e-12);
    CHECK(e.count >= 32);  // adaptive occurrence floor
    // counting oracle within five sigma of the structure estimate
    CHECK(std::abs(e.empirical_ratio - e.omega) <= 5.0 / std::sqrt(static_cast<double>(e.count)));
  }
  // export
  const auto dir = std::filesystem::temp_directory_path() / "lorenzlab_test_pd";
  std::filesystem::create_directories(dir);
  write_product_density_csv(dir / "pd.csv", pd);
  const auto t = read_csv(dir / "pd.csv");
  CHECK(t.rows.size() == pd.entries.size());
}

TEST_CASE("birkhoff averages") {
  std::vector<double> ones(5000, 1.0);
  const auto c = birkhoff_average(ones);
  CHECK(c.mean == 1.0);
  CHECK(c.half_width == 0.0);

  const auto& s = test_scheme();
  const auto& sys = test_system();
  const auto src = OrbitSource::induced(&s);
  const auto r1 = birkhoff_average(Observable::return_time, sys, s, src, 20000, 1);
  const auto r2 = birkhoff_average(Observable::return_time, sys, s, src, 20000, 2);
  CHECK(std::isfinite(r1.mean));
  CHECK(r1.mean > 1.0);
  CHECK(std::abs(r1.mean - r2.mean) <= 4.0 * (r1.half_width + r2.half_width));

  const auto t1 = birkhoff_average(Observable::total_return_time, sys, s, src, 20000, 1);
  CHECK(t1.mean >= sys.roof.c0 * r1.mean - 1e-9);
}

TEST_CASE("density csv round trip") {
  const auto& d = test_density();
  const auto dir = std::filesystem::temp_directory_path() / "lorenzlab_test_density";
  std::filesystem::create_directories(dir);
  write_density_csv(dir / "density.csv", d, {"unit test"});
  const auto back = read_density_csv(dir / "density.csv");
  REQUIRE(back.bins() == d.bins());
  for (int i = 0; i < d.bins(); ++i) {
    CHECK(back.weights[static_cast<std::size_t>(i)] == d.weights[static_cast<std::size_t>(i)]);
  }
  // a tampered file whose mass is off must be rejected
  auto broken = d;
  for (double& w : broken.weights) w *= 1.5;
  write_density_csv(dir / "broken.csv", broken);
  CHECK_THROWS_AS(read_density_csv(dir / "broken.csv"), InconsistencyError);
}

TEST_CASE("orbit sources") {
  const auto& s = test_scheme();
  const auto bern = OrbitSource::bernoulli(&s, test_branch_probs());
  const auto sym1 = bern.symbols(9, 1000);
  const auto sym2 = bern.symbols(9, 1000);
  CHECK(sym1 == sym2);
  for (const int l : sym1) {
    CHECK(l >= 1);
    CHECK(l <= static_cast<int>(s.branches.size()));
  }
  // realizing points follow the symbols under the induced map
  const auto orb = bern.orbit(9, 400);
  REQUIRE(orb.points.size() == 400);
  for (std::size_t k = 0; k + 1 < orb.points.size(); ++k) {
    const auto& b = s.branch(orb.symbols[k]);
    CHECK(orb.points[k] >= b.left);
    CHECK(orb.points[k] <= b.right);
    CHECK(std::abs(s.induced_map(b, orb.points[k]) - orb.points[k + 1]) <= 1e-9);
  }
  const auto ind = OrbitSource::induced(&s);
  const auto io = ind.orbit(5, 400);
  long chained = 0;
  for (std::size_t k = 0; k + 1 < io.points.size(); ++k) {
    const auto& b = s.branch(io.symbols[k]);
    const double image = s.induced_map(b, io.points[k]);
    if (s.branch_at(image) < 0) continue;  // gap hit: the orbit restarted here
    CHECK(io.points[k + 1] == image);
    ++chained;
  }
  CHECK(chained >= 390);  // restarts are rare on the fixture scheme
}
