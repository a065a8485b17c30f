#include <cmath>
#include <complex>

#include <doctest.h>

#include "lorenzlab/cocycle.hpp"
#include "lorenzlab/errors.hpp"
#include "lorenzlab/rng.hpp"
#include "test_fixtures.hpp"

using namespace lorenzlab;
using namespace lorenzlab::cocycle;
using C = std::complex<double>;

namespace {

CMatrix diag2(double a, double b) {
  CMatrix m(2);
  m.at(0, 0) = a;
  m.at(1, 1) = b;
  return m;
}

CocycleGenerator constant_gen(const CMatrix& m) {
  CocycleGenerator g;
  g.d = m.dim();
  g.depth = 0;
  g.fallback = m;
  return g;
}

double entry_error(const CMatrix& a, const CMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("generator evaluation") {
  CMatrix m1 = diag2(2.0, 1.0);
  CMatrix m2 = diag2(0.5, 3.0);
  CMatrix dflt = CMatrix::identity(2);
  CocycleGenerator g;
  g.d = 2;
  g.depth = 1;
  g.table.emplace(Word{1}, m1);
  g.table.emplace(Word{2}, m2);
  g.fallback = dflt;
  g.validate();

  CHECK(generator_eval(g, inducing::Itinerary::unilateral({1, 5})) == m1);
  CHECK(generator_eval(g, inducing::Itinerary::unilateral({2})) == m2);
  CHECK(generator_eval(g, inducing::Itinerary::unilateral({7})) == dflt);
  CHECK_THROWS_AS(generator_eval(g, inducing::Itinerary::unilateral({})), LengthError);

  const auto cg = constant_gen(m1);
  CHECK(generator_eval(cg, inducing::Itinerary::unilateral({})) == m1);

  CocycleGenerator bad = g;
  bad.table[Word{1}] = diag2(1.0, 0.0);
  CHECK_THROWS_AS(bad.validate(), SingularMatrixError);
}

TEST_CASE("cocycle products") {
  const CMatrix m = diag2(2.0, 0.5);
  const auto g = constant_gen(m);
  const auto it = inducing::Itinerary::unilateral({1, 1, 1, 1});
  CHECK(cocycle_product(g, it, 0) == CMatrix::identity(2));
  CHECK(cocycle_product(g, it, 3) == m * (m * m));

  // the cocycle law on random depth-1 generators
  Rng rng(31);
  auto gen = sample_fiber_bunched(7, 3, 1, test_symbols(16), 0.2, 0.25, 1.0, 0.95);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int mm = 1 + static_cast<int>(rng.uniform_index(10));
    const int nn = 1 + static_cast<int>(rng.uniform_index(10));
    std::vector<int> word;
    const auto symbols = test_symbols(16);
    for (int k = 0; k < mm + nn + 1; ++k) {
      word.push_back(symbols[static_cast<std::size_t>(
          rng.uniform_index(static_cast<long>(symbols.size())))]);
    }
    const auto itin = inducing::Itinerary::unilateral(word);
    auto shifted = itin;
    for (int k = 0; k < nn; ++k) shifted = shifted.shifted_forward();
    const auto lhs = cocycle_product(gen, itin, mm + nn);
    const auto rhs = cocycle_product(gen, shifted, mm) * cocycle_product(gen, itin, nn);
    worst = std::max(worst, entry_error(lhs, rhs) / lhs.frobenius_norm());
  }
  CHECK(worst <= 1e-10);

  CHECK_THROWS_AS(cocycle_product(gen, inducing::Itinerary::unilateral({1, 1}), 5), LengthError);
}

TEST_CASE("inverse products") {
  const CMatrix m = diag2(2.0, 0.5);
  const auto g = constant_gen(m);
  auto it = inducing::Itinerary::make_bilateral({1, 1, 1}, {1, 1, 1});
  CHECK(cocycle_inverse_product(g, it, 0) == CMatrix::identity(2));
  const auto inv3 = cocycle_inverse_product(g, it, 3);
  CHECK(entry_error(inv3, inverse(m * (m * m))) <= 1e-14);

  auto gen = sample_fiber_bunched(8, 2, 1, test_symbols(8), 0.25, 0.25, 1.0, 0.95);
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(6));
    const auto symbols = test_symbols(8);
    std::vector<int> past, future;
    for (int k = 0; k < n; ++k) {
      past.push_back(symbols[static_cast<std::size_t>(
          rng.uniform_index(static_cast<long>(symbols.size())))]);
    }
    for (int k = 0; k < 8; ++k) {
      future.push_back(symbols[static_cast<std::size_t>(
          rng.uniform_index(static_cast<long>(symbols.size())))]);
    }
    const auto itin = inducing::Itinerary::make_bilateral(past, future);
    auto shifted = itin;
    for (int k = 0; k < n; ++k) shifted = shifted.shifted_backward();
    const auto prod =
        cocycle_inverse_product(gen, itin, n) * cocycle_product(gen, shifted, n);
    CHECK(entry_error(prod, CMatrix::identity(2)) <= 1e-10);
  }
  CHECK_THROWS_AS(cocycle_inverse_product(g, inducing::Itinerary::unilateral({1}), 2),
                  LengthError);
}

TEST_CASE("holder seminorm") {
  const inducing::SymbolicMetric metric{0.25};
  CHECK(holder_seminorm(constant_gen(diag2(2, 3)), metric, 1.0, 100, 1) == 0.0);

  // two table entries differing at symbol index 0; fallback matches one of
  // them so only the distance-one pair binds
  CocycleGenerator g;
  g.d = 2;
  g.depth = 1;
  CMatrix m1 = diag2(2.0, 1.0);
  CMatrix m2 = diag2(1.0, 1.0);
  g.table.emplace(Word{1}, m1);
  g.table.emplace(Word{2}, m2);
  g.fallback = m1;
  const double semi = holder_seminorm(g, metric, 1.0, 100, 1);
  CHECK(semi == doctest::Approx(operator_norm(m1 - m2)).epsilon(1e-12));

  // multiplying all entries by a unitary on the left preserves the seminorm
  Rng rng(3);
  CMatrix gauss(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gauss.at(i, j) = {rng.gaussian(), rng.gaussian()};
  const CMatrix u = qr_positive(gauss).q;
  CocycleGenerator gu = g;
  gu.fallback = u * g.fallback;
  for (auto& [w, m] : gu.table) m = u * m;
  CHECK(holder_seminorm(gu, metric, 1.0, 100, 1) == doctest::Approx(semi).epsilon(1e-12));
}

TEST_CASE("fiber bunching checker") {
  const auto id_rep = fiber_bunching_check(constant_gen(CMatrix::identity(2)), 0.25, 1.0, 0.9);
  CHECK(id_rep.worst_product == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(id_rep.passed);

  const auto bad_rep = fiber_bunching_check(constant_gen(diag2(2.0, 0.5)), 0.25, 1.0, 0.9);
  CHECK(bad_rep.worst_product == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_FALSE(bad_rep.passed);

  // worst_product is exactly multiplicative in theta^eta
  const auto rep_a = fiber_bunching_check(constant_gen(diag2(2.0, 0.5)), 0.25, 1.0, 0.9);
  const auto rep_b = fiber_bunching_check(constant_gen(diag2(2.0, 0.5)), 0.125, 1.0, 0.9);
  CHECK(rep_b.worst_product == doctest::Approx(rep_a.worst_product * 0.5).epsilon(1e-13));

  CHECK_THROWS_AS(fiber_bunching_check(constant_gen(diag2(1.0, 0.0)), 0.25, 1.0, 0.9),
                  SingularMatrixError);
}

TEST_CASE("sample_fiber_bunched") {
  const auto symbols = test_symbols(16);
  // epsilon = 0 gives the constant identity generator
  const auto id_gen = sample_fiber_bunched(5, 3, 1, symbols, 0.0, 0.25, 1.0, 0.9);
  CHECK(entry_error(id_gen.fallback, CMatrix::identity(3)) == 0.0);
  for (const auto& [w, m] : id_gen.table) CHECK(entry_error(m, CMatrix::identity(3)) == 0.0);

  // every sample passes the bunching re-check
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = sample_fiber_bunched(seed, 2, 1, symbols, 0.3, 0.25, 1.0, 0.95);
    CHECK(fiber_bunching_check(g, 0.25, 1.0, 0.95).passed);
  }

  // determinism
  const auto a = sample_fiber_bunched(12, 2, 1, symbols, 0.3, 0.25, 1.0, 0.95);
  const auto b = sample_fiber_bunched(12, 2, 1, symbols, 0.3, 0.25, 1.0, 0.95);
  CHECK(generator_to_json(a) == generator_to_json(b));

  // the documented parameter gate names the bound
  CHECK_THROWS_WITH_AS(sample_fiber_bunched(1, 4, 1, symbols, 0.3, 0.25, 1.0, 0.95),
                       doctest::Contains("(1+eps*d)^2"), ConfigError);
}

TEST_CASE("suspension evaluation") {
  const auto& s = test_scheme();
  const auto& sys = test_system();
  SuspensionCocycle susp;
  susp.generator = sample_fiber_bunched(21, 2, 1, test_symbols(16), 0.2, 0.25, 1.0, 0.95);
  susp.system = std::make_shared<model::GeometricLorenzSystem>(sys);
  susp.scheme = std::make_shared<inducing::InducingScheme>(s);

  // find a point with a clean 4-step coding
  double x = 0.0;
  Rng rng(2);
  inducing::Itinerary it;
  while (true) {
    x = rng.uniform(-s.delta, s.delta);
    try {
      it = inducing::encode(s, x, 5);
      break;
    } catch (const PartialItineraryError&) {
    }
  }
  const model::SectionPoint p0{x, 0.3};

  CHECK(suspension_eval(susp, p0, 0.0) == CMatrix::identity(2));
  const double T1 = inducing::total_return_time_T(sys, s, p0);
  CHECK(suspension_eval(susp, p0, 0.5 * T1) == CMatrix::identity(2));

  // s_3 accumulated exactly as the suspension walks the orbit
  double s3 = 0.0;
  model::SectionPoint p = p0;
  CMatrix stepwise = CMatrix::identity(2);
  for (int k = 0; k < 3; ++k) {
    s3 += inducing::total_return_time_T(sys, s, p);
    stepwise = induced_from_suspension(susp, p) * stepwise;
    const auto step = inducing::induced_eval(s, p.x);
    const auto& b = s.branch(step.branch_index);
    double y = p.y, xc = p.x;
    for (int j = 0; j < b.time; ++j) {
      y = sys.skew.beta * y + (xc > 0.0 ? sys.skew.gamma : -sys.skew.gamma);
      xc = model::lorenz_map_eval(sys.map, xc);
    }
    p = {step.image, y};
  }
  const auto direct = cocycle_product(susp.generator, it, 3);
  CHECK(suspension_eval(susp, p0, s3) == direct);  // bitwise: same factors, same order
  CHECK(stepwise == direct);
  CHECK(induced_from_suspension(susp, p0) == generator_eval(susp.generator, it));
}

TEST_CASE("generator json round trip is bit exact") {
  auto g = sample_fiber_bunched(3, 3, 1, test_symbols(8), 0.25, 0.25, 1.0, 0.95);
  const std::string text = generator_to_json(g);
  const auto back = generator_from_json(text);
  CHECK(back.d == g.d);
  CHECK(back.depth == g.depth);
  CHECK(back.fallback == g.fallback);
  REQUIRE(back.table.size() == g.table.size());
  for (const auto& [w, m] : g.table) {
    CHECK(back.table.at(w) == m);
  }
  CHECK(generator_to_json(back) == text);
  CHECK_THROWS_AS(generator_from_json("{"), IoError);
}
