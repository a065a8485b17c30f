#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>

#include <doctest.h>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/inducing.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/rng.hpp"
#include "test_fixtures.hpp"

using namespace lorenzlab;
using namespace lorenzlab::inducing;

namespace {

// Direct monotone-image oracle: track interval images of the two halves of
// Ihat through g, cutting at the discontinuity, and report the first time any
// piece's image covers Ihat. Independent of the production builder.
int first_covering_time_oracle(const model::LorenzMapParams& map, double delta, int cap) {
  struct P {
    double lo, hi;
    int t;
  };
  std::deque<P> work;
  auto g = [&](double x) { return model::lorenz_map_eval(map, x); };
  work.push_back({g(-delta), 1.0, 1});
  work.push_back({-1.0, g(delta), 1});
  int best = cap + 1;
  while (!work.empty()) {
    const P p = work.front();
    work.pop_front();
    if (p.t >= best || p.t > cap) continue;
    if (p.lo <= -delta && p.hi >= delta) {
      best = p.t;
      continue;
    }
    if (p.lo < 0.0 && p.hi > 0.0) {
      work.push_back({g(p.lo), 1.0, p.t + 1});
      work.push_back({-1.0, g(p.hi), p.t + 1});
    } else {
      const double lo = p.lo == 0.0 ? -1.0 : g(p.lo);
      const double hi = p.hi == 0.0 ? 1.0 : g(p.hi);
      work.push_back({lo, hi, p.t + 1});
    }
  }
  return best;
}

}  // namespace

TEST_CASE("scheme construction invariants") {
  const auto& s = test_scheme();
  REQUIRE(!s.branches.empty());
  CHECK(s.coverage > 0.9);
  CHECK(s.coverage <= 1.0 + 1e-12);
  double covered = 0.0;
  for (std::size_t i = 0; i < s.branches.size(); ++i) {
    const auto& b = s.branches[i];
    CHECK(b.index == static_cast<int>(i) + 1);
    CHECK(b.left < b.right);
    CHECK(b.left >= -s.delta);
    CHECK(b.right <= s.delta);
    CHECK(b.time >= 1);
    CHECK(b.time <= s.max_time);
    CHECK(b.orientation == 1);
    CHECK(b.endpoint_residual <= 1e-10);
    if (i > 0) CHECK(s.branches[i - 1].right <= b.left + 1e-15);
    covered += b.right - b.left;
  }
  CHECK(covered / (2 * s.delta) == doctest::Approx(s.coverage));
  CHECK(s.min_induced_derivative > 1.5);

  // minimal inducing time matches the direct monotone-image oracle
  int t_min = s.max_time;
  for (const auto& b : s.branches) t_min = std::min(t_min, b.time);
  CHECK(t_min == first_covering_time_oracle(s.map, s.delta, s.max_time));
}

TEST_CASE("scheme parameter validation") {
  SchemeParams p;
  p.max_time = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SchemeParams{};
  p.delta = 1.2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SchemeParams{};
  p.min_length = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("induced_eval maps branches onto Ihat") {
  const auto& s = test_scheme();
  // endpoints map to -+delta within the construction tolerance
  for (int i = 0; i < 50; ++i) {
    const auto& b = s.branches[static_cast<std::size_t>(i) * (s.branches.size() / 50)];
    CHECK(std::abs(s.induced_map(b, b.left) - (-s.delta)) <= 1e-8);
    CHECK(std::abs(s.induced_map(b, b.right) - s.delta) <= 1e-8);
  }
  // a gap point raises NotCoveredError carrying the nearest branch
  bool found_gap = false;
  for (std::size_t i = 0; i + 1 < s.branches.size(); ++i) {
    const double gap = s.branches[i + 1].left - s.branches[i].right;
    if (gap > 1e-9) {
      const double x = 0.5 * (s.branches[i].right + s.branches[i + 1].left);
      CHECK_THROWS_AS(induced_eval(s, x), NotCoveredError);
      try {
        induced_eval(s, x);
      } catch (const NotCoveredError& e) {
        CHECK((e.nearest_branch == s.branches[i].index ||
               e.nearest_branch == s.branches[i + 1].index));
        CHECK(e.distance <= gap);
      }
      found_gap = true;
      break;
    }
  }
  CHECK(found_gap);
}

TEST_CASE("fixed point of the constant itinerary") {
  const auto& s = test_scheme();
  std::vector<int> ones(40, 1);
  const auto dec = decode(s, Itinerary::unilateral(ones), 40);
  const auto& b = s.branch(1);
  CHECK(dec.point >= b.left);
  CHECK(dec.point <= b.right);
  CHECK(std::abs(s.induced_map(b, dec.point) - dec.point) <= 1e-9);
}

TEST_CASE("encode / decode round trip") {
  const auto& s = test_scheme();
  Rng rng(101);

  // n = 0 and n = 1 contracts
  const double x0 = 0.5 * (s.branch(3).left + s.branch(3).right);
  CHECK(encode(s, x0, 0).future.empty());
  const auto it1 = encode(s, x0, 1);
  REQUIRE(it1.future.size() == 1);
  CHECK(it1.future[0] == 3);
  const auto dec1 = decode(s, it1, 1);
  // one pullback of Ihat is the branch domain, up to the containment slack
  CHECK(std::abs(dec1.lo - s.branch(3).left) <= 2.1e-11);
  CHECK(std::abs(dec1.hi - s.branch(3).right) <= 2.1e-11);

  long done = 0;
  long reproduced = 0;
  double worst_len = 0.0;
  for (int trial = 0; trial < 4000 && done < 1000; ++trial) {
    const double x = rng.uniform(-s.delta, s.delta);
    Itinerary it;
    try {
      it = encode(s, x, 15);
    } catch (const PartialItineraryError&) {
      continue;
    }
    const auto dec = decode(s, it, 15);
    CHECK(dec.lo <= x);
    CHECK(x <= dec.hi);
    worst_len = std::max(worst_len, dec.length());
    // decoding fewer symbols must give nested enclosures
    const auto dec10 = decode(s, it, 10);
    CHECK(dec10.lo <= dec.lo);
    CHECK(dec.hi <= dec10.hi);
    // the midpoint reproduces the symbols except on cylinders so deep that
    // double-precision forward iteration cannot separate them
    try {
      const auto again = encode(s, dec.point, 12);
      bool same = true;
      for (int k = 0; k < 12; ++k) {
        same = same && again.future[static_cast<std::size_t>(k)] ==
                           it.future[static_cast<std::size_t>(k)];
      }
      if (same) ++reproduced;
    } catch (const PartialItineraryError&) {
    }
    ++done;
  }
  REQUIRE(done == 1000);
  CHECK(reproduced >= 950);
  CHECK(worst_len <= 2 * s.delta * std::pow(1.5, -15));

  // a gap point yields a partial itinerary immediately
  for (std::size_t i = 0; i + 1 < s.branches.size(); ++i) {
    if (s.branches[i + 1].left - s.branches[i].right > 1e-9) {
      const double gap_x = 0.5 * (s.branches[i].right + s.branches[i + 1].left);
      CHECK_THROWS_AS(encode(s, gap_x, 3), PartialItineraryError);
      try {
        encode(s, gap_x, 3);
      } catch (const PartialItineraryError& e) {
        CHECK(e.symbols.empty());
      }
      break;
    }
  }
}

TEST_CASE("decode length bound and errors") {
  const auto& s = test_scheme();
  const auto orbit_it = encode(s, 0.5 * (s.branch(2).left + s.branch(2).right), 10);
  CHECK_THROWS_AS(decode(s, orbit_it, 11), LengthError);
  std::vector<int> bogus = {1, 999999};
  CHECK_THROWS_AS(decode(s, Itinerary::unilateral(bogus), 2), TruncationError);
  // enclosures are nested and obey the contraction bound
  const auto d4 = decode(s, orbit_it, 4);
  const auto d8 = decode(s, orbit_it, 8);
  CHECK(d4.lo <= d8.lo);
  CHECK(d8.hi <= d4.hi);
  CHECK(d8.length() <= 2 * s.delta * std::pow(s.min_induced_derivative, -8.0) + 1e-10);
}

TEST_CASE("bilateral decode") {
  const auto& s = test_scheme();
  const auto& skew = test_system().skew;
  Rng rng(55);
  const auto src_orbit = [&] {
    // a genuine orbit segment provides a consistent bilateral itinerary
    double x = 0.1234;
    std::vector<int> syms;
    while (syms.size() < 24) {
      const int idx = s.branch_at(x);
      if (idx < 0) {
        x = rng.uniform(-s.delta, s.delta);
        syms.clear();
        continue;
      }
      syms.push_back(idx);
      x = s.induced_map(s.branch(idx), x);
    }
    return syms;
  }();
  std::vector<int> past(src_orbit.begin(), src_orbit.begin() + 8);
  std::reverse(past.begin(), past.end());  // past[0] is the symbol at index -1
  std::vector<int> future(src_orbit.begin() + 8, src_orbit.end());
  const auto it = Itinerary::make_bilateral(past, future);

  const auto flat = bilateral_decode(s, skew, it, 0, 10);
  CHECK(flat.point.y == 0.0);
  CHECK(flat.y_lo == -1.0);
  CHECK(flat.y_hi == 1.0);

  const auto full = bilateral_decode(s, skew, it, 8, 10);
  // x enclosure identical to the unilateral decode of the future
  const auto dx = decode(s, it, 10);
  CHECK(full.x_lo == dx.lo);
  CHECK(full.x_hi == dx.hi);
  // fiber bound contracts at least like beta^{n_past}
  CHECK(full.y_hi - full.y_lo <= 2.0 * std::pow(skew.beta, 8.0) + 1e-15);
  CHECK(full.point.y >= -1.0);
  CHECK(full.point.y <= 1.0);

  // same future symbols => same leaf enclosure regardless of the past
  auto other_past = past;
  other_past[0] = other_past[0] == 1 ? 2 : 1;
  const auto other = bilateral_decode(s, skew, Itinerary::make_bilateral(other_past, future), 8, 10);
  CHECK(other.x_lo == full.x_lo);
  CHECK(other.x_hi == full.x_hi);
}

TEST_CASE("symbolic metric") {
  const SymbolicMetric m{0.25};
  const auto a = Itinerary::unilateral({1, 2, 3, 4, 5, 6, 7});
  CHECK(symbolic_distance(m, a, a) == 0.0);
  const auto b = Itinerary::unilateral({2, 2, 3, 4, 5, 6, 7});
  CHECK(symbolic_distance(m, a, b) == 1.0);
  const auto c = Itinerary::unilateral({1, 2, 3, 4, 5, 9, 7});
  CHECK(symbolic_distance(m, a, c) == 0.0009765625);  // 0.25^5 exactly

  const auto ba = Itinerary::make_bilateral({4, 5}, {1, 2, 3});
  const auto bb = Itinerary::make_bilateral({4, 9}, {1, 2, 3});
  CHECK(symbolic_distance(m, ba, bb) == doctest::Approx(0.25 * 0.25));  // index -2
  CHECK_THROWS_AS(symbolic_distance(m, a, ba), LengthError);

  // condition (ii): itineraries sharing the whole past (the local unstable
  // configuration) move closer by exactly theta under one backward shift
  const auto ua = Itinerary::make_bilateral({4, 5}, {1, 2, 3});
  const auto ub = Itinerary::make_bilateral({4, 5}, {1, 2, 9});
  CHECK(symbolic_distance(m, ua, ub) == doctest::Approx(0.25 * 0.25));  // index 2
  const auto sa = ua.shifted_backward();
  const auto sb = ub.shifted_backward();
  CHECK(symbolic_distance(m, sa, sb) ==
        doctest::Approx(0.25 * symbolic_distance(m, ua, ub)).epsilon(1e-15));
}

TEST_CASE("return times") {
  const auto& s = test_scheme();
  const auto& sys = test_system();
  const auto& b = s.branch(5);
  const double x = 0.5 * (b.left + b.right);
  CHECK(return_time_r(s, {x, 0.3}) == b.time);
  CHECK(return_time_r(s, {x, -0.8}) == b.time);  // constant on the leaf

  const double T = total_return_time_T(sys, s, {x, 0.3});
  CHECK(T >= b.time * sys.roof.c0);
  // independent term-by-term recomputation through the Poincare map
  double expect = 0.0;
  model::SectionPoint p{x, 0.3};
  for (int j = 0; j < b.time; ++j) {
    expect += model::roof_eval(sys.roof, p.x);
    p = model::poincare_eval(sys, p);
  }
  CHECK(T == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("distortion fit") {
  const auto& s = test_scheme();
  // widest branch carries the most inner structure
  int widest = 1;
  for (const auto& b : s.branches) {
    if (b.right - b.left > s.branch(widest).right - s.branch(widest).left) widest = b.index;
  }
  const auto rep = check_distortion(s, widest, 2000, 9);
  CHECK(rep.c_fit < 1.0);
  CHECK(rep.c_fit > 0.0);
  const auto global = check_distortion_global(s, 4000, 10, true);
  CHECK(global.c_fit < 1.0);
  // bound c^n dominates every bin by construction of the fit
  for (std::size_t n = 1; n < global.bin_max.size(); ++n) {
    if (global.pair_counts[n] == 0) continue;
    CHECK(global.bin_max[n] <= std::pow(global.c_fit, static_cast<double>(n)) + 1e-12);
  }
}

TEST_CASE("scheme csv round trip and tamper detection") {
  const auto& s = test_scheme();
  const auto dir = std::filesystem::temp_directory_path() / "lorenzlab_test_scheme";
  std::filesystem::create_directories(dir);
  const auto path = dir / "scheme.csv";
  write_scheme_csv(path, s, {"unit test"});
  SchemeParams p;
  p.delta = s.delta;
  p.max_time = s.max_time;
  p.min_length = s.min_length;
  const auto loaded = read_scheme_csv(s.map, p, path);
  REQUIRE(loaded.branches.size() == s.branches.size());
  for (std::size_t i = 0; i < s.branches.size(); ++i) {
    CHECK(loaded.branches[i].left == s.branches[i].left);
    CHECK(loaded.branches[i].right == s.branches[i].right);
    CHECK(loaded.branches[i].time == s.branches[i].time);
    CHECK(loaded.branches[i].sign_mask == s.branches[i].sign_mask);
  }
  CHECK(loaded.coverage == doctest::Approx(s.coverage).epsilon(1e-12));

  // overlapping branches must be rejected on load
  std::string tampered = "index,left,right,inducing_time,orientation\n";
  tampered += "1," + format_double(s.branches[0].left) + "," +
              format_double(s.branches[0].right) + "," + format_int(s.branches[0].time) + ",1\n";
  tampered += "2," + format_double(s.branches[0].left + 1e-6) + "," +
              format_double(s.branches[0].right + 1e-6) + "," +
              format_int(s.branches[0].time) + ",1\n";
  write_text_file(dir / "tampered.csv", tampered);
  CHECK_THROWS_AS(read_scheme_csv(s.map, p, dir / "tampered.csv"), InconsistencyError);
}
