#include "lorenzlab/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/rng.hpp"

namespace lorenzlab::inducing {

namespace {

// Builder-internal evaluation runs in extended precision: the onto-endpoint
// residual of a branch scales with the branch derivative (up to ~1e9 at the
// default min_length), which double-precision forward evaluation cannot keep
// under the 1e-10 construction tolerance.
using ld = long double;

ld g_ld(const model::LorenzMapParams& m, ld x) {
  const ld ax = x < 0 ? -x : x;
  const ld v = static_cast<ld>(m.scale) * powl(ax, static_cast<ld>(m.rho)) - 1.0L;
  return x > 0 ? v : -v;
}

// Inverse of the one-sided branch of g: positive side g(x) = scale*x^rho - 1,
// negative side the odd reflection.
ld g_inv_ld(const model::LorenzMapParams& m, ld y, bool positive_side) {
  const ld inv_rho = 1.0L / static_cast<ld>(m.rho);
  if (positive_side) {
    ld base = (y + 1.0L) / static_cast<ld>(m.scale);
    if (base < 0.0L) base = 0.0L;
    return powl(base, inv_rho);
  }
  ld base = (1.0L - y) / static_cast<ld>(m.scale);
  if (base < 0.0L) base = 0.0L;
  return -powl(base, inv_rho);
}

// Pull a target value backward through the sign history of a monotone piece.
ld pull_back_ld(const model::LorenzMapParams& m, ld target, std::uint64_t mask, int t) {
  ld y = target;
  for (int j = t - 1; j >= 0; --j) {
    y = g_inv_ld(m, y, (mask >> j) & 1u);
  }
  return y;
}

ld forward_ld(const model::LorenzMapParams& m, ld x, int t) {
  for (int j = 0; j < t; ++j) x = g_ld(m, x);
  return x;
}

struct Piece {
  ld a, b;  // domain interval, subinterval of Ihat
  int t;
  ld u, v;  // image interval g^t((a,b)); endpoints may be exact 0 at a cut
  std::uint64_t mask;
};

}  // namespace

void SchemeParams::validate() const {
  if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigError("[inducing] delta must lie in (0,1)");
  if (max_time < 1 || max_time > 60) {
    throw ConfigError("[inducing] max_time must lie in [1, 60]");
  }
  if (!(min_length > 0.0) || !(min_length < delta)) {
    throw ConfigError("[inducing] min_length must lie in (0, delta)");
  }
}

SchemeParams SchemeParams::from_config(const Config& cfg) {
  SchemeParams p;
  p.delta = cfg.get_double("inducing", "delta", p.delta);
  p.max_time = static_cast<int>(cfg.get_int("inducing", "max_time", p.max_time));
  p.min_length = cfg.get_double("inducing", "min_length", p.min_length);
  p.validate();
  return p;
}

void SchemeParams::to_config(Config& cfg) const {
  cfg.set_double("inducing", "delta", delta);
  cfg.set_int("inducing", "max_time", max_time);
  cfg.set_double("inducing", "min_length", min_length);
}

namespace {

// Sampled lower envelope of |ghat'| over a branch. Only branches whose mean
// derivative is small can carry the global minimum, so wide branches get the
// fine scan and the rest use their mean-value bound.
double branch_min_log_derivative(const InducingScheme& s, const Branch& b) {
  double best = std::numeric_limits<double>::infinity();
  const int samples = 9;
  for (int k = 0; k <= samples; ++k) {
    const double x = b.left + (b.right - b.left) * (static_cast<double>(k) / samples);
    if (std::abs(x) <= model::kSingularTolerance) continue;
    best = std::min(best, s.induced_log_derivative(b, x));
  }
  return best;
}

}  // namespace

InducingScheme build_inducing_scheme(const model::LorenzMapParams& map, const SchemeParams& p) {
  map.validate();
  p.validate();
  constexpr double kEndpointTolerance = 1e-10;

  InducingScheme s;
  s.map = map;
  s.delta = p.delta;
  s.max_time = p.max_time;
  s.min_length = p.min_length;

  const ld delta = static_cast<ld>(p.delta);
  std::vector<Piece> stack;
  // the two monotone halves of Ihat, one iterate in
  stack.push_back({-delta, 0.0L, 1, g_ld(map, -delta), 1.0L, 0u});
  stack.push_back({0.0L, delta, 1, -1.0L, g_ld(map, delta), 1u});

  double truncated = 0.0;
  double pruned = 0.0;
  std::vector<Branch> found;

  while (!stack.empty()) {
    Piece pc = stack.back();
    stack.pop_back();
    const double len = static_cast<double>(pc.b - pc.a);
    if (len < p.min_length) {
      pruned += len;
      continue;
    }
    if (pc.t > p.max_time) {
      truncated += len;
      continue;
    }
    if (pc.u <= -delta && pc.v >= delta) {
      // the image covers Ihat: extract the full branch
      ld x_lo = pull_back_ld(map, -delta, pc.mask, pc.t);
      ld x_hi = pull_back_ld(map, delta, pc.mask, pc.t);
      x_lo = std::min(std::max(x_lo, pc.a), pc.b);
      x_hi = std::min(std::max(x_hi, pc.a), pc.b);
      if (x_hi > x_lo) {
        const double r_lo = static_cast<double>(fabsl(forward_ld(map, x_lo, pc.t) + delta));
        const double r_hi = static_cast<double>(fabsl(forward_ld(map, x_hi, pc.t) - delta));
        const double residual = std::max(r_lo, r_hi);
        const double blen = static_cast<double>(x_hi - x_lo);
        if (blen >= p.min_length) {
          if (residual <= kEndpointTolerance) {
            Branch br;
            br.left = static_cast<double>(x_lo);
            br.right = static_cast<double>(x_hi);
            br.time = pc.t;
            br.orientation = +1;  // g is increasing on both sides of 0
            br.sign_mask = pc.mask;
            br.endpoint_residual = residual;
            found.push_back(br);
          } else {
            truncated += blen;  // could not certify the onto property
          }
        } else {
          pruned += blen;
        }
      }
      stack.push_back({pc.a, x_lo, pc.t, pc.u, -delta, pc.mask});
      stack.push_back({x_hi, pc.b, pc.t, delta, pc.v, pc.mask});
      continue;
    }
    if (pc.u < 0.0L && pc.v > 0.0L) {
      // image straddles the discontinuity: cut at the preimage of 0 and step
      // both halves forward with the one-sided limits g(0-) = 1, g(0+) = -1
      const ld c = std::min(std::max(pull_back_ld(map, 0.0L, pc.mask, pc.t), pc.a), pc.b);
      if (pc.t + 1 <= p.max_time + 1) {
        const std::uint64_t bit = 1ull << pc.t;
        stack.push_back({pc.a, c, pc.t + 1, g_ld(map, pc.u), 1.0L, pc.mask});
        stack.push_back({c, pc.b, pc.t + 1, -1.0L, g_ld(map, pc.v), pc.mask | bit});
      }
      continue;
    }
    // image clear of the discontinuity: iterate the whole piece
    const bool positive = pc.v > 0.0L;
    const ld gu = (pc.u == 0.0L) ? -1.0L : g_ld(map, pc.u);
    const ld gv = (pc.v == 0.0L) ? 1.0L : g_ld(map, pc.v);
    const std::uint64_t bit = positive ? (1ull << pc.t) : 0u;
    stack.push_back({pc.a, pc.b, pc.t + 1, gu, gv, pc.mask | bit});
  }

  if (found.empty()) {
    throw ConfigError("build_inducing_scheme: no branch found up to max_time = " +
                      format_int(p.max_time) + "; increase max_time or adjust delta");
  }

  std::sort(found.begin(), found.end(),
            [](const Branch& a, const Branch& b) { return a.left < b.left; });
  for (std::size_t i = 0; i < found.size(); ++i) found[i].index = static_cast<int>(i) + 1;
  s.branches = std::move(found);

  double covered = 0.0;
  for (const Branch& b : s.branches) covered += b.right - b.left;
  s.coverage = covered / (2.0 * p.delta);
  s.truncated_mass = truncated / (2.0 * p.delta);
  s.pruned_mass = pruned / (2.0 * p.delta);

  double min_logd = std::numeric_limits<double>::infinity();
  for (const Branch& b : s.branches) {
    // only branches with small mean expansion can attain the minimum
    const double mean = (2.0 * p.delta) / (b.right - b.left);
    if (std::log(mean) - 1.0 > min_logd) continue;
    min_logd = std::min(min_logd, branch_min_log_derivative(s, b));
  }
  s.min_induced_derivative = std::exp(min_logd);
  return s;
}

int InducingScheme::branch_at(double x) const {
  if (branches.empty()) return -1;
  auto it = std::upper_bound(branches.begin(), branches.end(), x,
                             [](double v, const Branch& b) { return v < b.left; });
  if (it == branches.begin()) return -1;
  --it;
  if (x >= it->left && x <= it->right) return it->index;
  return -1;
}

const Branch& InducingScheme::branch(int index) const {
  if (index < 1 || index > static_cast<int>(branches.size())) {
    throw TruncationError("branch index " + format_int(index) +
                          " outside the truncated alphabet [1, " +
                          format_int(static_cast<long long>(branches.size())) + "]");
  }
  return branches[static_cast<std::size_t>(index) - 1];
}

double InducingScheme::induced_map(const Branch& b, double x) const {
  double y = x;
  for (int j = 0; j < b.time; ++j) y = model::lorenz_map_eval(map, y);
  // residual-level noise must not push the image out of the closure of Ihat
  return std::min(std::max(y, -delta), delta);
}

double InducingScheme::induced_inverse(const Branch& b, double y) const {
  const ld x = pull_back_ld(map, static_cast<ld>(y), b.sign_mask, b.time);
  return std::min(std::max(static_cast<double>(x), b.left), b.right);
}

double InducingScheme::induced_log_derivative(const Branch& b, double x) const {
  double s = 0.0;
  double y = x;
  for (int j = 0; j < b.time; ++j) {
    s += std::log(model::lorenz_map_derivative(map, y));
    y = model::lorenz_map_eval(map, y);
  }
  return s;
}

InducedStep induced_eval(const InducingScheme& s, double x) {
  const int idx = s.branch_at(x);
  if (idx < 0) {
    // report the nearest branch for diagnostics
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    auto it = std::upper_bound(s.branches.begin(), s.branches.end(), x,
                               [](double v, const Branch& b) { return v < b.left; });
    if (it != s.branches.end()) {
      best = it->left - x;
      nearest = it->index;
    }
    if (it != s.branches.begin()) {
      --it;
      const double d = x - it->right;
      if (d < best) {
        best = d;
        nearest = it->index;
      }
    }
    throw NotCoveredError("point " + format_double(x) + " lies in a gap of the scheme",
                          nearest, best);
  }
  const Branch& b = s.branch(idx);
  return {s.induced_map(b, x), idx};
}

Itinerary Itinerary::unilateral(std::vector<int> symbols) {
  Itinerary it;
  it.future = std::move(symbols);
  return it;
}

Itinerary Itinerary::make_bilateral(std::vector<int> past, std::vector<int> future) {
  Itinerary it;
  it.past = std::move(past);
  it.future = std::move(future);
  it.bilateral = true;
  return it;
}

Itinerary Itinerary::shifted_forward() const {
  if (future.empty()) throw LengthError("shift: no future symbols");
  Itinerary out = *this;
  out.past.insert(out.past.begin(), out.future.front());
  out.future.erase(out.future.begin());
  out.bilateral = true;
  return out;
}

Itinerary Itinerary::shifted_backward() const {
  if (past.empty()) throw LengthError("shift: no past symbols");
  Itinerary out = *this;
  out.future.insert(out.future.begin(), out.past.front());
  out.past.erase(out.past.begin());
  return out;
}

Itinerary encode(const InducingScheme& s, double x, int n) {
  if (n < 0) throw ConfigError("encode: n must be nonnegative");
  std::vector<int> symbols;
  symbols.reserve(static_cast<std::size_t>(n));
  double y = x;
  for (int k = 0; k < n; ++k) {
    const int idx = s.branch_at(y);
    if (idx < 0) {
      throw PartialItineraryError(
          "encode: gap hit at step " + format_int(k) + " of " + format_int(n),
          std::move(symbols));
    }
    symbols.push_back(idx);
    y = s.induced_map(s.branch(idx), y);
  }
  return Itinerary::unilateral(std::move(symbols));
}

DecodeResult decode(const InducingScheme& s, const Itinerary& it, int n) {
  if (n < 0 || n > static_cast<int>(it.future.size())) {
    throw LengthError("decode: n exceeds the itinerary length");
  }
  double lo = -s.delta;
  double hi = s.delta;
  for (int k = n - 1; k >= 0; --k) {
    const Branch& b = s.branch(it.future[static_cast<std::size_t>(k)]);
    lo = s.induced_inverse(b, lo);
    hi = s.induced_inverse(b, hi);
    if (lo > hi) throw InconsistencyError("decode: empty nested preimage");
  }
  // conservative outward rounding: encode() iterates forward in double with
  // clamping at the ends of Ihat, which can displace deep orbits by up to
  // ~1e-12 absolute; the enclosure absorbs that so containment is robust
  constexpr double kSlack = 1e-11;
  lo -= kSlack;
  hi += kSlack;
  return {0.5 * (lo + hi), lo, hi};
}

BilateralDecodeResult bilateral_decode(const InducingScheme& s, const model::SkewParams& skew,
                                       const Itinerary& it, int n_past, int n_future) {
  if (!it.bilateral && n_past > 0) throw LengthError("bilateral_decode: itinerary is unilateral");
  if (n_past < 0 || n_past > static_cast<int>(it.past.size()) || n_future < 0 ||
      n_future > static_cast<int>(it.future.size())) {
    throw LengthError("bilateral_decode: window exceeds the itinerary");
  }
  BilateralDecodeResult out;
  const DecodeResult dx = decode(s, it, n_future);
  out.x_lo = dx.lo;
  out.x_hi = dx.hi;
  if (n_past == 0) {
    out.point = {dx.point, 0.0};
    out.y_lo = -1.0;
    out.y_hi = 1.0;
    return out;
  }
  // decode the point n_past induced steps in the past, then push the fiber
  // coordinate forward from the leaf midpoint y = 0
  std::vector<int> shifted;
  shifted.reserve(static_cast<std::size_t>(n_past + n_future));
  for (int k = n_past - 1; k >= 0; --k) shifted.push_back(it.past[static_cast<std::size_t>(k)]);
  for (int k = 0; k < n_future; ++k) shifted.push_back(it.future[static_cast<std::size_t>(k)]);
  const DecodeResult dz = decode(s, Itinerary::unilateral(shifted), n_past + n_future);
  double x = dz.point;
  double y = 0.0;
  long fiber_steps = 0;
  for (int k = n_past - 1; k >= 0; --k) {
    const Branch& b = s.branch(it.past[static_cast<std::size_t>(k)]);
    for (int j = 0; j < b.time; ++j) {
      y = skew.beta * y + (x > 0.0 ? skew.gamma : -skew.gamma);
      x = model::lorenz_map_eval(s.map, x);
      ++fiber_steps;
    }
    x = std::min(std::max(x, -s.delta), s.delta);
  }
  const double bound = std::pow(skew.beta, static_cast<double>(fiber_steps));
  out.point = {dx.point, y};
  out.y_lo = std::max(y - bound, -1.0);
  out.y_hi = std::min(y + bound, 1.0);
  return out;
}

double symbolic_distance(const SymbolicMetric& m, const Itinerary& a, const Itinerary& b) {
  if (a.bilateral != b.bilateral) {
    throw LengthError("symbolic_distance: itineraries have different sidedness");
  }
  if (!(m.theta > 0.0) || !(m.theta < 1.0)) {
    throw ConfigError("symbolic_distance: theta must lie in (0,1)");
  }
  const std::size_t nf = std::min(a.future.size(), b.future.size());
  std::size_t sf = nf;
  for (std::size_t i = 0; i < nf; ++i) {
    if (a.future[i] != b.future[i]) {
      sf = i;
      break;
    }
  }
  if (!a.bilateral) {
    if (sf == nf) return 0.0;  // equal on the compared range
    return std::pow(m.theta, static_cast<double>(sf));
  }
  const std::size_t np = std::min(a.past.size(), b.past.size());
  std::size_t sp = np;
  for (std::size_t i = 0; i < np; ++i) {
    if (a.past[i] != b.past[i]) {
      sp = i;
      break;
    }
  }
  // disagreement indices: sf in the future, -(sp+1) in the past
  if (sf == nf && sp == np) return 0.0;
  std::size_t sdx;
  if (sf == nf) {
    sdx = sp + 1;
  } else if (sp == np) {
    sdx = sf;
  } else {
    sdx = std::min(sf, sp + 1);
  }
  return std::pow(m.theta, static_cast<double>(sdx));
}

double metric_theta(const InducingScheme& s, const model::SkewParams& skew) {
  return std::max(skew.beta, 1.0 / s.min_induced_derivative);
}

namespace {

// Split time of a pair under the induced map; 0 means "never split within cap"
// reported via the bool.
struct SplitResult {
  int n = 0;
  bool ok = false;
};

SplitResult split_time(const InducingScheme& s, double x, double y, int cap) {
  double xi = x, yi = y;
  for (int n = 0; n < cap; ++n) {
    const int bi = s.branch_at(xi);
    const int bj = s.branch_at(yi);
    if (bi < 0 || bj < 0) return {n, false};
    if (bi != bj) return {n, true};
    xi = s.induced_map(s.branch(bi), xi);
    yi = s.induced_map(s.branch(bj), yi);
  }
  return {cap, false};
}

void distortion_accumulate(const InducingScheme& s, const Branch& b, double x, double y,
                           DistortionReport& rep, int cap) {
  const SplitResult sp = split_time(s, x, y, cap);
  if (!sp.ok || sp.n == 0) {
    ++rep.discarded;
    return;
  }
  const double ratio =
      std::abs(s.induced_log_derivative(b, x) - s.induced_log_derivative(b, y));
  if (static_cast<int>(rep.bin_max.size()) <= sp.n) {
    rep.bin_max.resize(static_cast<std::size_t>(sp.n) + 1, 0.0);
    rep.pair_counts.resize(static_cast<std::size_t>(sp.n) + 1, 0);
  }
  rep.bin_max[static_cast<std::size_t>(sp.n)] =
      std::max(rep.bin_max[static_cast<std::size_t>(sp.n)], ratio);
  ++rep.pair_counts[static_cast<std::size_t>(sp.n)];
}

double fit_c(const DistortionReport& rep) {
  double c = 0.0;
  for (std::size_t n = 1; n < rep.bin_max.size(); ++n) {
    if (rep.pair_counts[n] == 0 || rep.bin_max[n] <= 0.0) continue;
    c = std::max(c, std::pow(rep.bin_max[n], 1.0 / static_cast<double>(n)));
  }
  return c;
}

}  // namespace

DistortionReport check_distortion(const InducingScheme& s, int branch_index, long n_pairs,
                                  std::uint64_t seed) {
  if (n_pairs < 1) throw ConfigError("check_distortion: n_pairs must be positive");
  const Branch& b = s.branch(branch_index);
  Rng rng(derive_seed(seed, "distortion", static_cast<std::uint64_t>(branch_index)));
  DistortionReport rep;
  const int cap = 40;
  for (long k = 0; k < n_pairs; ++k) {
    const double x = rng.uniform(b.left, b.right);
    const double y = rng.uniform(b.left, b.right);
    if (x == y) {
      ++rep.discarded;
      continue;
    }
    distortion_accumulate(s, b, x, y, rep, cap);
  }
  rep.c_fit = fit_c(rep);
  return rep;
}

DistortionReport check_distortion_global(const InducingScheme& s, long n_pairs,
                                         std::uint64_t seed, bool augment_endpoints) {
  if (n_pairs < 1) throw ConfigError("check_distortion_global: n_pairs must be positive");
  Rng rng(derive_seed(seed, "distortion_global"));
  DistortionReport rep;
  const int cap = 40;
  long produced = 0;
  long attempts = 0;
  const long max_attempts = n_pairs * 64;
  while (produced < n_pairs && attempts < max_attempts) {
    ++attempts;
    const double x = rng.uniform(-s.delta, s.delta);
    const int idx = s.branch_at(x);
    if (idx < 0) continue;
    const Branch& b = s.branch(idx);
    const double y = rng.uniform(b.left, b.right);
    if (x == y) continue;
    distortion_accumulate(s, b, x, y, rep, cap);
    ++produced;
  }
  if (augment_endpoints) {
    for (const Branch& b : s.branches) {
      const double inset = 1e-12 * (b.right - b.left);
      distortion_accumulate(s, b, b.left + inset, b.right - inset, rep, cap);
    }
  }
  rep.c_fit = fit_c(rep);
  return rep;
}

int return_time_r(const InducingScheme& s, model::SectionPoint p) {
  const int idx = s.branch_at(p.x);
  if (idx < 0) {
    throw NotCoveredError("return_time_r: leaf " + format_double(p.x) + " is not covered", -1,
                          0.0);
  }
  return s.branch(idx).time;
}

double total_return_time_T(const model::GeometricLorenzSystem& sys, const InducingScheme& s,
                           model::SectionPoint p) {
  const int idx = s.branch_at(p.x);
  if (idx < 0) {
    throw NotCoveredError("total_return_time_T: leaf is not covered", -1, 0.0);
  }
  const Branch& b = s.branch(idx);
  double total = 0.0;
  double x = p.x;
  for (int j = 0; j < b.time; ++j) {
    total += model::roof_eval(sys.roof, x);
    x = model::lorenz_map_eval(sys.map, x);
  }
  return total;
}

void write_scheme_csv(const std::filesystem::path& path, const InducingScheme& s,
                      const std::vector<std::string>& provenance) {
  CsvWriter w(path);
  for (const std::string& line : provenance) w.comment(line);
  w.row({"index", "left", "right", "inducing_time", "orientation"});
  for (const Branch& b : s.branches) {
    w.row({format_int(b.index), format_double(b.left), format_double(b.right),
           format_int(b.time), format_int(b.orientation)});
  }
  w.close();
}

InducingScheme read_scheme_csv(const model::LorenzMapParams& map, const SchemeParams& p,
                               const std::filesystem::path& path) {
  map.validate();
  p.validate();
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {"index", "left", "right", "inducing_time",
                                             "orientation"};
  if (table.header != expected) {
    throw IoError("scheme csv: unexpected header in " + path.string());
  }
  InducingScheme s;
  s.map = map;
  s.delta = p.delta;
  s.max_time = p.max_time;
  s.min_length = p.min_length;
  s.branches.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.size() != 5) throw IoError("scheme csv: malformed row");
    Branch b;
    b.index = static_cast<int>(parse_int(row[0]));
    b.left = parse_double(row[1]);
    b.right = parse_double(row[2]);
    b.time = static_cast<int>(parse_int(row[3]));
    b.orientation = static_cast<int>(parse_int(row[4]));
    s.branches.push_back(b);
  }
  if (s.branches.empty()) throw IoError("scheme csv: no branches");

  // reconstruct sign histories from the midpoint orbit, then re-validate
  double covered = 0.0;
  const Branch* prev = nullptr;
  for (std::size_t i = 0; i < s.branches.size(); ++i) {
    Branch& b = s.branches[i];
    if (b.index != static_cast<int>(i) + 1) {
      throw InconsistencyError("scheme csv: branch indices must be 1..n in order");
    }
    if (!(b.left < b.right)) throw InconsistencyError("scheme csv: degenerate branch domain");
    if (b.left < -p.delta - 1e-12 || b.right > p.delta + 1e-12) {
      throw InconsistencyError("scheme csv: branch leaves Ihat");
    }
    if (b.time < 1 || b.time > p.max_time) {
      throw InconsistencyError("scheme csv: inducing time outside [1, max_time]");
    }
    if (prev && b.left < prev->right - 1e-15) {
      throw InconsistencyError("scheme csv: branch interiors overlap");
    }
    ld x = static_cast<ld>(0.5 * (b.left + b.right));
    std::uint64_t mask = 0;
    for (int j = 0; j < b.time; ++j) {
      if (x > 0) mask |= 1ull << j;
      x = g_ld(map, x);
    }
    b.sign_mask = mask;
    const double r_lo =
        static_cast<double>(fabsl(forward_ld(map, static_cast<ld>(b.left), b.time) +
                                  static_cast<ld>(p.delta)));
    const double r_hi =
        static_cast<double>(fabsl(forward_ld(map, static_cast<ld>(b.right), b.time) -
                                  static_cast<ld>(p.delta)));
    b.endpoint_residual = std::max(r_lo, r_hi);
    if (b.endpoint_residual > 1e-8) {
      throw InconsistencyError("scheme csv: branch " + format_int(b.index) +
                               " fails the onto check, residual = " +
                               format_double(b.endpoint_residual));
    }
    covered += b.right - b.left;
    prev = &b;
  }
  s.coverage = covered / (2.0 * p.delta);
  s.truncated_mass = 1.0 - s.coverage;
  s.pruned_mass = 0.0;

  double min_logd = std::numeric_limits<double>::infinity();
  for (const Branch& b : s.branches) {
    const double mean = (2.0 * p.delta) / (b.right - b.left);
    if (std::log(mean) - 1.0 > min_logd) continue;
    min_logd = std::min(min_logd, branch_min_log_derivative(s, b));
  }
  s.min_induced_derivative = std::exp(min_logd);
  return s;
}

}  // namespace lorenzlab::inducing
