#include "lorenzlab/cocycle.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lorenzlab/errors.hpp"
#include "lorenzlab/io.hpp"
#include "lorenzlab/rng.hpp"

namespace lorenzlab::cocycle {

using json = nlohmann::ordered_json;

const CMatrix& CocycleGenerator::value(std::span<const int> leading) const {
  if (depth == 0) return fallback;
  if (static_cast<int>(leading.size()) < depth) {
    throw LengthError("generator: fewer symbols than the generator depth");
  }
  thread_local Word key;
  key.assign(leading.begin(), leading.begin() + depth);
  const auto it = table.find(key);
  return it == table.end() ? fallback : it->second;
}

void CocycleGenerator::validate() const {
  if (d < 1) throw ConfigError("generator: dimension must be positive");
  if (depth < 0) throw ConfigError("generator: depth must be nonnegative");
  auto check = [this](const CMatrix& m, const std::string& which) {
    if (m.dim() != d) throw ConfigError("generator: entry dimension mismatch at " + which);
    if (!m.all_finite()) throw ConfigError("generator: non-finite entry at " + which);
    if (std::abs(determinant(m)) <= 1e-12) {
      throw SingularMatrixError("generator: entry at " + which +
                                " is singular (|det| <= 1e-12)");
    }
  };
  check(fallback, "fallback");
  for (const auto& [w, m] : table) {
    if (static_cast<int>(w.size()) != depth) {
      throw ConfigError("generator: table word length differs from depth");
    }
    check(m, "word of length " + format_int(static_cast<long long>(w.size())));
  }
}

CMatrix generator_eval(const CocycleGenerator& g, const inducing::Itinerary& it) {
  return g.value(it.future);
}

CMatrix cocycle_product(const CocycleGenerator& g, const inducing::Itinerary& it, int n) {
  if (n < 0) throw ConfigError("cocycle_product: n must be nonnegative");
  CMatrix prod = CMatrix::identity(g.d);
  if (n == 0) return prod;
  if (g.depth == 0) {
    for (int j = 0; j < n; ++j) prod = g.fallback * prod;
    return prod;
  }
  if (static_cast<int>(it.future.size()) < n - 1 + g.depth) {
    throw LengthError("cocycle_product: itinerary too short for " + format_int(n) +
                      " factors at depth " + format_int(g.depth));
  }
  for (int j = 0; j < n; ++j) {
    const std::span<const int> lead(it.future.data() + j,
                                    it.future.size() - static_cast<std::size_t>(j));
    prod = g.value(lead) * prod;  // newest factor on the left
  }
  return prod;
}

CMatrix cocycle_inverse_product(const CocycleGenerator& g, const inducing::Itinerary& it, int n) {
  if (n < 0) throw ConfigError("cocycle_inverse_product: n must be nonnegative");
  if (n == 0) return CMatrix::identity(g.d);
  if (static_cast<int>(it.past.size()) < n) {
    throw LengthError("cocycle_inverse_product: fewer than n past symbols");
  }
  inducing::Itinerary shifted = it;
  for (int j = 0; j < n; ++j) shifted = shifted.shifted_backward();
  return inverse(cocycle_product(g, shifted, n));
}

namespace {

int first_disagreement(const Word& a, const Word& b) {
  const std::size_t m = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i] != b[i]) return static_cast<int>(i);
  }
  return static_cast<int>(m);
}

}  // namespace

double holder_seminorm(const CocycleGenerator& g, const inducing::SymbolicMetric& metric,
                       double eta, long sample_pairs, std::uint64_t seed) {
  if (!(eta > 0.0) || eta > 1.0) throw ConfigError("holder_seminorm: eta must lie in (0,1]");
  if (g.depth == 0 || g.table.empty()) return 0.0;  // constant generator
  const double theta = metric.theta;
  if (!(theta > 0.0) || !(theta < 1.0)) {
    throw ConfigError("holder_seminorm: theta must lie in (0,1)");
  }
  std::vector<const Word*> words;
  words.reserve(g.table.size());
  std::vector<const CMatrix*> mats;
  for (const auto& [w, m] : g.table) {
    words.push_back(&w);
    mats.push_back(&m);
  }
  const std::size_t n = words.size();
  double best = 0.0;
  auto consider = [&](const CMatrix& a, const CMatrix& b, int s) {
    const double num = operator_norm(a - b);
    if (num == 0.0) return;
    best = std::max(best, num / std::pow(theta, eta * static_cast<double>(s)));
  };
  const bool enumerate = n * n <= 4'000'000;
  if (enumerate) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        consider(*mats[i], *mats[j], first_disagreement(*words[i], *words[j]));
      }
    }
  } else {
    Rng rng(derive_seed(seed, "holder"));
    for (long k = 0; k < sample_pairs; ++k) {
      const std::size_t i = static_cast<std::size_t>(rng.uniform_index(static_cast<long>(n)));
      const std::size_t j = static_cast<std::size_t>(rng.uniform_index(static_cast<long>(n)));
      if (i == j) continue;
      consider(*mats[i], *mats[j], first_disagreement(*words[i], *words[j]));
    }
  }
  // a word outside the table can agree with a table word up to depth-1
  // symbols before falling back, so the fallback pairs at s = depth-1 bind
  for (std::size_t i = 0; i < n; ++i) {
    consider(*mats[i], g.fallback, g.depth - 1);
  }
  return best;
}

BunchingReport fiber_bunching_check(const CocycleGenerator& g, double theta, double eta,
                                    double tau, BunchingMode mode) {
  if (!(theta > 0.0) || !(theta < 1.0)) {
    throw ConfigError("fiber_bunching_check: theta must lie in (0,1)");
  }
  if (!(eta > 0.0) || eta > 1.0) throw ConfigError("fiber_bunching_check: eta must lie in (0,1]");
  if (!(tau > 0.0) || !(tau < 1.0)) throw ConfigError("fiber_bunching_check: tau must lie in (0,1)");
  g.validate();
  const double theta_eta = std::pow(theta, eta);
  BunchingReport rep;
  rep.theta = theta;
  rep.eta = eta;
  rep.tau = tau;
  auto product_of = [&](const CMatrix& m) {
    const std::vector<double> sv = singular_values(m);
    const double smin = sv.back();
    if (smin <= 0.0) throw SingularMatrixError("fiber_bunching_check: singular entry");
    return (sv.front() / smin) * theta_eta;
  };
  rep.worst_product = product_of(g.fallback);
  rep.worst_word.clear();
  long step = 1;
  if (mode == BunchingMode::sampled && g.table.size() > 4096) {
    step = static_cast<long>(g.table.size() / 4096);
  }
  long i = 0;
  for (const auto& [w, m] : g.table) {
    if (i++ % step != 0) continue;
    const double p = product_of(m);
    if (p > rep.worst_product) {
      rep.worst_product = p;
      rep.worst_word = w;
    }
  }
  rep.passed = rep.worst_product < tau;
  return rep;
}

CocycleGenerator sample_fiber_bunched(std::uint64_t seed, int d, int depth,
                                      std::span<const int> symbols, double epsilon, double theta,
                                      double eta, double tau) {
  if (d < 1) throw ConfigError("sample_fiber_bunched: d must be positive");
  if (depth < 0) throw ConfigError("sample_fiber_bunched: depth must be nonnegative");
  if (epsilon < 0.0) throw ConfigError("sample_fiber_bunched: epsilon must be nonnegative");
  const double gate = std::pow(1.0 + epsilon * d, 2.0) * std::pow(theta, eta);
  if (!(gate < tau)) {
    throw ConfigError("sample_fiber_bunched: epsilon too large: (1+eps*d)^2 theta^eta = " +
                      format_double(gate) + " must stay below tau = " + format_double(tau));
  }
  if (!(epsilon * d < 1.0)) {
    throw ConfigError("sample_fiber_bunched: need eps*d < 1 to keep entries invertible");
  }
  if (depth > 0 && symbols.empty()) {
    throw ConfigError("sample_fiber_bunched: table symbols required at positive depth");
  }

  std::vector<Word> table_words;
  if (depth > 0) {
    // all depth-long words over the given symbols
    const std::size_t count = [&] {
      std::size_t c = 1;
      for (int k = 0; k < depth; ++k) c *= symbols.size();
      return c;
    }();
    if (count > 200000) {
      throw ConfigError("sample_fiber_bunched: table would exceed 200000 words");
    }
    table_words.reserve(count);
    Word w(static_cast<std::size_t>(depth), symbols[0]);
    std::vector<std::size_t> idx(static_cast<std::size_t>(depth), 0);
    for (std::size_t k = 0; k < count; ++k) {
      for (int p = 0; p < depth; ++p) w[static_cast<std::size_t>(p)] = symbols[idx[static_cast<std::size_t>(p)]];
      table_words.push_back(w);
      for (int p = depth - 1; p >= 0; --p) {
        if (++idx[static_cast<std::size_t>(p)] < symbols.size()) break;
        idx[static_cast<std::size_t>(p)] = 0;
      }
    }
  }

  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, "bunched", attempt));
    CocycleGenerator g;
    g.d = d;
    g.depth = depth;
    auto draw = [&]() {
      CMatrix m = CMatrix::identity(d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) m.at(i, j) += epsilon * rng.unit_disc();
      }
      return m;
    };
    g.fallback = draw();
    for (const Word& w : table_words) g.table.emplace(w, draw());
    try {
      if (fiber_bunching_check(g, theta, eta, tau).passed) return g;
    } catch (const SingularMatrixError&) {
      // fall through to resample
    }
    if (attempt > 64) {
      throw ConvergenceError("sample_fiber_bunched: did not find a bunched sample", 0.0);
    }
  }
}

CMatrix induced_from_suspension(const SuspensionCocycle& susp, model::SectionPoint x) {
  const auto& s = *susp.scheme;
  const inducing::Itinerary it = inducing::encode(s, x.x, std::max(1, susp.generator.depth));
  return generator_eval(susp.generator, it);
}

CMatrix suspension_eval(const SuspensionCocycle& susp, model::SectionPoint x, double t) {
  if (t < 0.0) throw ConfigError("suspension_eval: t must be nonnegative");
  const auto& s = *susp.scheme;
  const auto& sys = *susp.system;
  CMatrix prod = CMatrix::identity(susp.generator.d);
  if (t == 0.0) return prod;
  double elapsed = 0.0;
  model::SectionPoint p = x;
  std::vector<int> symbols;
  const int need = susp.generator.depth;
  while (true) {
    const double T = inducing::total_return_time_T(sys, s, p);
    if (elapsed + T > t) break;  // next return happens after time t
    elapsed += T;
    // collect enough lookahead symbols for the generator value at p
    inducing::Itinerary it = inducing::encode(s, p.x, std::max(1, need));
    prod = generator_eval(susp.generator, it) * prod;
    // advance the section point by one induced step
    const inducing::InducedStep step = inducing::induced_eval(s, p.x);
    double y = p.y;
    double xc = p.x;
    const inducing::Branch& b = s.branch(step.branch_index);
    for (int j = 0; j < b.time; ++j) {
      y = sys.skew.beta * y + (xc > 0.0 ? sys.skew.gamma : -sys.skew.gamma);
      xc = model::lorenz_map_eval(sys.map, xc);
    }
    p = {step.image, y};
  }
  return prod;
}

std::string generator_to_json(const CocycleGenerator& g) {
  json j;
  j["d"] = g.d;
  j["depth"] = g.depth;
  json entries = json::array();
  for (const auto& [w, m] : g.table) {
    json e;
    e["word"] = w;
    json flat = json::array();
    for (const auto& z : m.data()) {
      flat.push_back(z.real());
      flat.push_back(z.imag());
    }
    e["m"] = std::move(flat);
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  json flat = json::array();
  for (const auto& z : g.fallback.data()) {
    flat.push_back(z.real());
    flat.push_back(z.imag());
  }
  j["default"] = std::move(flat);
  return j.dump(2) + "\n";
}

CocycleGenerator generator_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("generator json: ") + e.what());
  }
  CocycleGenerator g;
  g.d = j.at("d").get<int>();
  g.depth = j.at("depth").get<int>();
  auto unflatten = [&](const json& flat) {
    if (static_cast<int>(flat.size()) != 2 * g.d * g.d) {
      throw IoError("generator json: matrix entry count mismatch");
    }
    CMatrix m(g.d);
    for (int i = 0; i < g.d * g.d; ++i) {
      m.data()[static_cast<std::size_t>(i)] = {flat[2 * i].get<double>(),
                                               flat[2 * i + 1].get<double>()};
    }
    return m;
  };
  g.fallback = unflatten(j.at("default"));
  for (const auto& e : j.at("entries")) {
    g.table.emplace(e.at("word").get<Word>(), unflatten(e.at("m")));
  }
  g.validate();
  return g;
}

}  // namespace lorenzlab::cocycle
