#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lorenzlab/config.hpp"
#include "lorenzlab/lorenz_model.hpp"

namespace lorenzlab::inducing {

// One full branch of the return map to Ihat = (-delta, delta): the restriction
// of g^time to [left, right] is a monotone diffeomorphism onto Ihat. sign_mask
// records, per iterate, which side of the discontinuity the branch passes
// through (bit j set = positive side at iterate j); it makes the branch
// inverse a closed-form backward recursion, which is numerically stable
// because backward iteration of an expanding map contracts errors.
struct Branch {
  int index = 0;  // 1-based, in left-endpoint order
  double left = 0.0;
  double right = 0.0;
  int time = 0;            // inducing time r_l
  int orientation = +1;    // sign of (g^time)' on the branch
  std::uint64_t sign_mask = 0;
  double endpoint_residual = 0.0;  // max |g^time(endpoint) -+ delta| at build
};

struct SchemeParams {
  double delta = 0.5;
  int max_time = 40;
  double min_length = 1e-9;
  void validate() const;
  static SchemeParams from_config(const Config& cfg);
  void to_config(Config& cfg) const;
};

// Full-branch inducing scheme for the one-dimensional map. Construction
// iterates monotone pieces of Ihat, cutting only at preimages of the
// discontinuity and extracting a branch the first time a piece's image covers
// Ihat; the two remainders continue. The alphabet is truncated at max_time
// and min_length; the uncovered fraction is reported, not hidden.
struct InducingScheme {
  model::LorenzMapParams map;
  double delta = 0.5;
  int max_time = 40;
  double min_length = 1e-9;
  std::vector<Branch> branches;  // sorted by left endpoint, disjoint interiors

  double coverage = 0.0;         // covered fraction of Leb(Ihat)
  double truncated_mass = 0.0;   // pieces alive past max_time
  double pruned_mass = 0.0;      // pieces shorter than min_length
  double min_induced_derivative = 0.0;  // sampled estimate of min |ghat'|

  int branch_at(double x) const;               // -1 in a gap
  const Branch& branch(int index) const;       // 1-based
  double induced_map(const Branch& b, double x) const;          // g^time(x)
  double induced_inverse(const Branch& b, double y) const;      // closed form
  double induced_log_derivative(const Branch& b, double x) const;
};

InducingScheme build_inducing_scheme(const model::LorenzMapParams& map, const SchemeParams& p);

struct InducedStep {
  double image;
  int branch_index;
};

InducedStep induced_eval(const InducingScheme& s, double x);  // NotCoveredError in gaps

// Symbolic point: branch indices at times n >= 0 (future) and, when bilateral,
// at n < 0 (past[k] is the symbol at index -(k+1)).
struct Itinerary {
  std::vector<int> future;
  std::vector<int> past;
  bool bilateral = false;

  static Itinerary unilateral(std::vector<int> symbols);
  static Itinerary make_bilateral(std::vector<int> past, std::vector<int> future);
  Itinerary shifted_forward() const;   // drops future[0] into the past
  Itinerary shifted_backward() const;  // pops past[0] back into the future
};

Itinerary encode(const InducingScheme& s, double x, int n);  // PartialItineraryError on gaps

struct DecodeResult {
  double point;  // midpoint of the enclosure
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// Nested-preimage enclosure of the cylinder [l_0, ..., l_{n-1}].
DecodeResult decode(const InducingScheme& s, const Itinerary& it, int n);

struct BilateralDecodeResult {
  model::SectionPoint point;
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
};

BilateralDecodeResult bilateral_decode(const InducingScheme& s, const model::SkewParams& skew,
                                       const Itinerary& it, int n_past, int n_future);

struct SymbolicMetric {
  double theta;  // base in (0,1)
};

// theta^s with s the smallest |index| of disagreement over the compared range;
// 0 when the itineraries agree there.
double symbolic_distance(const SymbolicMetric& m, const Itinerary& a, const Itinerary& b);

// Metric base for the induced symbolic system: max of the fiber contraction
// and the reciprocal of the weakest induced expansion.
double metric_theta(const InducingScheme& s, const model::SkewParams& skew);

struct DistortionReport {
  std::vector<long> pair_counts;   // indexed by split time n
  std::vector<double> bin_max;     // max |log ghat'(x)/ghat'(y)| per n
  double c_fit = 0.0;              // smallest c with c^n >= bin_max[n] for all n
  long discarded = 0;              // pairs that hit a gap before splitting
};

// Samples pairs inside one branch; n(x,y) is the first induced-itinerary
// disagreement and the logged ratio compares one application of ghat.
DistortionReport check_distortion(const InducingScheme& s, int branch_index, long n_pairs,
                                  std::uint64_t seed);

// Lebesgue-weighted variant across all branches; optionally augments the
// sample with every branch's endpoint pair (the widest pairs available).
DistortionReport check_distortion_global(const InducingScheme& s, long n_pairs,
                                         std::uint64_t seed, bool augment_endpoints = true);

int return_time_r(const InducingScheme& s, model::SectionPoint p);

double total_return_time_T(const model::GeometricLorenzSystem& sys, const InducingScheme& s,
                           model::SectionPoint p);

void write_scheme_csv(const std::filesystem::path& path, const InducingScheme& s,
                      const std::vector<std::string>& provenance = {});

// Re-validates everything on load: ordering, disjoint interiors, containment
// in Ihat, inducing times within the cap, and the onto-endpoint residuals.
InducingScheme read_scheme_csv(const model::LorenzMapParams& map, const SchemeParams& p,
                               const std::filesystem::path& path);

}  // namespace lorenzlab::inducing
