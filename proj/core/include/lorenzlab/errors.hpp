#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lorenzlab {

// Invalid configuration or parameters outside their documented domain.
// CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative method failed to reach its target residual.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double residual_)
      : std::runtime_error(what), residual(residual_) {}
  double residual;
};

// A point fell into a gap of the (truncated) inducing partition.
struct NotCoveredError : std::runtime_error {
  NotCoveredError(const std::string& what, int nearest_branch_, double distance_)
      : std::runtime_error(what), nearest_branch(nearest_branch_), distance(distance_) {}
  int nearest_branch;
  double distance;
};

// encode() hit a gap after k symbols; carries the partial itinerary.
struct PartialItineraryError : std::runtime_error {
  PartialItineraryError(const std::string& what, std::vector<int> symbols_)
      : std::runtime_error(what), symbols(std::move(symbols_)) {}
  std::vector<int> symbols;
};

// Nested preimages became inconsistent; signals a scheme-construction defect.
struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A symbolic word referenced a branch outside the truncated alphabet.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accumulated products fell below the representable range.
struct UnderflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& what, long step_)
      : std::runtime_error(what), step(step_) {}
  long step;
};

struct LengthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lorenzlab
