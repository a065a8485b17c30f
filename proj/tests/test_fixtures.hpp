#pragma once

// Shared, lazily built objects for the unit suite. The scheme here is a small
// one (max_time 18) so the whole binary stays fast; the acceptance suite is
// the place that exercises the full default build.

#include <vector>

#include "lorenzlab/inducing.hpp"
#include "lorenzlab/lorenz_model.hpp"
#include "lorenzlab/measure.hpp"

const lorenzlab::model::GeometricLorenzSystem& test_system();
const lorenzlab::inducing::InducingScheme& test_scheme();
const lorenzlab::measure::DensityEstimate& test_density();
const std::vector<double>& test_branch_probs();
std::vector<int> test_symbols(int count);
