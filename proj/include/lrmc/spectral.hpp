#pragma once

#include "lrmc/types.hpp"

namespace lrmc {

/// Truncated-SVD baseline: rank-r reconstruction of the empirical estimator,
/// each row projected back onto the probability simplex (Euclidean
/// projection, sort-and-threshold).
TransitionMatrix spectral_estimator(const TransitionCounts& c, int r);

}  // namespace lrmc
