#pragma once

#include <cstdint>
#include <vector>

#include "lrmc/types.hpp"

namespace lrmc {

struct ClusterResult {
  std::vector<int> labels;  // length p, values in [0, k)
  Matrix centers;           // k x r
  double inertia = 0.0;
  bool degenerate = false;  // fewer distinct points than requested clusters
};

/// k-means++ with Lloyd refinement on the rows of the p x r left
/// singular-vector matrix of the estimate; best of `restarts` runs by
/// inertia. Deterministic for a fixed seed.
ClusterResult aggregate_states(const TransitionMatrix& estimate, int r, int k,
                               std::uint64_t seed, int restarts = 10);

/// k-means on arbitrary embedding rows (exposed for tests).
ClusterResult kmeans_rows(const Matrix& points, int k, std::uint64_t seed, int restarts);

}  // namespace lrmc
