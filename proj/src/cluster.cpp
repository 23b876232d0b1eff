#include "lrmc/cluster.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "lrmc/matops.hpp"
#include "lrmc/rng.hpp"

namespace lrmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LloydRun {
  std::vector<int> labels;
  Matrix centers;
  double inertia = kInf;
};

LloydRun lloyd_once(const Matrix& pts, int k, Rng& rng) {
  const int n = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());

  // k-means++ seeding
  Matrix centers(k, d);
  std::vector<double> dist2(n, kInf);
  centers.row(0) = pts.row(rng.uniform_int(n));
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (pts.row(i) - centers.row(c - 1)).squaredNorm());
    double total = 0.0;
    for (double v : dist2) total += v;
    if (total <= 0.0) {
      // all points coincide with chosen centers; reuse an existing point
      centers.row(c) = pts.row(rng.uniform_int(n));
      continue;
    }
    centers.row(c) = pts.row(rng.categorical(dist2));
  }

  std::vector<int> labels(n, 0);
  double inertia = kInf;
  for (int it = 0; it < 300; ++it) {
    // assignment, ties to the lowest index
    double new_inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = kInf;
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d2 = (pts.row(i) - centers.row(c)).squaredNorm();
        if (d2 < best) {
          best = d2;
          arg = c;
        }
      }
      labels[i] = arg;
      new_inertia += best;
    }
    // center update
    Matrix sums = Matrix::Zero(k, d);
    std::vector<int> sizes(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[i]) += pts.row(i);
      sizes[labels[i]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        centers.row(c) = sums.row(c) / sizes[c];
      } else {
        // empty cluster takes the point farthest from its center
        double worst = -1.0;
        int arg = 0;
        for (int i = 0; i < n; ++i) {
          const double d2 = (pts.row(i) - centers.row(labels[i])).squaredNorm();
          if (d2 > worst) {
            worst = d2;
            arg = i;
          }
        }
        centers.row(c) = pts.row(arg);
      }
    }
    if (std::isfinite(inertia) &&
        std::abs(inertia - new_inertia) <= 1e-8 * std::max(1.0, inertia)) {
      inertia = new_inertia;
      break;
    }
    inertia = new_inertia;
  }
  return {std::move(labels), std::move(centers), inertia};
}

}  // namespace

ClusterResult kmeans_rows(const Matrix& points, int k, std::uint64_t seed, int restarts) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw InvalidInputError("kmeans_rows: need 1 <= k <= #points");
  if (restarts < 1) throw InvalidInputError("kmeans_rows: need restarts >= 1");

  LloydRun best;
  for (int rep = 0; rep < restarts; ++rep) {
    Rng rng(Rng::derive(seed, 0x4b4d4e53ull, static_cast<std::uint64_t>(rep)));
    LloydRun run = lloyd_once(points, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  ClusterResult out;
  out.labels = std::move(best.labels);
  out.centers = std::move(best.centers);
  out.inertia = best.inertia;

  std::set<std::vector<double>> distinct;
  for (int i = 0; i < n; ++i)
    distinct.insert(std::vector<double>(points.row(i).begin(), points.row(i).end()));
  out.degenerate = static_cast<int>(distinct.size()) < k;
  return out;
}

ClusterResult aggregate_states(const TransitionMatrix& estimate, int r, int k,
                               std::uint64_t seed, int restarts) {
  if (r < 1 || r > estimate.p())
    throw InvalidInputError("aggregate_states: need 1 <= r <= p");
  if (k < 1 || k > estimate.p())
    throw InvalidInputError("aggregate_states: need 1 <= k <= p");
  const SvdResult f = truncated_svd(estimate.entries(), r);
  return kmeans_rows(f.u, k, seed, restarts);
}

}  // namespace lrmc
