#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lrmc/errors.hpp"

namespace lrmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Row-stochastic p x p matrix. Validated on construction: entries >= 0 and
/// row sums within 1e-10 of one.
class TransitionMatrix {
 public:
  static constexpr double kRowSumTol = 1e-10;

  TransitionMatrix() = default;  // empty placeholder, p() == 0

  static TransitionMatrix from_matrix(Matrix entries);

  /// Normalizes each row to sum to one. Rows with sum below `guard` become
  /// the uniform row 1/p; entries in [-1e-9, 0) are clamped to zero first,
  /// anything more negative is rejected.
  static TransitionMatrix normalize_rows(Matrix entries, double guard = 1e-12);

  int p() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

 private:
  explicit TransitionMatrix(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// Observed state sequence; at least two states, all in [0, p).
struct Trajectory {
  std::vector<int> states;
  int p = 0;

  void validate() const;
  long n_transitions() const { return static_cast<long>(states.size()) - 1; }
};

/// Transition counts n_ij with row totals n_i and grand total n; the
/// sufficient statistic for the likelihood.
struct TransitionCounts {
  CountMatrix counts;
  CountVector row_totals;
  std::int64_t total = 0;

  int p() const { return static_cast<int>(counts.rows()); }

  static TransitionCounts from_counts(CountMatrix counts);
};

struct StationaryDistribution {
  Vector pi;
  double pi_min = 0.0;
  double pi_max = 0.0;

  static StationaryDistribution from_vector(Vector pi);
};

struct SpectralGapReport {
  double rho_plus = 0.0;   // largest non-unit eigenvalue of the reversibilized operator
  double gap = 0.0;        // 1 - rho_plus
  bool reversible = false;
};

}  // namespace lrmc
