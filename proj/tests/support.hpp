// Test-only oracles, kept independent of the library code paths they check.
#pragma once

#include <cmath>
#include <functional>

#include "lrmc/matops.hpp"
#include "lrmc/types.hpp"

namespace lrmc::test {

/// Golden-section search for the minimizer of a unimodal scalar function.
inline double golden_section_minimize(const std::function<double(double)>& f, double lo,
                                      double hi, int iters = 200) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters && b - a > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Slow reference for the primal problem
///   min l_n(X) + <w, X> + (quad/2)||X||_F^2 + lambda ||X||_*
///   s.t. X 1 = 1, X >= 0,
/// by projected subgradient with diminishing steps. Rows are projected onto
/// the simplex with a tiny floor on observed entries so the log stays
/// defined. Returns the best-objective iterate. Intended for p <= 4.
struct ReferenceResult {
  Matrix x;
  double objective;
};

/// Objective of the primal problem above at a given feasible point.
inline double reference_objective(const TransitionCounts& counts, double lambda, const Matrix& w,
                                  double quad, const Matrix& x) {
  const int p = counts.p();
  const double n = static_cast<double>(counts.total);
  const bool has_w = w.size() > 0;
  double acc = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const std::int64_t nij = counts.counts(i, j);
      if (nij > 0) acc -= static_cast<double>(nij) / n * std::log(x(i, j));
      if (has_w) acc += w(i, j) * x(i, j);
      acc += 0.5 * quad * x(i, j) * x(i, j);
    }
  return acc + lambda * nuclear_norm(x);
}

/// Feasible projection used by the reference solver (rows onto the simplex
/// with a tiny floor on observed entries).
inline Matrix reference_project(const TransitionCounts& counts, Matrix x) {
  const int p = counts.p();
  for (int i = 0; i < p; ++i) {
    Vector lower = Vector::Zero(p);
    for (int j = 0; j < p; ++j)
      if (counts.counts(i, j) > 0) lower(j) = 1e-9;
    const Vector row = x.row(i);
    x.row(i) = project_simplex_lower_bounded(row, lower);
  }
  return x;
}

inline ReferenceResult reference_primal_solve(const TransitionCounts& counts, double lambda,
                                              const Matrix& w, double quad, long iters,
                                              double step0) {
  const int p = counts.p();
  const double n = static_cast<double>(counts.total);
  const bool has_w = w.size() > 0;

  // start at the smoothed empirical frequencies
  Matrix x(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      x(i, j) = (static_cast<double>(counts.counts(i, j)) + 1.0) /
                (static_cast<double>(counts.row_totals(i)) + p);
  x = reference_project(counts, x);

  ReferenceResult best{x, reference_objective(counts, lambda, w, quad, x)};
  for (long k = 0; k < iters; ++k) {
    Matrix grad = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        const std::int64_t nij = counts.counts(i, j);
        if (nij > 0) grad(i, j) -= static_cast<double>(nij) / (n * x(i, j));
        if (has_w) grad(i, j) += w(i, j);
        grad(i, j) += quad * x(i, j);
      }
    const SvdResult f = svd(x);
    grad += lambda * f.u * f.v.transpose();

    const double step = step0 / std::sqrt(static_cast<double>(k + 1));
    x = reference_project(counts, x - step * grad);
    const double obj = reference_objective(counts, lambda, w, quad, x);
    if (obj < best.objective) {
      best.objective = obj;
      best.x = x;
    }
  }
  return best;
}

}  // namespace lrmc::test
