#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lrmc/types.hpp"

namespace lrmc {

/// Nuclear-norm regularized maximum-likelihood problem
///   min  l_n(X) + lambda ||X||_*   s.t.  X 1 = 1,  X >= 0,
/// solved through its dual by a three-block symmetric Gauss-Seidel ADMM.
struct NuclearProblem {
  const TransitionCounts* counts = nullptr;  // non-owning
  double lambda = 0.0;

  void validate() const;
};

/// Separable part of the primal objective,
///   g(X) = l_n(X) + delta(X >= 0) + <linear, X> + (quad/2) ||X||_F^2,
/// with the last two terms absent by default. The DC subproblem solver uses
/// them to absorb the linearized concave term and the proximal weight.
struct SeparableObjective {
  const TransitionCounts* counts = nullptr;
  Matrix linear;      // empty means zero
  double quad = 0.0;  // >= 0

  bool has_linear() const { return linear.size() > 0; }
  double freq(int i, int j) const {
    return static_cast<double>(counts->counts(i, j)) / static_cast<double>(counts->total);
  }

  /// Exact proximal point  argmin_Z  sigma g(Z) + 1/2 ||Z - sigma R||_F^2,
  /// entrywise in closed form.
  Matrix prox(const Matrix& r_mat, double sigma) const;

  /// g(X); +inf outside the domain (entries above -1e-6 are treated as zero,
  /// matching the dust left by the solver at its stopping tolerance).
  double value(const Matrix& x) const;

  /// Convex conjugate g*(Lambda); +inf outside its domain.
  double conjugate(const Matrix& lambda_mat) const;
};

/// Dual iterate (Xi, y, S) plus the primal multiplier X.
struct SolverState {
  Matrix dual_xi;
  Vector dual_y;
  Matrix dual_s;   // spectral norm bounded by lambda
  Matrix primal_x;
  double sigma = 1.0;
  double gamma = 1.618;
  long iter = 0;
};

struct TraceRow {
  long iter = 0;
  double kkt = 0.0;  // absolute KKT residual D
  double primal_obj = 0.0;
  double dual_obj = 0.0;
};

struct ConvergenceReport {
  double kkt = 0.0;      // absolute residual D at the returned state
  double kkt_rel = 0.0;  // D / (1 + ||b||^2) = D / (1 + p)
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  long iters = 0;
  bool converged = false;
  double sigma_final = 0.0;
  double row_sum_residual = 0.0;  // ||X 1 - 1||_2 of the raw primal X
  std::vector<TraceRow> trace;
};

struct AdmmOptions {
  double sigma0 = 1.0;
  double gamma = 1.618;      // step length, inside (0, (1+sqrt(5))/2)
  double tol = 1e-6;         // relative KKT residual
  long max_iter = 20000;
  bool adapt_sigma = true;   // rebalance feasibility residuals
  int adapt_interval = 20;
  double adapt_factor = 1.3;
  double adapt_ratio = 10.0;
  int trace_every = 25;      // objective evaluation cadence for the trace
  bool throw_on_max_iter = true;
  const SolverState* warm_start = nullptr;
  std::function<void(const SolverState&)> observer;  // test hook, called per iteration
};

struct NuclearSolution {
  Matrix raw;                    // primal X as produced by the ADMM
  TransitionMatrix normalized;   // rows renormalized for downstream use
  ConvergenceReport report;
  SolverState state;             // final state, reusable as a warm start
};

/// Thrown when the iteration budget runs out; carries the best state seen.
class AdmmMaxIterError : public ConvergenceError {
 public:
  AdmmMaxIterError(double residual, NuclearSolution best)
      : ConvergenceError("sgs_admm_solve: max iterations exceeded", residual),
        best_(std::move(best)) {}
  const NuclearSolution& best() const { return best_; }

 private:
  NuclearSolution best_;
};

/// Xi-block proximal step. Returns (Xi, Z) where Z minimizes
/// sigma g(Z) + 1/2 ||Z - sigma R||^2 for the plain likelihood objective and
/// Xi = (Z - sigma R) / sigma.
std::pair<Matrix, Matrix> prox_dual_xi(const Matrix& r_mat, double sigma,
                                       const NuclearProblem& prob);

/// Exact y-block minimizer y = (b - A(X + sigma (Xi + S))) / (sigma p),
/// using A(M) = M 1, A*(y) = y 1^T and A A* = p I.
Vector update_y(const Matrix& xi, const Matrix& s, const Matrix& x, double sigma);

/// KKT residual
///   D = dist^2(0, (Xi + dg(X), X + N_{||.||_2 <= lambda}(S)))
///     + ||A(X) - b||^2 + ||Xi + A*(y) + S||^2.
/// Exact at interior/boundary points; the nonnegativity block takes the
/// smaller of the interior and boundary readings so the measure is
/// continuous across the X_ij = 0 facet.
double kkt_residual(const SolverState& state, const NuclearProblem& prob);
double kkt_residual(const SolverState& state, const SeparableObjective& g, double lambda);

NuclearSolution sgs_admm_solve(const NuclearProblem& prob, const AdmmOptions& opts = {});
NuclearSolution sgs_admm_solve(const SeparableObjective& g, double lambda,
                               const AdmmOptions& opts = {});

struct CvRow {
  double constant = 0.0;
  double lambda = 0.0;
  double mean_loss = 0.0;
};

struct CvResult {
  double lambda = 0.0;
  double constant = 0.0;
  std::vector<CvRow> table;
};

/// Contiguous-block cross-validation over lambda = C sqrt(p log p / n).
/// Held-out loss is the eps-smoothed negative log-likelihood (eps = 1e-6);
/// ties pick the smaller lambda.
CvResult select_lambda_cv(const Trajectory& traj, const std::vector<double>& constants,
                          int folds, const AdmmOptions& opts = {});

}  // namespace lrmc
