#pragma once

#include <functional>
#include <vector>

#include "lrmc/admm.hpp"
#include "lrmc/types.hpp"

namespace lrmc {

/// Rank-constrained maximum-likelihood problem, handled through the exact
/// penalty  min l_n(X) + c (||X||_* - ||X||_(r))  s.t. X 1 = 1, X >= 0,
/// whose objective is a difference of convex functions.
struct DcProblem {
  const TransitionCounts* counts = nullptr;
  int r = 0;
  double c = 0.0;           // penalty parameter
  double alpha_prox = 0.0;  // proximal weight in the subproblems

  void validate() const;
};

/// l_n(X) + c (||X||_* - ||X||_(r)); +inf when X_ij <= 0 at an observed
/// transition. One SVD serves both norms.
double dc_objective(const Matrix& x, const DcProblem& prob);

/// Entrywise closed form of the subproblem prox printed for the linearized
/// objective: on observed entries the positive root of
///   (alpha+1) z^2 - (sigma R - W) z - sigma n_ij / n = 0,
/// elsewhere sigma max(R - W/sigma, 0). With W = 0, alpha = 0 this is
/// exactly the Z of prox_dual_xi.
Matrix prox_z_dc(const Matrix& r_mat, double sigma, const Matrix& w, double alpha_prox,
                 const TransitionCounts& counts);

/// One convex subproblem of the DC loop: minimizes
///   l_n(X) + c ||X||_* - c <W, X - Xk> + (alpha/2) ||X - Xk||_F^2
/// over X 1 = 1, X >= 0, dispatched to the sGS-ADMM engine with the linear
/// and quadratic terms folded into the separable objective. W must be a
/// Ky Fan subgradient at Xk. Returns the minimizer, clamped at zero.
Matrix dc_subproblem(const DcProblem& prob, const Matrix& w, const Matrix& xk,
                     const AdmmOptions& opts = {}, SolverState* warm = nullptr);

struct DcTraceRow {
  int outer_iter = 0;     // global across penalty phases
  double objective = 0.0; // at the current penalty parameter
  int rank_est = 0;
  double step_norm = 0.0;
  double c_current = 0.0;
};

using DcTrace = std::vector<DcTraceRow>;

struct PdcOptions {
  double eta_stop = 1e-5;        // Frobenius step-norm stopping tolerance
  int max_outer = 200;           // per penalty phase
  double c_growth = 2.0;
  int c_max_steps = 10;
  double rank_tol = 1e-6;        // relative singular-value cutoff
  double inner_tol0 = 1e-4;      // first subproblem KKT tolerance
  double inner_tol_min = 1e-7;
  double inner_tol_decay = 0.3162277660168379;  // per outer iteration
  double step_coupling = 0.01;   // inner tol <= coupling * step^2 / (1+p)
  double inner_tol_floor = 1e-12;
  double descent_slack = 1e-6;   // allowance for subproblem inexactness
  int max_descent_retries = 5;
  AdmmOptions admm;              // base options for the inner solver
  std::function<void(const Matrix& x, const Matrix& w, int outer)> observer;
};

struct DcSolution {
  Matrix raw;
  TransitionMatrix normalized;
  DcTrace trace;
  int rank_est = 0;
  bool critical = false;  // stopped at an exact fixed point
  double c_final = 0.0;
};

/// Rank failure after the penalty schedule; carries the partial solution.
class PdcRankError : public RankFailureError {
 public:
  PdcRankError(int rank, DcSolution partial)
      : RankFailureError("pdc_solve: rank target not reached after penalty schedule", rank),
        partial_(std::move(partial)) {}
  const DcSolution& partial() const { return partial_; }

 private:
  DcSolution partial_;
};

/// Floors observed entries at 1e-10 and renormalizes rows, preparing a
/// convex solution as the DC starting point.
Matrix pdc_warm_start(const TransitionMatrix& convex_solution, const TransitionCounts& counts);

/// Proximal DC loop with penalty continuation: runs the DC iteration at the
/// problem's c, doubling c until the numerical rank reaches r. Every
/// accepted step is checked for the guaranteed descent
///   obj(X+) <= obj(X) - (alpha/2) ||X+ - X||_F^2 + slack,
/// re-solving the subproblem tighter on violation.
DcSolution pdc_solve(const DcProblem& prob, const Matrix& x0, const PdcOptions& opts = {});

// ---------------------------------------------------------------------------
// Generic majorized indefinite-proximal DC engine. Minimizes
//   theta(x) = g(x) + p(x) - q(x)
// by linearizing q at each iterate and solving
//   min ghat(x; xk) + p(x) - <xi_k, x> + 1/2 ||x - xk||_T^2.
// The caller supplies the subproblem solver; the engine owns descent
// checking, stopping, and the iteration-count bound. The Markov PDC above is
// the instantiation with g = 0 and T = alpha I.

struct IpdcCallbacks {
  std::function<double(const Matrix&)> objective;
  std::function<Matrix(const Matrix&)> concave_subgradient;
  // (xk, xi_k, outer index, retry attempt) -> subproblem minimizer
  std::function<Matrix(const Matrix&, const Matrix&, int, int)> solve_subproblem;
  // called once per accepted step with the new iterate
  std::function<void(const Matrix&, int, double, double)> on_accept;
  double descent_coeff = 0.0;  // guaranteed decrease per unit squared step
};

struct IpdcOptions {
  double eta = 1e-5;
  int max_iter = 200;
  double slack = 1e-6;
  int max_retries = 3;
  double iterate_norm_bound = 0.0;  // 0 disables the boundedness monitor
};

struct IpdcRow {
  int iter = 0;
  double objective = 0.0;
  double step_norm = 0.0;
};

struct IpdcResult {
  Matrix x;
  std::vector<IpdcRow> trace;
  bool fixed_point = false;
  bool step_converged = false;
  bool stalled = false;  // retries exhausted at the solver noise floor
  int iters = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

IpdcResult ipdc_run(Matrix x0, const IpdcCallbacks& cb, const IpdcOptions& opts);

}  // namespace lrmc
