#include "lrmc/dc.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lrmc/matops.hpp"

namespace lrmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void DcProblem::validate() const {
  if (!counts) throw InvalidInputError("DcProblem: counts missing");
  if (counts->total < 1) throw InvalidInputError("DcProblem: empty counts");
  if (r < 1 || r > counts->p()) throw InvalidInputError("DcProblem: need 1 <= r <= p");
  if (!(c > 0.0)) throw InvalidInputError("DcProblem: c must be > 0");
  if (alpha_prox < 0.0) throw InvalidInputError("DcProblem: alpha_prox must be >= 0");
}

namespace {

struct DcEval {
  double objective = kInf;
  double likelihood = kInf;
  double penalty = kInf;
  int rank_est = 0;
};

DcEval evaluate_dc(const Matrix& x, const DcProblem& prob, double c_current, double rank_tol) {
  DcEval out;
  SeparableObjective plain{prob.counts, Matrix(), 0.0};
  out.likelihood = plain.value(x);
  if (!std::isfinite(out.likelihood)) return out;
  const SvdResult f = svd(x);
  double tail = 0.0;
  for (int i = prob.r; i < f.sigma.size(); ++i) tail += f.sigma(i);
  out.penalty = c_current * tail;
  out.objective = out.likelihood + out.penalty;
  out.rank_est = 0;
  if (f.sigma.size() > 0 && f.sigma(0) > 0.0) {
    const double cutoff = rank_tol * f.sigma(0);
    for (int i = 0; i < f.sigma.size(); ++i)
      if (f.sigma(i) >= cutoff) ++out.rank_est;
  }
  return out;
}

}  // namespace

double dc_objective(const Matrix& x, const DcProblem& prob) {
  prob.validate();
  return evaluate_dc(x, prob, prob.c, 1e-6).objective;
}

Matrix prox_z_dc(const Matrix& r_mat, double sigma, const Matrix& w, double alpha_prox,
                 const TransitionCounts& counts) {
  if (!(sigma > 0.0)) throw InvalidInputError("prox_z_dc: sigma must be > 0");
  if (alpha_prox < 0.0) throw InvalidInputError("prox_z_dc: alpha_prox must be >= 0");
  const int p = counts.p();
  if (r_mat.rows() != p || r_mat.cols() != p || w.rows() != p || w.cols() != p)
    throw InvalidInputError("prox_z_dc: dimension mismatch");
  const double n = static_cast<double>(counts.total);
  const double denom = alpha_prox + 1.0;
  Matrix z(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double a = sigma * r_mat(i, j) - w(i, j);
      const std::int64_t nij = counts.counts(i, j);
      if (nij > 0) {
        const double q = static_cast<double>(nij) / n;
        z(i, j) = (a + std::sqrt(a * a + 4.0 * denom * sigma * q)) / (2.0 * denom);
      } else {
        z(i, j) = std::max(a, 0.0);
      }
    }
  }
  return z;
}

Matrix dc_subproblem(const DcProblem& prob, const Matrix& w, const Matrix& xk,
                     const AdmmOptions& opts, SolverState* warm) {
  prob.validate();
  const int p = prob.counts->p();
  if (w.rows() != p || w.cols() != p || xk.rows() != p || xk.cols() != p)
    throw InvalidInputError("dc_subproblem: dimension mismatch");

  SeparableObjective g{prob.counts, -prob.c * w - prob.alpha_prox * xk, prob.alpha_prox};
  AdmmOptions o = opts;
  if (warm && warm->primal_x.size() > 0) o.warm_start = warm;
  NuclearSolution sol = sgs_admm_solve(g, prob.c, o);
  if (warm) *warm = sol.state;
  return sol.raw.cwiseMax(0.0);
}

Matrix pdc_warm_start(const TransitionMatrix& convex_solution, const TransitionCounts& counts) {
  Matrix x = convex_solution.entries();
  for (int j = 0; j < counts.p(); ++j)
    for (int i = 0; i < counts.p(); ++i)
      if (counts.counts(i, j) > 0) x(i, j) = std::max(x(i, j), 1e-10);
  return TransitionMatrix::normalize_rows(std::move(x)).entries();
}

IpdcResult ipdc_run(Matrix x0, const IpdcCallbacks& cb, const IpdcOptions& opts) {
  if (!(opts.eta > 0.0)) throw InvalidInputError("ipdc_run: eta must be > 0");
  IpdcResult res;
  res.x = std::move(x0);
  double obj = cb.objective(res.x);
  res.initial_objective = obj;

  for (int k = 0; k < opts.max_iter; ++k) {
    const Matrix xi = cb.concave_subgradient(res.x);

    Matrix x_next;
    double obj_next = kInf;
    double step = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
      x_next = cb.solve_subproblem(res.x, xi, k, attempt);
      step = (x_next - res.x).norm();
      obj_next = cb.objective(x_next);
      if (obj_next <= obj - cb.descent_coeff * step * step + opts.slack) {
        accepted = true;
        break;
      }
      // a candidate step below the stopping tolerance is within the
      // subproblem noise floor; treat it as converged rather than retrying
      if (step <= opts.eta && obj_next <= obj + opts.slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // the subproblem can no longer certify descent at its numerical floor;
      // the iteration has converged to within that resolution
      res.stalled = true;
      break;
    }

    res.iters = k + 1;
    res.trace.push_back({k + 1, obj_next, step});
    if (cb.on_accept) cb.on_accept(x_next, k + 1, obj_next, step);

    if (opts.iterate_norm_bound > 0.0 && x_next.norm() > opts.iterate_norm_bound)
      throw ConvergenceError("ipdc_run: iterate norm exceeded the boundedness monitor",
                             x_next.norm());

    const bool fixed = step == 0.0;
    res.x = std::move(x_next);
    obj = obj_next;
    if (fixed) {
      res.fixed_point = true;
      res.step_converged = true;
      break;
    }
    if (step <= opts.eta) {
      res.step_converged = true;
      break;
    }
  }
  res.final_objective = obj;

  // iteration-count bound from the telescoped descent inequality, with the
  // optimal value replaced by the best value seen. Informative only when the
  // guaranteed per-step decrease exceeds the inexactness slack.
  if (cb.descent_coeff > 0.0 && res.step_converged) {
    const double per_step = cb.descent_coeff * opts.eta * opts.eta - opts.slack;
    if (per_step > 0.0) {
      const double gap = std::max(res.initial_objective - res.final_objective, 0.0);
      const double bound = std::ceil(gap / per_step + 1e-12) + 1.0;
      if (static_cast<double>(res.iters) > bound)
        throw ConvergenceError("ipdc_run: iteration count exceeded the descent-based bound",
                               static_cast<double>(res.iters));
    }
  }
  return res;
}

DcSolution pdc_solve(const DcProblem& prob, const Matrix& x0, const PdcOptions& opts) {
  prob.validate();
  const int p = prob.counts->p();
  if (x0.rows() != p || x0.cols() != p) throw InvalidInputError("pdc_solve: x0 dimension mismatch");

  DcSolution sol;
  Matrix x = x0;
  double c_current = prob.c;
  SolverState warm;
  int global_outer = 0;
  bool reached_rank = false;
  double last_step = kInf;

  for (int phase = 0; phase <= opts.c_max_steps; ++phase) {
    DcProblem phase_prob = prob;
    phase_prob.c = c_current;

    IpdcCallbacks cb;
    cb.descent_coeff = 0.5 * prob.alpha_prox;
    cb.objective = [&](const Matrix& m) {
      return evaluate_dc(m, phase_prob, c_current, opts.rank_tol).objective;
    };
    cb.concave_subgradient = [&](const Matrix& m) {
      return Matrix(c_current * kyfan_subgradient(m, prob.r).w);
    };
    cb.solve_subproblem = [&](const Matrix& xk, const Matrix& xi, int outer, int attempt) {
      // xi = c W with W the Ky Fan subgradient at xk
      const Matrix w = xi / c_current;
      // the subproblem must be solved well below the current step scale or
      // the outer loop wanders inside the solver noise instead of descending
      double tol = std::max(opts.inner_tol_min,
                            opts.inner_tol0 * std::pow(opts.inner_tol_decay, outer));
      if (last_step < kInf)
        tol = std::min(tol, opts.step_coupling * last_step * last_step / (1.0 + p));
      tol = std::max(tol, opts.inner_tol_floor) * std::pow(0.01, attempt);
      tol = std::max(tol, 1e-13);
      AdmmOptions inner = opts.admm;
      inner.tol = tol;
      inner.throw_on_max_iter = false;
      inner.trace_every = 0;
      if (opts.observer) opts.observer(xk, w, global_outer + outer + 1);
      // renormalize rows so consecutive iterates are compared at exactly
      // feasible points; the solver's row-sum dust otherwise biases the
      // likelihood by more than the descent slack
      const Matrix sub = dc_subproblem(phase_prob, w, xk, inner, &warm);
      return Matrix(TransitionMatrix::normalize_rows(sub).entries());
    };

    IpdcOptions iopts;
    iopts.eta = opts.eta_stop;
    iopts.max_iter = opts.max_outer;
    iopts.slack = opts.descent_slack;
    iopts.max_retries = opts.max_descent_retries;
    iopts.iterate_norm_bound = 10.0 * p;

    cb.on_accept = [&](const Matrix& xk, int /*iter*/, double obj, double step) {
      ++global_outer;
      last_step = step;
      const DcEval ev = evaluate_dc(xk, phase_prob, c_current, opts.rank_tol);
      sol.trace.push_back({global_outer, obj, ev.rank_est, step, c_current});
    };

    IpdcResult run = ipdc_run(x, cb, iopts);
    x = run.x;
    sol.critical = run.fixed_point;

    const DcEval final_eval = evaluate_dc(x, phase_prob, c_current, opts.rank_tol);
    if (final_eval.rank_est <= prob.r) {
      reached_rank = true;
      sol.rank_est = final_eval.rank_est;
      sol.c_final = c_current;
      break;
    }
    c_current *= opts.c_growth;
  }

  sol.raw = x;
  sol.normalized = TransitionMatrix::normalize_rows(x.cwiseMax(0.0));
  if (!reached_rank) {
    sol.rank_est = evaluate_dc(x, prob, c_current, opts.rank_tol).rank_est;
    sol.c_final = c_current;
    throw PdcRankError(sol.rank_est, std::move(sol));
  }
  return sol;
}

}  // namespace lrmc
