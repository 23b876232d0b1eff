#include "lrmc/admm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lrmc/chain.hpp"
#include "lrmc/matops.hpp"

namespace lrmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGammaMax = 1.6180339887498949;  // (1 + sqrt(5)) / 2
// Indicator tolerance when evaluating g at solver iterates: multiplier dust
// on unobserved entries scales with the KKT tolerance, not machine epsilon.
constexpr double kNegFeasTol = 1e-6;

}  // namespace

void NuclearProblem::validate() const {
  if (!counts) throw InvalidInputError("NuclearProblem: counts missing");
  if (counts->total < 1) throw InvalidInputError("NuclearProblem: empty counts");
  if (!(lambda > 0.0)) throw InvalidInputError("NuclearProblem: lambda must be > 0");
}

Matrix SeparableObjective::prox(const Matrix& r_mat, double sigma) const {
  if (!(sigma > 0.0)) throw InvalidInputError("prox: sigma must be > 0");
  const int p = counts->p();
  const double n = static_cast<double>(counts->total);
  const double denom = 1.0 + sigma * quad;
  Matrix z(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double w = has_linear() ? linear(i, j) : 0.0;
      const double a = sigma * (r_mat(i, j) - w);  // shifted target
      const std::int64_t nij = counts->counts(i, j);
      if (nij > 0) {
        // positive root of  denom z^2 - a z - sigma q = 0
        const double q = static_cast<double>(nij) / n;
        z(i, j) = (a + std::sqrt(a * a + 4.0 * denom * sigma * q)) / (2.0 * denom);
      } else {
        z(i, j) = std::max(a, 0.0) / denom;
      }
    }
  }
  return z;
}

double SeparableObjective::value(const Matrix& x) const {
  const int p = counts->p();
  const double n = static_cast<double>(counts->total);
  double acc = 0.0;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double xij = x(i, j);
      if (xij < -kNegFeasTol) return kInf;
      const std::int64_t nij = counts->counts(i, j);
      if (nij > 0) {
        if (xij <= 0.0) return kInf;
        acc -= static_cast<double>(nij) / n * std::log(xij);
      }
      const double xc = std::max(xij, 0.0);
      if (has_linear()) acc += linear(i, j) * xc;
      acc += 0.5 * quad * xc * xc;
    }
  }
  return acc;
}

double SeparableObjective::conjugate(const Matrix& lambda_mat) const {
  const int p = counts->p();
  const double n = static_cast<double>(counts->total);
  double acc = 0.0;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double w = has_linear() ? linear(i, j) : 0.0;
      const double lam = lambda_mat(i, j) - w;
      const std::int64_t nij = counts->counts(i, j);
      if (nij > 0) {
        const double q = static_cast<double>(nij) / n;
        if (quad > 0.0) {
          const double xs = (lam + std::sqrt(lam * lam + 4.0 * quad * q)) / (2.0 * quad);
          acc += lam * xs - 0.5 * quad * xs * xs + q * std::log(xs);
        } else {
          if (lam >= 0.0) return kInf;
          acc += q * (std::log(q) - 1.0 - std::log(-lam));
        }
      } else {
        if (quad > 0.0) {
          const double t = std::max(lam, 0.0);
          acc += t * t / (2.0 * quad);
        } else if (lam > 1e-12) {
          return kInf;
        }
      }
    }
  }
  return acc;
}

std::pair<Matrix, Matrix> prox_dual_xi(const Matrix& r_mat, double sigma,
                                       const NuclearProblem& prob) {
  prob.validate();
  SeparableObjective g{prob.counts, Matrix(), 0.0};
  Matrix z = g.prox(r_mat, sigma);
  Matrix xi = z / sigma - r_mat;
  return {std::move(xi), std::move(z)};
}

Vector update_y(const Matrix& xi, const Matrix& s, const Matrix& x, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInputError("update_y: sigma must be > 0");
  const double p = static_cast<double>(xi.rows());
  const Vector row_sums = (x + sigma * (xi + s)).rowwise().sum();
  return (Vector::Ones(xi.rows()) - row_sums) / (sigma * p);
}

namespace {

struct SBlockSvd {
  Matrix u;
  Matrix v;
  Vector sigma;  // singular values of S itself
};

// dist^2(0, X + N(S)) where N is the normal cone of the spectral ball of
// radius lambda at S. The cone is {U_A G V_A^T : G psd} over the active
// singular block, so the distance splits into the component of X outside
// that block plus a psd projection inside it.
double s_block_dist_sq(const Matrix& x, const SBlockSvd& sv, double lambda) {
  const double top = sv.sigma.size() > 0 ? sv.sigma(0) : 0.0;
  if (top > lambda * (1.0 + 1e-8) + 1e-12) return kInf;  // outside dom delta
  const double active_tol = std::max(1e-12, 1e-9 * lambda);
  int active = 0;
  while (active < sv.sigma.size() && sv.sigma(active) >= lambda - active_tol) ++active;
  if (active == 0) return x.squaredNorm();
  const Matrix b = sv.u.leftCols(active).transpose() * x * sv.v.leftCols(active);
  const Matrix bsym = 0.5 * (b + b.transpose());
  const Matrix bskew = 0.5 * (b - b.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(bsym);
  double psd_part = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > 0.0) psd_part += ev * ev;
  }
  return x.squaredNorm() - b.squaredNorm() + bskew.squaredNorm() + psd_part;
}

double kkt_residual_impl(const Matrix& x, const Matrix& xi, const Vector& y, const Matrix& s,
                         const SeparableObjective& g, double lambda, const SBlockSvd* cached) {
  const int p = static_cast<int>(x.rows());
  const double n = static_cast<double>(g.counts->total);

  // stationarity of the separable block: 0 in Xi + dg(X)
  double stat = 0.0;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double xij = x(i, j);
      const double w = g.has_linear() ? g.linear(i, j) : 0.0;
      const std::int64_t nij = g.counts->counts(i, j);
      if (nij > 0) {
        if (xij <= 0.0) return kInf;
        const double q = static_cast<double>(nij) / n;
        const double t = xi(i, j) - q / xij + w + g.quad * xij;
        stat += t * t;
      } else {
        const double grad0 = xi(i, j) + w;
        const double xpos = std::max(xij, 0.0);
        const double interior =
            (grad0 + g.quad * xpos) * (grad0 + g.quad * xpos) + std::min(xij, 0.0) * std::min(xij, 0.0);
        const double boundary = xij * xij + std::max(-grad0, 0.0) * std::max(-grad0, 0.0);
        stat += std::min(interior, boundary);
      }
    }
  }

  // stationarity of the spectral block: 0 in X + N(S)
  double sdist;
  if (cached) {
    sdist = s_block_dist_sq(x, *cached, lambda);
  } else {
    SvdResult f = svd(s);
    SBlockSvd blk{f.u, f.v, f.sigma};
    sdist = s_block_dist_sq(x, blk, lambda);
  }
  if (!std::isfinite(sdist)) return kInf;

  const double primal_feas = (x.rowwise().sum() - Vector::Ones(p)).squaredNorm();
  Matrix dual_feas_mat = xi + s;
  dual_feas_mat.colwise() += y;
  const double dual_feas = dual_feas_mat.squaredNorm();

  return stat + sdist + primal_feas + dual_feas;
}

double primal_objective(const Matrix& x, const SeparableObjective& g, double lambda) {
  const double gv = g.value(x);
  if (!std::isfinite(gv)) return gv;
  return gv + lambda * nuclear_norm(x);
}

double dual_objective(const Matrix& xi, const Vector& y, const SeparableObjective& g) {
  const double conj = g.conjugate(-xi);
  if (!std::isfinite(conj)) return -kInf;
  return y.sum() - conj;
}

}  // namespace

double kkt_residual(const SolverState& state, const NuclearProblem& prob) {
  prob.validate();
  SeparableObjective g{prob.counts, Matrix(), 0.0};
  return kkt_residual_impl(state.primal_x, state.dual_xi, state.dual_y, state.dual_s, g,
                           prob.lambda, nullptr);
}

double kkt_residual(const SolverState& state, const SeparableObjective& g, double lambda) {
  return kkt_residual_impl(state.primal_x, state.dual_xi, state.dual_y, state.dual_s, g, lambda,
                           nullptr);
}

NuclearSolution sgs_admm_solve(const NuclearProblem& prob, const AdmmOptions& opts) {
  prob.validate();
  SeparableObjective g{prob.counts, Matrix(), 0.0};
  return sgs_admm_solve(g, prob.lambda, opts);
}

NuclearSolution sgs_admm_solve(const SeparableObjective& g, double lambda,
                               const AdmmOptions& opts) {
  if (!g.counts || g.counts->total < 1)
    throw InvalidInputError("sgs_admm_solve: counts missing or empty");
  if (!(lambda > 0.0)) throw InvalidInputError("sgs_admm_solve: lambda must be > 0");
  if (!(opts.gamma > 0.0) || opts.gamma >= kGammaMax)
    throw InvalidInputError("sgs_admm_solve: gamma outside (0, (1+sqrt(5))/2)");
  if (!(opts.sigma0 > 0.0)) throw InvalidInputError("sgs_admm_solve: sigma0 must be > 0");

  const int p = g.counts->p();
  const Vector b = Vector::Ones(p);

  SolverState st;
  if (opts.warm_start) {
    st = *opts.warm_start;
    st.dual_s = clip_spectral(st.dual_s, lambda);  // restore feasibility for the new radius
  } else {
    st.dual_xi = Matrix::Zero(p, p);
    st.dual_y = Vector::Zero(p);
    st.dual_s = Matrix::Zero(p, p);
    st.primal_x = empirical_estimator(*g.counts).entries();
    st.sigma = opts.sigma0;
  }
  st.gamma = opts.gamma;
  st.iter = 0;

  ConvergenceReport report;
  double best_kkt = kInf;
  SolverState best_state = st;

  auto record_trace = [&](long iter, double kkt_abs) {
    TraceRow row;
    row.iter = iter;
    row.kkt = kkt_abs;
    row.primal_obj = primal_objective(st.primal_x, g, lambda);
    row.dual_obj = dual_objective(st.dual_xi, st.dual_y, g);
    report.trace.push_back(row);
  };

  double kkt_abs = kInf;
  double kkt_rel = kInf;
  bool converged = false;

  for (long k = 0; k < opts.max_iter; ++k) {
    const double sigma = st.sigma;

    // symmetric Gauss-Seidel sweep: y half-step, Xi, y, S, then multiplier
    const Vector y_half =
        (b - (st.primal_x + sigma * (st.dual_xi + st.dual_s)).rowwise().sum()) / (sigma * p);

    Matrix r_mat = st.dual_s + st.primal_x / sigma;
    r_mat.colwise() += y_half;
    const Matrix z = g.prox(r_mat, sigma);
    st.dual_xi = z / sigma - r_mat;

    st.dual_y =
        (b - (st.primal_x + sigma * (st.dual_xi + st.dual_s)).rowwise().sum()) / (sigma * p);

    Matrix m_mat = st.dual_xi;
    m_mat.colwise() += st.dual_y;
    const Matrix w_mat = -(m_mat + st.primal_x / sigma);
    SvdResult wf = svd(w_mat);
    SBlockSvd cache{wf.u, wf.v, wf.sigma.cwiseMin(lambda)};
    st.dual_s = wf.u * cache.sigma.asDiagonal() * wf.v.transpose();

    const Matrix resid = m_mat + st.dual_s;  // Xi + A*(y) + S
    st.primal_x += opts.gamma * sigma * resid;
    st.iter = k + 1;

    kkt_abs = kkt_residual_impl(st.primal_x, st.dual_xi, st.dual_y, st.dual_s, g, lambda, &cache);
    kkt_rel = kkt_abs / (1.0 + p);

    if (opts.observer) opts.observer(st);

    if (kkt_abs < 0.5 * best_kkt) {
      best_kkt = kkt_abs;
      best_state = st;
    }
    if (opts.trace_every > 0 && (k % opts.trace_every == 0)) record_trace(st.iter, kkt_abs);

    if (kkt_rel <= opts.tol) {
      converged = true;
      break;
    }

    if (opts.adapt_sigma && (k + 1) % opts.adapt_interval == 0) {
      const double r_dual_constraint = resid.norm();
      const double r_primal_constraint = (st.primal_x.rowwise().sum() - b).norm();
      if (r_dual_constraint > opts.adapt_ratio * r_primal_constraint)
        st.sigma *= opts.adapt_factor;
      else if (r_primal_constraint > opts.adapt_ratio * r_dual_constraint)
        st.sigma /= opts.adapt_factor;
    }
  }

  if (!converged && best_kkt < kkt_abs) {
    st = best_state;
    kkt_abs = best_kkt;
    kkt_rel = kkt_abs / (1.0 + p);
  }

  NuclearSolution sol;
  sol.raw = st.primal_x;
  sol.normalized = TransitionMatrix::normalize_rows(st.primal_x.cwiseMax(0.0));
  report.kkt = kkt_abs;
  report.kkt_rel = kkt_rel;
  report.iters = st.iter;
  report.converged = converged;
  report.sigma_final = st.sigma;
  report.row_sum_residual = (st.primal_x.rowwise().sum() - b).norm();
  report.primal_obj = primal_objective(st.primal_x, g, lambda);
  report.dual_obj = dual_objective(st.dual_xi, st.dual_y, g);
  record_trace(st.iter, kkt_abs);
  sol.report = std::move(report);
  sol.state = std::move(st);

  if (!converged && opts.throw_on_max_iter) throw AdmmMaxIterError(kkt_rel, std::move(sol));
  return sol;
}

CvResult select_lambda_cv(const Trajectory& traj, const std::vector<double>& constants,
                          int folds, const AdmmOptions& opts) {
  traj.validate();
  if (traj.p < 2) throw InvalidInputError("select_lambda_cv: need p >= 2");
  if (folds < 2) throw InvalidInputError("select_lambda_cv: need folds >= 2");
  if (constants.empty()) throw InvalidInputError("select_lambda_cv: empty constants grid");
  const long n = traj.n_transitions();
  if (n < folds) throw InvalidInputError("select_lambda_cv: every fold needs a transition");

  const int p = traj.p;
  const double scale = std::sqrt(static_cast<double>(p) * std::log(static_cast<double>(p)) /
                                 static_cast<double>(n));

  std::vector<double> sorted_constants = constants;
  std::sort(sorted_constants.begin(), sorted_constants.end());
  for (double c : sorted_constants)
    if (!(c > 0.0)) throw InvalidInputError("select_lambda_cv: constants must be positive");

  const double eps = 1e-6;
  std::vector<double> loss_sum(sorted_constants.size(), 0.0);

  AdmmOptions solve_opts = opts;
  solve_opts.throw_on_max_iter = false;
  solve_opts.observer = nullptr;
  solve_opts.trace_every = 0;

  for (int f = 0; f < folds; ++f) {
    const long lo = f * n / folds;
    const long hi = (f + 1) * n / folds;  // transitions [lo, hi) held out
    CountMatrix train = CountMatrix::Zero(p, p);
    CountMatrix held = CountMatrix::Zero(p, p);
    for (long t = 0; t < n; ++t) {
      if (t >= lo && t < hi)
        held(traj.states[t], traj.states[t + 1]) += 1;
      else
        train(traj.states[t], traj.states[t + 1]) += 1;
    }
    const TransitionCounts train_counts = TransitionCounts::from_counts(std::move(train));
    const TransitionCounts held_counts = TransitionCounts::from_counts(std::move(held));

    SolverState warm;
    bool have_warm = false;
    // largest lambda first: smoothest problem, then warm-start down the path
    for (long ci = static_cast<long>(sorted_constants.size()) - 1; ci >= 0; --ci) {
      NuclearProblem prob{&train_counts, sorted_constants[ci] * scale};
      AdmmOptions o = solve_opts;
      if (have_warm) o.warm_start = &warm;
      NuclearSolution sol = sgs_admm_solve(prob, o);
      warm = sol.state;
      have_warm = true;

      Matrix smoothed = (1.0 - eps) * sol.normalized.entries();
      smoothed.array() += eps / p;
      const double loss =
          neg_log_likelihood(TransitionMatrix::from_matrix(std::move(smoothed)), held_counts);
      loss_sum[ci] += loss;
    }
  }

  CvResult out;
  double best = kInf;
  for (std::size_t ci = 0; ci < sorted_constants.size(); ++ci) {
    CvRow row;
    row.constant = sorted_constants[ci];
    row.lambda = sorted_constants[ci] * scale;
    row.mean_loss = loss_sum[ci] / folds;
    out.table.push_back(row);
    if (row.mean_loss < best) {
      best = row.mean_loss;
      out.lambda = row.lambda;
      out.constant = row.constant;
    }
  }
  return out;
}

}  // namespace lrmc
