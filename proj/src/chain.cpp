#include "lrmc/chain.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <span>
#include <string>

namespace lrmc {

TransitionMatrix TransitionMatrix::from_matrix(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw InvalidInputError("TransitionMatrix: matrix must be square and nonempty");
  if (!entries.allFinite())
    throw InvalidInputError("TransitionMatrix: non-finite entry");
  if ((entries.array() < 0.0).any())
    throw InvalidInputError("TransitionMatrix: negative entry");
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    const double s = entries.row(i).sum();
    if (std::abs(s - 1.0) > kRowSumTol)
      throw InvalidInputError("TransitionMatrix: row " + std::to_string(i) +
                              " sums to " + std::to_string(s));
  }
  return TransitionMatrix(std::move(entries));
}

TransitionMatrix TransitionMatrix::normalize_rows(Matrix entries, double guard) {
  if (entries.rows() != entries.cols() || entries.rows() < 1)
    throw InvalidInputError("normalize_rows: matrix must be square and nonempty");
  const double p = static_cast<double>(entries.rows());
  if ((entries.array() < -1e-9).any())
    throw InvalidInputError("normalize_rows: entry below -1e-9, refusing to normalize");
  entries = entries.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    const double s = entries.row(i).sum();
    if (s < guard)
      entries.row(i).setConstant(1.0 / p);
    else
      entries.row(i) /= s;
  }
  return TransitionMatrix(std::move(entries));
}

void Trajectory::validate() const {
  if (states.size() < 2)
    throw InvalidInputError("Trajectory: need at least 2 states (one transition)");
  if (p < 1) throw InvalidInputError("Trajectory: p must be positive");
  for (int s : states)
    if (s < 0 || s >= p)
      throw InvalidInputError("Trajectory: state " + std::to_string(s) + " outside [0, p)");
}

TransitionCounts TransitionCounts::from_counts(CountMatrix counts) {
  if (counts.rows() != counts.cols() || counts.rows() < 1)
    throw InvalidInputError("TransitionCounts: matrix must be square and nonempty");
  if ((counts.array() < 0).any())
    throw InvalidInputError("TransitionCounts: negative count");
  TransitionCounts out;
  out.row_totals = counts.rowwise().sum();
  out.total = out.row_totals.sum();
  out.counts = std::move(counts);
  return out;
}

StationaryDistribution StationaryDistribution::from_vector(Vector pi) {
  if ((pi.array() < 0.0).any())
    throw InvalidInputError("StationaryDistribution: negative entry");
  const double s = pi.sum();
  if (std::abs(s - 1.0) > 1e-10)
    throw InvalidInputError("StationaryDistribution: entries must sum to 1");
  StationaryDistribution out;
  out.pi_min = pi.minCoeff();
  out.pi_max = pi.maxCoeff();
  out.pi = std::move(pi);
  return out;
}

TransitionCounts count_transitions(const Trajectory& traj) {
  traj.validate();
  CountMatrix counts = CountMatrix::Zero(traj.p, traj.p);
  for (std::size_t k = 1; k < traj.states.size(); ++k)
    counts(traj.states[k - 1], traj.states[k]) += 1;
  return TransitionCounts::from_counts(std::move(counts));
}

TransitionMatrix empirical_estimator(const TransitionCounts& c) {
  const int p = c.p();
  Matrix m(p, p);
  for (int i = 0; i < p; ++i) {
    if (c.row_totals(i) >= 1)
      m.row(i) = c.counts.row(i).cast<double>() / static_cast<double>(c.row_totals(i));
    else
      m.row(i).setConstant(1.0 / p);
  }
  return TransitionMatrix::from_matrix(std::move(m));
}

double neg_log_likelihood(const TransitionMatrix& q, const TransitionCounts& c) {
  if (q.p() != c.p()) throw InvalidInputError("neg_log_likelihood: dimension mismatch");
  if (c.total < 1) throw InvalidInputError("neg_log_likelihood: empty counts");
  double acc = 0.0;
  for (int i = 0; i < c.p(); ++i)
    for (int j = 0; j < c.p(); ++j) {
      const std::int64_t nij = c.counts(i, j);
      if (nij == 0) continue;
      const double qij = q(i, j);
      if (qij <= 0.0)
        throw DomainError("neg_log_likelihood: zero probability at observed transition (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      acc -= static_cast<double>(nij) * std::log(qij);
    }
  return acc / static_cast<double>(c.total);
}

double kl_divergence(const TransitionMatrix& p, const StationaryDistribution& pi,
                     const TransitionMatrix& q) {
  if (p.p() != q.p() || pi.pi.size() != p.p())
    throw InvalidInputError("kl_divergence: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < p.p(); ++i)
    for (int j = 0; j < p.p(); ++j) {
      const double pij = p(i, j);
      if (pij == 0.0) continue;
      const double qij = q(i, j);
      if (qij <= 0.0)
        throw DomainError("kl_divergence: zero estimate at supported entry (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      acc += pi.pi(i) * pij * std::log(pij / qij);
    }
  return acc;
}

namespace {

// One power-iteration run on P^T from the given start; returns the l1
// residual achieved and leaves the iterate in pi.
double power_iterate(const Matrix& pt, Vector& pi, double tol, long max_iter) {
  double resid = std::numeric_limits<double>::infinity();
  for (long it = 0; it < max_iter; ++it) {
    Vector next = pt * pi;
    next /= next.sum();
    resid = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (resid <= tol) break;
  }
  return resid;
}

}  // namespace

StationaryDistribution stationary_distribution(const TransitionMatrix& p,
                                               const StationaryOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidInputError("stationary_distribution: tol must be > 0");
  const int n = p.p();
  const Matrix pt = p.entries().transpose();

  Vector pi = Vector::Constant(n, 1.0 / n);
  const double resid = power_iterate(pt, pi, opts.tol, opts.max_iter);
  // residual of the fixed-point equation itself, not the step difference
  const double eq_resid = (pt * pi - pi).lpNorm<1>();
  if (!(eq_resid <= opts.tol && resid <= opts.tol))
    throw ConvergenceError("stationary_distribution: power iteration did not converge", eq_resid);

  // Uniqueness guard: a reducible chain has many fixed points, so a second
  // start must land on the same vector.
  Vector pi2(n);
  for (int i = 0; i < n; ++i) pi2(i) = static_cast<double>(i + 1);
  pi2 /= pi2.sum();
  const double resid2 = power_iterate(pt, pi2, opts.tol, opts.max_iter);
  const double eq_resid2 = (pt * pi2 - pi2).lpNorm<1>();
  if (!(eq_resid2 <= opts.tol && resid2 <= opts.tol))
    throw ConvergenceError("stationary_distribution: power iteration did not converge", eq_resid2);
  if ((pi - pi2).lpNorm<1>() > 1e-6)
    throw ConvergenceError("stationary_distribution: stationary distribution is not unique",
                           (pi - pi2).lpNorm<1>());

  return StationaryDistribution::from_vector(std::move(pi));
}

SpectralGapReport spectral_gap(const TransitionMatrix& p, const StationaryDistribution& pi) {
  const int n = p.p();
  if (pi.pi.size() != n) throw InvalidInputError("spectral_gap: dimension mismatch");
  if (pi.pi_min <= 0.0) throw InvalidInputError("spectral_gap: pi must be strictly positive");

  const Vector sqrt_pi = pi.pi.array().sqrt();
  // A = D^{1/2} P D^{-1/2}; the reversibilized operator symmetrizes to (A + A^T)/2.
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = sqrt_pi(i) * p(i, j) / sqrt_pi(j);
  const Matrix sym = 0.5 * (a + a.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw ConvergenceError("spectral_gap: eigen decomposition failed", 0.0);
  const Vector evals = es.eigenvalues();  // ascending

  SpectralGapReport report;
  report.rho_plus = (n >= 2) ? evals(n - 2) : 0.0;
  report.gap = 1.0 - report.rho_plus;

  double db_violation = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      db_violation = std::max(db_violation, std::abs(pi.pi(i) * p(i, j) - pi.pi(j) * p(j, i)));
  report.reversible = db_violation <= 1e-10;
  return report;
}

Trajectory simulate(const TransitionMatrix& p, long n, std::uint64_t seed,
                    const InitialState& init) {
  if (n < 1) throw InvalidInputError("simulate: need n >= 1 transitions");
  const int states = p.p();
  Rng rng(seed);

  int current = 0;
  switch (init.kind) {
    case InitialState::Kind::Stationary: {
      const StationaryDistribution pi = stationary_distribution(p);
      current = rng.categorical(std::span<const double>(pi.pi.data(), states));
      break;
    }
    case InitialState::Kind::Fixed:
      if (init.state < 0 || init.state >= states)
        throw InvalidInputError("simulate: fixed initial state outside [0, p)");
      current = init.state;
      break;
    case InitialState::Kind::Uniform:
      current = rng.uniform_int(states);
      break;
  }

  Trajectory traj;
  traj.p = states;
  traj.states.reserve(static_cast<std::size_t>(n) + 1);
  traj.states.push_back(current);
  Vector probs(states);
  for (long k = 0; k < n; ++k) {
    probs = p.entries().row(current);  // column-major storage, so copy the row out
    current = rng.categorical(std::span<const double>(probs.data(), states));
    traj.states.push_back(current);
  }
  return traj;
}

}  // namespace lrmc
