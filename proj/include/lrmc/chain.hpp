#pragma once

#include <cstdint>

#include "lrmc/rng.hpp"
#include "lrmc/types.hpp"

namespace lrmc {

TransitionCounts count_transitions(const Trajectory& traj);

/// Per-row transition frequencies; unvisited rows become the uniform row 1/p.
TransitionMatrix empirical_estimator(const TransitionCounts& c);

/// Averaged negative log-likelihood -(1/n) sum n_ij log Q_ij.
/// Throws DomainError when Q_ij <= 0 at an observed transition.
double neg_log_likelihood(const TransitionMatrix& q, const TransitionCounts& c);

/// D_KL(P, Q) = sum_i pi_i sum_j P_ij log(P_ij / Q_ij), zero-P entries skipped.
/// Throws DomainError when Q_ij <= 0 at an entry with P_ij > 0.
double kl_divergence(const TransitionMatrix& p, const StationaryDistribution& pi,
                     const TransitionMatrix& q);

struct StationaryOptions {
  double tol = 1e-12;      // l1 residual of pi^T P - pi^T
  long max_iter = 1000000;
};

/// Power iteration on P^T. A second run from a skewed start guards against
/// reducible chains, where the fixed point is not unique.
StationaryDistribution stationary_distribution(const TransitionMatrix& p,
                                               const StationaryOptions& opts = {});

/// rho_plus is the second-largest eigenvalue of the pi-symmetrized additive
/// reversibilization  diag(pi)^{1/2} (P + P*)/2 diag(pi)^{-1/2},
/// with P* = diag(pi)^{-1} P^T diag(pi) the L2(pi) adjoint.
SpectralGapReport spectral_gap(const TransitionMatrix& p, const StationaryDistribution& pi);

struct InitialState {
  enum class Kind { Stationary, Fixed, Uniform };
  Kind kind = Kind::Stationary;
  int state = 0;

  static InitialState stationary() { return {Kind::Stationary, 0}; }
  static InitialState fixed(int s) { return {Kind::Fixed, s}; }
  static InitialState uniform() { return {Kind::Uniform, 0}; }
};

/// Simulates n transitions (n+1 states). Deterministic for fixed seed; each
/// step is an inverse-CDF draw from the current row.
Trajectory simulate(const TransitionMatrix& p, long n, std::uint64_t seed,
                    const InitialState& init = InitialState::stationary());

}  // namespace lrmc
