#pragma once

#include "lrmc/types.hpp"

namespace lrmc {

/// Estimation error triple: squared Frobenius error, KL divergence (with a
/// +inf sentinel when the estimate has zeros on the truth's support, plus an
/// always-finite eps-smoothed companion, eps = 1e-6), and the worse of the
/// squared sin-theta distances of the leading rank-r singular subspaces.
struct MetricTriple {
  double eta_f = 0.0;
  double eta_kl = 0.0;
  double eta_kl_smoothed = 0.0;
  double eta_uv = 0.0;
};

MetricTriple metrics(const TransitionMatrix& truth, const StationaryDistribution& pi,
                     const TransitionMatrix& estimate, int r);

/// Restricted-cone check of the estimation error at the convex solution:
/// whenever lambda >= 2 || Pi_N(grad l_n(P)) ||_2, the error Delta = Phat - P
/// must satisfy ||Delta_Mbar_perp||_* <= 3 ||Delta_Mbar||_* + 4 ||P_Mperp||_*
/// for the model subspace of P's rank-r SVD.
struct ConeDiagnostic {
  bool holds = false;      // trigger satisfied implies inequality satisfied
  bool triggered = false;  // lambda >= 2 ||Pi_N(grad)||_2
  double lhs = 0.0;
  double rhs = 0.0;
  double grad_norm = 0.0;  // spectral norm of the projected gradient at P
};

ConeDiagnostic cone_diagnostic(const TransitionMatrix& truth, const Matrix& estimate,
                               const TransitionCounts& c, double lambda, int r);

}  // namespace lrmc
