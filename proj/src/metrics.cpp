#include "lrmc/metrics.hpp"

#include <cmath>
#include <limits>

#include "lrmc/chain.hpp"
#include "lrmc/matops.hpp"

namespace lrmc {

MetricTriple metrics(const TransitionMatrix& truth, const StationaryDistribution& pi,
                     const TransitionMatrix& estimate, int r) {
  const int p = truth.p();
  if (estimate.p() != p || pi.pi.size() != p)
    throw InvalidInputError("metrics: dimension mismatch");
  if (r < 1 || r > p) throw InvalidInputError("metrics: need 1 <= r <= p");

  MetricTriple out;
  out.eta_f = (truth.entries() - estimate.entries()).squaredNorm();

  try {
    out.eta_kl = kl_divergence(truth, pi, estimate);
  } catch (const DomainError&) {
    out.eta_kl = std::numeric_limits<double>::infinity();
  }
  const double eps = 1e-6;
  Matrix smoothed = (1.0 - eps) * estimate.entries();
  smoothed.array() += eps / p;
  out.eta_kl_smoothed =
      kl_divergence(truth, pi, TransitionMatrix::from_matrix(std::move(smoothed)));

  const SvdResult ft = truncated_svd(truth.entries(), r);
  const SvdResult fe = truncated_svd(estimate.entries(), r);
  const double du = sin_theta_frob(fe.u, ft.u);
  const double dv = sin_theta_frob(fe.v, ft.v);
  out.eta_uv = std::max(du * du, dv * dv);
  return out;
}

ConeDiagnostic cone_diagnostic(const TransitionMatrix& truth, const Matrix& estimate,
                               const TransitionCounts& c, double lambda, int r) {
  const int p = truth.p();
  if (estimate.rows() != p || estimate.cols() != p || c.p() != p)
    throw InvalidInputError("cone_diagnostic: dimension mismatch");
  if (r < 1 || r > p) throw InvalidInputError("cone_diagnostic: need 1 <= r <= p");

  // gradient of the averaged negative log-likelihood at the truth
  const double n = static_cast<double>(c.total);
  Matrix grad = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const std::int64_t nij = c.counts(i, j);
      if (nij == 0) continue;
      if (truth(i, j) <= 0.0)
        throw InvalidInputError("cone_diagnostic: observed transition with zero truth entry");
      grad(i, j) = -static_cast<double>(nij) / (n * truth(i, j));
    }

  ConeDiagnostic out;
  {
    Eigen::BDCSVD<Matrix> sv(project_centering(grad));
    out.grad_norm = sv.singularValues()(0);
  }
  out.triggered = lambda >= 2.0 * out.grad_norm;

  const SvdResult f = truncated_svd(truth.entries(), r);
  const Matrix delta = estimate - truth.entries();
  const SubspaceDecomposition dec = model_subspace_decompose(delta, f.u, f.v);
  out.lhs = nuclear_norm(dec.mbar_perp_part);
  const Matrix p_mperp = truth.entries() - f.u * f.u.transpose() * truth.entries() * f.v * f.v.transpose();
  out.rhs = 3.0 * nuclear_norm(dec.mbar_part) + 4.0 * nuclear_norm(p_mperp);
  out.holds = !out.triggered || out.lhs <= out.rhs + 1e-10;
  return out;
}

}  // namespace lrmc
