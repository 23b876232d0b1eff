#include "lrmc/spectral.hpp"

#include "lrmc/chain.hpp"
#include "lrmc/matops.hpp"

namespace lrmc {

TransitionMatrix spectral_estimator(const TransitionCounts& c, int r) {
  const int p = c.p();
  if (r < 1 || r > p) throw InvalidInputError("spectral_estimator: need 1 <= r <= p");
  const TransitionMatrix empirical = empirical_estimator(c);
  const SvdResult f = truncated_svd(empirical.entries(), r);
  Matrix recon = f.u * f.sigma.asDiagonal() * f.v.transpose();
  for (int i = 0; i < p; ++i) {
    const Vector row = recon.row(i);
    recon.row(i) = project_simplex(row);
  }
  return TransitionMatrix::from_matrix(std::move(recon));
}

}  // namespace lrmc
