#include "lrmc/synth.hpp"

#include <cmath>

#include "lrmc/rng.hpp"

namespace lrmc {

void SynthConfig::validate() const {
  if (p < 1) throw InvalidInputError("SynthConfig: p must be >= 1");
  if (r < 1 || r > p) throw InvalidInputError("SynthConfig: need 1 <= r <= p");
  if (imbalance) {
    if (!(imbalance->first > 0.0) || !(imbalance->second > 0.0))
      throw InvalidInputError("SynthConfig: beta parameters must be positive");
  }
}

TransitionMatrix assemble_lowrank(const Matrix& u0, const Matrix& v0,
                                  const Vector* column_scale) {
  if (u0.rows() != v0.rows() || u0.cols() != v0.cols())
    throw InvalidInputError("assemble_lowrank: factor shapes differ");
  const int p = static_cast<int>(u0.rows());
  const int r = static_cast<int>(u0.cols());

  // Rows of U~ are squared rows of U0 normalized by their squared length,
  // so each row of U~ sums to 1.
  Matrix u_tilde(p, r);
  for (int i = 0; i < p; ++i) {
    const double norm2 = u0.row(i).squaredNorm();
    if (norm2 <= 0.0) throw InvalidInputError("assemble_lowrank: zero factor row");
    u_tilde.row(i) = u0.row(i).array().square() / norm2;
  }
  // Columns of V~ are squared columns of V0 normalized the same way, so each
  // column of V~ sums to 1 and U~ V~^T is row-stochastic.
  Matrix v_tilde(p, r);
  for (int j = 0; j < r; ++j) {
    const double norm2 = v0.col(j).squaredNorm();
    if (norm2 <= 0.0) throw InvalidInputError("assemble_lowrank: zero factor column");
    v_tilde.col(j) = v0.col(j).array().square() / norm2;
  }

  Matrix prod = u_tilde * v_tilde.transpose();
  if (column_scale) {
    if (column_scale->size() != p)
      throw InvalidInputError("assemble_lowrank: column scale length mismatch");
    prod = prod * column_scale->asDiagonal();
  }
  return TransitionMatrix::normalize_rows(std::move(prod));
}

namespace {

Matrix gaussian_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

// Both generators draw factors from the same derived stream, so a config
// with and without imbalance shares its U0, V0 for a given seed.
constexpr std::uint64_t kSynthStream = 0x53594e54ull;

TransitionMatrix random_lowrank(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(Rng::derive(cfg.seed, kSynthStream));
  const Matrix u0 = gaussian_matrix(rng, cfg.p, cfg.r);
  const Matrix v0 = gaussian_matrix(rng, cfg.p, cfg.r);
  return assemble_lowrank(u0, v0);
}

TransitionMatrix random_lowrank_imbalanced(const SynthConfig& cfg) {
  cfg.validate();
  if (!cfg.imbalance)
    throw InvalidInputError("random_lowrank_imbalanced: imbalance parameters required");
  Rng rng(Rng::derive(cfg.seed, kSynthStream));
  const Matrix u0 = gaussian_matrix(rng, cfg.p, cfg.r);
  const Matrix v0 = gaussian_matrix(rng, cfg.p, cfg.r);
  Vector scale(cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    double d = 0.0;
    while (d <= 0.0) d = rng.beta(cfg.imbalance->first, cfg.imbalance->second);
    scale(j) = d;
  }
  return assemble_lowrank(u0, v0, &scale);
}

}  // namespace lrmc
