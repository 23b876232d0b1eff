#pragma once

#include "lrmc/types.hpp"

namespace lrmc {

/// Singular value decomposition with a fixed sign convention: the largest-
/// magnitude entry of each left singular vector is positive, so repeated
/// factorizations of the same matrix agree bit-for-bit.
struct SvdResult {
  Matrix u;       // p x k, column-orthonormal
  Vector sigma;   // length k, nonincreasing
  Matrix v;       // p x k, column-orthonormal
};

SvdResult svd(const Matrix& m);

/// Top-r singular triplets. Currently full SVD + truncation; the interface
/// allows an iterative backend without touching callers.
SvdResult truncated_svd(const Matrix& m, int r);

double nuclear_norm(const Matrix& m);

/// Sum of the r largest singular values.
double kyfan_norm(const Matrix& m, int r);

struct KyFanSubgradient {
  Matrix w;        // U_r V_r^T from the top-r singular triplets
  bool tied;       // sigma_r and sigma_{r+1} within 1e-10: any extreme point is valid
};

KyFanSubgradient kyfan_subgradient(const Matrix& m, int r);

/// Frobenius projection onto the spectral-norm ball of radius c:
/// singular values are clamped at c.
Matrix clip_spectral(const Matrix& m, double c);

/// Frobenius sin-theta distance (r - ||A^T B||_F^2)^{1/2} between the spans
/// of two p x r column-orthonormal matrices.
double sin_theta_frob(const Matrix& a, const Matrix& b);

/// Projection onto the subspace of matrices with zero row sums:
/// Q - Q 1 1^T / p.
Matrix project_centering(const Matrix& q);

struct SubspaceDecomposition {
  Matrix m_part;          // U U^T D V V^T
  Matrix mbar_part;       // D minus the fully-orthogonal block
  Matrix mbar_perp_part;  // (I - U U^T) D (I - V V^T)
};

/// Splits a matrix along the model subspace spanned by (U, V).
SubspaceDecomposition model_subspace_decompose(const Matrix& delta, const Matrix& u,
                                               const Matrix& v);

/// Count of singular values >= tol_rel * sigma_1 (zero matrix has rank 0).
int numerical_rank(const Matrix& m, double tol_rel);

/// Euclidean projection of a vector onto the probability simplex
/// (sort-and-threshold).
Vector project_simplex(const Vector& v);

/// Euclidean projection onto {x : x >= lower, sum x = 1} by bisection on the
/// shift. Requires sum(lower) <= 1.
Vector project_simplex_lower_bounded(const Vector& v, const Vector& lower);

}  // namespace lrmc
