#include "lrmc/matops.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace lrmc {

namespace {

void fix_signs(Matrix& u, Matrix& v) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index imax = 0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, k));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (u(imax, k) < 0.0) {
      u.col(k) = -u.col(k);
      v.col(k) = -v.col(k);
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (!m.allFinite()) throw InvalidInputError("svd: non-finite entry");
  Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult out;
  out.u = solver.matrixU();
  out.sigma = solver.singularValues();
  out.v = solver.matrixV();
  fix_signs(out.u, out.v);
  return out;
}

SvdResult truncated_svd(const Matrix& m, int r) {
  const int pmin = static_cast<int>(std::min(m.rows(), m.cols()));
  if (r < 1 || r > pmin) throw InvalidInputError("truncated_svd: r outside [1, min(rows, cols)]");
  SvdResult full = svd(m);
  SvdResult out;
  out.u = full.u.leftCols(r);
  out.sigma = full.sigma.head(r);
  out.v = full.v.leftCols(r);
  return out;
}

double nuclear_norm(const Matrix& m) {
  if (!m.allFinite()) throw InvalidInputError("nuclear_norm: non-finite entry");
  Eigen::BDCSVD<Matrix> solver(m);
  return solver.singularValues().sum();
}

double kyfan_norm(const Matrix& m, int r) {
  const int pmin = static_cast<int>(std::min(m.rows(), m.cols()));
  if (r < 1 || r > pmin) throw InvalidInputError("kyfan_norm: r outside [1, min(rows, cols)]");
  Eigen::BDCSVD<Matrix> solver(m);
  return solver.singularValues().head(r).sum();
}

KyFanSubgradient kyfan_subgradient(const Matrix& m, int r) {
  const int pmin = static_cast<int>(std::min(m.rows(), m.cols()));
  if (r < 1 || r > pmin)
    throw InvalidInputError("kyfan_subgradient: r outside [1, min(rows, cols)]");
  SvdResult full = svd(m);
  KyFanSubgradient out;
  out.w = full.u.leftCols(r) * full.v.leftCols(r).transpose();
  out.tied = r < pmin && full.sigma(r - 1) - full.sigma(r) <= 1e-10;
  return out;
}

Matrix clip_spectral(const Matrix& m, double c) {
  if (c < 0.0) throw InvalidInputError("clip_spectral: radius must be >= 0");
  SvdResult f = svd(m);
  if (f.sigma.size() == 0 || f.sigma(0) <= c) return m;
  const Vector clipped = f.sigma.cwiseMin(c);
  return f.u * clipped.asDiagonal() * f.v.transpose();
}

namespace {

void check_orthonormal(const Matrix& a, const char* who) {
  const Matrix gram = a.transpose() * a;
  const double err = (gram - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-6)
    throw InvalidInputError(std::string(who) + ": columns not orthonormal (err " +
                            std::to_string(err) + ")");
}

}  // namespace

double sin_theta_frob(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidInputError("sin_theta_frob: dimension mismatch");
  check_orthonormal(a, "sin_theta_frob");
  check_orthonormal(b, "sin_theta_frob");
  const double r = static_cast<double>(a.cols());
  const double overlap = (a.transpose() * b).squaredNorm();
  return std::sqrt(std::max(0.0, r - overlap));
}

Matrix project_centering(const Matrix& q) {
  if (q.rows() != q.cols()) throw InvalidInputError("project_centering: matrix must be square");
  const double p = static_cast<double>(q.rows());
  const Vector row_sums = q.rowwise().sum();
  return q - row_sums * Matrix::Ones(1, q.cols()) / p;
}

SubspaceDecomposition model_subspace_decompose(const Matrix& delta, const Matrix& u,
                                               const Matrix& v) {
  if (u.rows() != delta.rows() || v.rows() != delta.cols() || u.cols() != v.cols())
    throw InvalidInputError("model_subspace_decompose: dimension mismatch");
  check_orthonormal(u, "model_subspace_decompose");
  check_orthonormal(v, "model_subspace_decompose");
  const Matrix pu = u * u.transpose();
  const Matrix pv = v * v.transpose();
  SubspaceDecomposition out;
  out.m_part = pu * delta * pv;
  const Matrix left_perp = delta - pu * delta;          // (I - UU^T) D
  out.mbar_perp_part = left_perp - left_perp * pv;      // (I - UU^T) D (I - VV^T)
  out.mbar_part = delta - out.mbar_perp_part;
  return out;
}

int numerical_rank(const Matrix& m, double tol_rel) {
  if (!(tol_rel > 0.0 && tol_rel < 1.0))
    throw InvalidInputError("numerical_rank: tol_rel outside (0, 1)");
  Eigen::BDCSVD<Matrix> solver(m);
  const Vector& s = solver.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = tol_rel * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) >= cutoff) ++rank;
  return rank;
}

Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

Vector project_simplex_lower_bounded(const Vector& v, const Vector& lower) {
  if (v.size() != lower.size())
    throw InvalidInputError("project_simplex_lower_bounded: dimension mismatch");
  if (lower.sum() > 1.0 + 1e-12)
    throw InvalidInputError("project_simplex_lower_bounded: lower bounds exceed the simplex");
  // sum_i max(v_i - tau, lower_i) is continuous and nonincreasing in tau
  auto mass = [&](double tau) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::max(v(i) - tau, lower(i));
    return s;
  };
  double lo = (v.array() - lower.array()).minCoeff() - 1.0;
  double hi = v.maxCoeff();  // mass(hi) = sum(lower) <= 1
  if (mass(hi) > 1.0) hi = v.maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  const double tau = 0.5 * (lo + hi);
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = std::max(v(i) - tau, lower(i));
  return out;
}

}  // namespace lrmc
