#include "tht/mass.hpp"

namespace tht {

MassSpec MassSpec::identity(Index dim) {
  return MassSpec(Kind::kIdentity, dim);
}

MassSpec MassSpec::diagonal(Vec entries) {
  if ((entries.array() <= 0.0).any()) {
    throw std::invalid_argument("diagonal mass entries must be positive");
  }
  MassSpec m(Kind::kDiagonal, entries.size());
  m.log_det_ = entries.array().log().sum();
  m.inv_diag_ = entries.cwiseInverse();
  m.inv_sqrt_diag_ = m.inv_diag_.cwiseSqrt();
  m.diag_ = std::move(entries);
  return m;
}

MassSpec MassSpec::dense(Mat matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("dense mass matrix must be square");
  }
  const double sym_err = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (sym_err > 1e-10 * (1.0 + matrix.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("dense mass matrix must be symmetric");
  }
  MassSpec m(Kind::kDense, matrix.rows());
  m.llt_.compute(matrix);
  if (m.llt_.info() != Eigen::Success) {
    throw std::invalid_argument("dense mass matrix must be positive definite");
  }
  m.log_det_ =
      2.0 * Mat(m.llt_.matrixL()).diagonal().array().log().sum();
  m.dense_ = std::move(matrix);
  return m;
}

Vec MassSpec::apply_m(const Vec& v) const {
  switch (kind_) {
    case Kind::kIdentity:
      return v;
    case Kind::kDiagonal:
      return diag_.cwiseProduct(v);
    case Kind::kDense:
      return dense_ * v;
  }
  return v;
}

Vec MassSpec::apply_minv(const Vec& p) const {
  switch (kind_) {
    case Kind::kIdentity:
      return p;
    case Kind::kDiagonal:
      return inv_diag_.cwiseProduct(p);
    case Kind::kDense:
      return llt_.solve(p);
  }
  return p;
}

Vec MassSpec::chol_minv_mul(const Vec& z) const {
  switch (kind_) {
    case Kind::kIdentity:
      return z;
    case Kind::kDiagonal:
      return inv_sqrt_diag_.cwiseProduct(z);
    case Kind::kDense:
      // M = L L^T, so C = L^{-T} satisfies C C^T = M^{-1}.
      return llt_.matrixU().solve(z);
  }
  return z;
}

}  // namespace tht
