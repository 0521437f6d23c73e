#pragma once

#include "tht/types.hpp"

namespace tht {

/// Symmetric positive definite mass operator M.
///
/// Exposes the products needed by velocity-form Hamiltonian dynamics:
/// M v, M^{-1} p, and C z with C C^T = M^{-1} (so chol_minv_mul applied to a
/// standard normal draw yields N(0, M^{-1})).
class MassSpec {
 public:
  static MassSpec identity(Index dim);
  static MassSpec diagonal(Vec entries);
  static MassSpec dense(Mat m);

  Index dim() const { return dim_; }

  Vec apply_m(const Vec& v) const;
  Vec apply_minv(const Vec& p) const;
  Vec chol_minv_mul(const Vec& z) const;
  double log_det() const { return log_det_; }

  /// Kinetic energy 0.5 v^T M v of a velocity.
  double kinetic(const Vec& v) const { return 0.5 * v.dot(apply_m(v)); }

 private:
  enum class Kind { kIdentity, kDiagonal, kDense };

  MassSpec(Kind kind, Index dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  Index dim_;
  double log_det_ = 0.0;
  Vec diag_, inv_diag_, inv_sqrt_diag_;
  Mat dense_;
  Eigen::LLT<Mat> llt_;
};

}  // namespace tht
