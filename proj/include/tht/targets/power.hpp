#pragma once

#include <optional>

#include "tht/model.hpp"

namespace tht {

/// U(x) = c * (x^T B x)^{gamma/2} with B symmetric positive definite.
/// The gradient is c * gamma * |x|_B^{gamma-2} * B x; at the origin it is
/// zero for gamma >= 2 and singular for gamma < 2.
class PowerPotential : public PotentialModel {
 public:
  PowerPotential(double c, double gamma, Index dim);              // B = I
  PowerPotential(double c, double gamma, Vec b_diagonal);         // B diagonal
  PowerPotential(double c, double gamma, Mat b_dense);            // B dense

  Index dim() const override { return dim_; }
  double potential(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;

  double exponent() const { return gamma_; }

 private:
  Vec apply_b(const Vec& x) const;

  double c_;
  double gamma_;
  Index dim_;
  std::optional<Vec> b_diag_;
  std::optional<Mat> b_dense_;
};

}  // namespace tht
