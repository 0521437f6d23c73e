#include "tht/targets/power.hpp"

#include <cmath>

namespace tht {

namespace {
void check_params(double c, double gamma) {
  if (!(c > 0.0)) throw std::invalid_argument("coefficient c must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}
}  // namespace

PowerPotential::PowerPotential(double c, double gamma, Index dim)
    : c_(c), gamma_(gamma), dim_(dim) {
  check_params(c, gamma);
}

PowerPotential::PowerPotential(double c, double gamma, Vec b_diagonal)
    : c_(c), gamma_(gamma), dim_(b_diagonal.size()), b_diag_(std::move(b_diagonal)) {
  check_params(c, gamma);
  if ((b_diag_->array() <= 0.0).any()) {
    throw std::invalid_argument("B diagonal must be positive");
  }
}

PowerPotential::PowerPotential(double c, double gamma, Mat b_dense)
    : c_(c), gamma_(gamma), dim_(b_dense.rows()), b_dense_(std::move(b_dense)) {
  check_params(c, gamma);
  if (b_dense_->rows() != b_dense_->cols()) {
    throw std::invalid_argument("B must be square");
  }
  Eigen::LLT<Mat> llt(*b_dense_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("B must be positive definite");
  }
}

Vec PowerPotential::apply_b(const Vec& x) const {
  if (b_diag_) return b_diag_->cwiseProduct(x);
  if (b_dense_) return *b_dense_ * x;
  return x;
}

double PowerPotential::potential(const Vec& x) const {
  const double quad = x.dot(apply_b(x));
  return c_ * std::pow(quad, 0.5 * gamma_);
}

Vec PowerPotential::gradient(const Vec& x) const {
  const Vec bx = apply_b(x);
  const double quad = x.dot(bx);
  if (quad == 0.0) {
    if (gamma_ < 2.0) {
      throw SingularGradient("power potential gradient is singular at 0");
    }
    return Vec::Zero(dim_);
  }
  return (c_ * gamma_ * std::pow(quad, 0.5 * gamma_ - 1.0)) * bx;
}

}  // namespace tht
