#include "tht/targets/augmented.hpp"

#include <cmath>

namespace tht {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

TruncatedMixture::TruncatedMixture(std::vector<Piece> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) {
    throw std::invalid_argument("truncated mixture needs at least one piece");
  }
  for (const auto& p : pieces_) {
    if (!(p.weight > 0.0) || !(p.sd > 0.0) || !(p.lo < p.hi)) {
      throw std::invalid_argument("invalid truncated mixture piece");
    }
  }
}

double TruncatedMixture::potential(const Vec& x) const {
  const double v = x[0];
  double log_pi = -kInf;
  for (const auto& p : pieces_) {
    if (v <= p.lo || v >= p.hi) continue;
    const double z = (v - p.mean) / p.sd;
    const double lp = std::log(p.weight) - 0.5 * z * z - std::log(p.sd) -
                      0.5 * kLogTwoPi;
    log_pi = log_add_exp(log_pi, lp);
  }
  return -log_pi;
}

Vec TruncatedMixture::gradient(const Vec& x) const {
  const double v = x[0];
  double log_pi = -kInf;
  std::vector<double> lp(pieces_.size(), -kInf);
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    const auto& p = pieces_[j];
    if (v <= p.lo || v >= p.hi) continue;
    const double z = (v - p.mean) / p.sd;
    lp[j] = std::log(p.weight) - 0.5 * z * z - std::log(p.sd) - 0.5 * kLogTwoPi;
    log_pi = log_add_exp(log_pi, lp[j]);
  }
  Vec grad(1);
  grad[0] = 0.0;
  if (log_pi == -kInf) return grad;  // outside the support: zero by convention
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    if (lp[j] == -kInf) continue;
    const auto& p = pieces_[j];
    const double r = std::exp(lp[j] - log_pi);
    grad[0] += r * (v - p.mean) / (p.sd * p.sd);
  }
  return grad;
}

AugmentedTarget::AugmentedTarget(const PotentialModel& base, Vec bridge_mean,
                                 double bridge_sd, double log_nu)
    : base_(&base),
      bridge_mean_(std::move(bridge_mean)),
      bridge_sd_(bridge_sd),
      log_nu_(log_nu) {
  if (bridge_mean_.size() != base_->dim()) {
    throw std::invalid_argument("bridge mean dimension mismatch");
  }
  if (!(bridge_sd_ > 0.0)) {
    throw std::invalid_argument("bridge sd must be positive");
  }
  bridge_log_norm_ = -0.5 * static_cast<double>(base_->dim()) *
                     (kLogTwoPi + 2.0 * std::log(bridge_sd_));
}

double AugmentedTarget::log_bridge_density(const Vec& x) const {
  const double quad = (x - bridge_mean_).squaredNorm() / (bridge_sd_ * bridge_sd_);
  return bridge_log_norm_ - 0.5 * quad;
}

double AugmentedTarget::potential(const Vec& x) const {
  const double log_base = -base_->potential(x);
  const double log_bridge = log_nu_ + log_bridge_density(x);
  return -log_add_exp(log_base, log_bridge);
}

Vec AugmentedTarget::gradient(const Vec& x) const {
  const double log_base = -base_->potential(x);
  const double log_bridge = log_nu_ + log_bridge_density(x);
  const double log_total = log_add_exp(log_base, log_bridge);
  const double r = log_base == -kInf ? 0.0 : std::exp(log_base - log_total);
  Vec grad = Vec::Zero(x.size());
  if (r > 0.0) grad += r * base_->gradient(x);
  if (r < 1.0) {
    // -grad log g = (x - mean) / sd^2
    grad += (1.0 - r) * (x - bridge_mean_) / (bridge_sd_ * bridge_sd_);
  }
  return grad;
}

double AugmentedTarget::log_keep_probability(const Vec& x) const {
  const double log_base = -base_->potential(x);
  if (log_base == -kInf) return -kInf;
  const double log_bridge = log_nu_ + log_bridge_density(x);
  return log_base - log_add_exp(log_base, log_bridge);
}

}  // namespace tht
