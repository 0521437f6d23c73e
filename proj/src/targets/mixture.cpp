#include "tht/targets/mixture.hpp"

#include <algorithm>
#include <cmath>

namespace tht {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

GaussianMixture::GaussianMixture(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::invalid_argument("mixture needs at least one component");
  }
  dim_ = components_.front().mean.size();
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.var.size() != dim_) {
      throw std::invalid_argument("mixture component dimensions disagree");
    }
    if (!(c.weight > 0.0)) {
      throw std::invalid_argument("mixture weights must be positive");
    }
    if ((c.var.array() <= 0.0).any()) {
      throw std::invalid_argument("mixture variances must be positive");
    }
    total += c.weight;
  }
  for (auto& c : components_) {
    c.weight /= total;
    log_weight_.push_back(std::log(c.weight));
    log_norm_.push_back(-0.5 * (kLogTwoPi * static_cast<double>(dim_) +
                                c.var.array().log().sum()));
  }
}

GaussianMixture::Component GaussianMixture::spherical(double weight, Vec mean,
                                                      double sd) {
  const Index d = mean.size();
  return Component{weight, std::move(mean), Vec::Constant(d, sd * sd)};
}

GaussianMixture GaussianMixture::two_modes(Vec mean1, Vec mean2, double sd) {
  std::vector<Component> cs;
  cs.push_back(spherical(0.5, std::move(mean1), sd));
  cs.push_back(spherical(0.5, std::move(mean2), sd));
  return GaussianMixture(std::move(cs));
}

void GaussianMixture::component_log_densities(const Vec& x,
                                              std::vector<double>& out) const {
  out.resize(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const auto& c = components_[j];
    const double quad =
        ((x - c.mean).array().square() / c.var.array()).sum();
    out[j] = log_weight_[j] + log_norm_[j] - 0.5 * quad;
  }
}

double GaussianMixture::potential(const Vec& x) const {
  std::vector<double> lp;
  component_log_densities(x, lp);
  const double m = *std::max_element(lp.begin(), lp.end());
  double acc = 0.0;
  for (double v : lp) acc += std::exp(v - m);
  return -(m + std::log(acc));
}

Vec GaussianMixture::gradient(const Vec& x) const {
  std::vector<double> lp;
  component_log_densities(x, lp);
  const double m = *std::max_element(lp.begin(), lp.end());
  double total = 0.0;
  for (double v : lp) total += std::exp(v - m);
  // Responsibilities from shifted log weights; a fully underflowed far
  // component contributes exactly zero.
  Vec grad = Vec::Zero(dim_);
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const double r = std::exp(lp[j] - m) / total;
    if (r == 0.0) continue;
    const auto& c = components_[j];
    grad.array() += r * (x - c.mean).array() / c.var.array();
  }
  return grad;
}

}  // namespace tht
