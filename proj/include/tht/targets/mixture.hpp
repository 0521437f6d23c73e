#pragma once

#include <vector>

#include "tht/model.hpp"

namespace tht {

/// Mixture of axis-aligned Gaussian components with the normalizing
/// constants included, so the potential is the exact negative log density.
class GaussianMixture : public PotentialModel {
 public:
  struct Component {
    double weight;
    Vec mean;
    Vec var;  // per-coordinate variances
  };

  explicit GaussianMixture(std::vector<Component> components);

  /// Isotropic component: covariance sd^2 * I.
  static Component spherical(double weight, Vec mean, double sd);

  /// Equal-weight pair of isotropic components, the standard bimodal target.
  static GaussianMixture two_modes(Vec mean1, Vec mean2, double sd);

  Index dim() const override { return dim_; }
  double potential(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;

  /// log density (= -potential), useful for filters and oracles.
  double log_density(const Vec& x) const { return -potential(x); }

  const std::vector<Component>& components() const { return components_; }

 private:
  void component_log_densities(const Vec& x, std::vector<double>& out) const;

  std::vector<Component> components_;
  std::vector<double> log_weight_;
  std::vector<double> log_norm_;  // -0.5 sum log(2 pi var_i), per component
  Index dim_;
};

}  // namespace tht
