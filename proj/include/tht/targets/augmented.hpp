#pragma once

#include <vector>

#include "tht/targets/mixture.hpp"

namespace tht {

/// 1-D density with hard support truncation: sum of Gaussian bumps, each
/// restricted to its own interval. The potential is +inf outside the support
/// union, so this model is meant to be sampled through AugmentedTarget.
class TruncatedMixture : public PotentialModel {
 public:
  struct Piece {
    double weight;
    double mean;
    double sd;
    double lo;  // may be -inf
    double hi;  // may be +inf
  };

  explicit TruncatedMixture(std::vector<Piece> pieces);

  Index dim() const override { return 1; }
  double potential(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;

  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<Piece> pieces_;
};

/// Bridged target pi+ = pi_base + nu * g with g a single Gaussian. The
/// potential -log(pi_base + nu g) is finite everywhere and bounded above by
/// -log(nu g), which lets trajectories cross support gaps of the base.
class AugmentedTarget : public PotentialModel {
 public:
  AugmentedTarget(const PotentialModel& base, Vec bridge_mean, double bridge_sd,
                  double log_nu);

  Index dim() const override { return base_->dim(); }
  double potential(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  const Box* bounds() const override { return base_->bounds(); }

  double base_potential(const Vec& x) const { return base_->potential(x); }
  double log_bridge_density(const Vec& x) const;
  double log_nu() const { return log_nu_; }

  /// log of the keep probability pi_base / (pi_base + nu g) at x.
  double log_keep_probability(const Vec& x) const;

 private:
  const PotentialModel* base_;
  Vec bridge_mean_;
  double bridge_sd_;
  double log_nu_;
  double bridge_log_norm_;
};

/// Thin draws targeting pi+ down to draws targeting the base density: keep x
/// independently with probability pi_base(x) / (pi_base(x) + nu g(x)).
/// Order preserving.
template <class Rng>
std::vector<Vec> rejection_filter(const std::vector<Vec>& samples,
                                  const AugmentedTarget& target, Rng& rng) {
  std::vector<Vec> kept;
  kept.reserve(samples.size());
  for (const Vec& x : samples) {
    const double log_keep = target.log_keep_probability(x);
    if (std::log(rng.uniform01()) < log_keep) kept.push_back(x);
  }
  return kept;
}

}  // namespace tht
