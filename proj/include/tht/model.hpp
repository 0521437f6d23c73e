#pragma once

#include <optional>

#include "tht/mass.hpp"
#include "tht/schedule.hpp"
#include "tht/types.hpp"

namespace tht {

/// Differentiable unnormalized negative log density, optionally box-bounded.
///
/// potential() must be finite wherever the bounds are satisfied; targets with
/// support gaps are expressed through AugmentedTarget rather than by returning
/// +inf inside the bounds.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;

  virtual Index dim() const = 0;
  virtual double potential(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;

  /// Box constraint, or nullptr when the model is unconstrained.
  virtual const Box* bounds() const { return nullptr; }
};

/// State of the extended chain: position, schedule index (mod period), and
/// velocity.
struct ExtendedState {
  Vec position;
  int index;
  Vec velocity;
};

/// Tuning parameters of a tempered transition kernel.
struct ThtConfig {
  double eps;           // baseline leapfrog step size
  double a;             // time scale exponent: step = eps * alpha^a
  int n_acceptable;     // acceptable candidates required for a move (L)
  int max_proposals;    // proposal budget per iteration (N)
  MassSchedule schedule;
  IndexDistribution psi;
  MassSpec mass;

  void validate(Index model_dim) const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (n_acceptable < 1) {
      throw std::invalid_argument("n_acceptable must be >= 1");
    }
    if (max_proposals < n_acceptable) {
      throw std::invalid_argument("max_proposals must be >= n_acceptable");
    }
    if (schedule.period() != psi.period()) {
      throw std::invalid_argument(
          "schedule and index distribution must share one period");
    }
    if (mass.dim() != model_dim) {
      throw std::invalid_argument("mass dimension does not match the model");
    }
  }
};

}  // namespace tht
