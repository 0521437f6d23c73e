#pragma once

#include <vector>

#include "tht/types.hpp"

namespace tht {

/// Periodic, symmetric mass scaling schedule on the half-integer grid.
///
/// eta(k) is the log-scale exponent; the mass used at index k is
/// alpha(k) * M with alpha = exp(2 eta). Symmetry eta(k) == eta(-k) and
/// periodicity eta(k) == eta(k + period) hold bit-exactly on the grid:
/// lookups reduce k modulo the period and fold onto [0, period/2] before
/// evaluating, so both identities share one evaluation point.
class MassSchedule {
 public:
  /// eta(k) = offset + amplitude * (1 - cos(2 pi k / period)).
  static MassSchedule cosine(double amplitude, double offset, int period);

  /// Values given on the grid 0, 1/2, 1, ..., period - 1/2 (2*period values).
  /// Rejects asymmetry |eta(k) - eta(-k)| > 1e-12.
  static MassSchedule tabulated(std::vector<double> values, int period);

  int period() const { return period_; }
  double amplitude() const { return amplitude_; }
  double offset() const { return offset_; }

  /// k may be any half-integer (reduced internally).
  double eta(double k) const;
  double alpha(double k) const { return std::exp(2.0 * eta(k)); }

 private:
  explicit MassSchedule(int period) : period_(period) {}

  int period_;
  bool is_cosine_ = false;
  double amplitude_ = 0.0;
  double offset_ = 0.0;
  std::vector<double> values_;  // tabulated form, grid step 1/2
};

/// Symmetric distribution psi(k) on integers modulo the schedule period.
class IndexDistribution {
 public:
  /// w(k) proportional to 1[min(k, period - k) <= half_width].
  static IndexDistribution windowed_uniform(int period, int half_width);

  /// Arbitrary nonnegative weights w(0..period-1); must satisfy
  /// w(k) == w(period - k) for k = 1..period-1 and have nonempty support.
  static IndexDistribution from_weights(std::vector<double> weights);

  int period() const { return static_cast<int>(prob_.size()); }
  double prob(long long k) const { return prob_[reduce(k)]; }
  double log_prob(long long k) const;
  bool in_support(long long k) const { return prob_[reduce(k)] > 0.0; }

  /// One draw from psi using a single uniform.
  template <class Rng>
  int sample(Rng& rng) const {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      acc += support_prob_[i];
      if (u < acc) return support_[i];
    }
    return support_.back();
  }

 private:
  int reduce(long long k) const {
    const long long p = static_cast<long long>(prob_.size());
    long long r = k % p;
    if (r < 0) r += p;
    return static_cast<int>(r);
  }

  std::vector<double> prob_;
  std::vector<int> support_;
  std::vector<double> support_prob_;
};

}  // namespace tht
