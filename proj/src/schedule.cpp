#include "tht/schedule.hpp"

#include <cmath>

namespace tht {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

// Reduce a half-integer k into [0, period/2]; fmod and the fold are exact
// for half-integer inputs, which makes eta(k), eta(-k), eta(k + period)
// evaluate at identical arguments.
double fold_index(double k, int period) {
  double r = std::fmod(k, static_cast<double>(period));
  if (r < 0.0) r += period;
  if (r > 0.5 * period) r = period - r;
  return r;
}

}  // namespace

MassSchedule MassSchedule::cosine(double amplitude, double offset, int period) {
  if (period < 1) throw std::invalid_argument("schedule period must be >= 1");
  MassSchedule s(period);
  s.is_cosine_ = true;
  s.amplitude_ = amplitude;
  s.offset_ = offset;
  return s;
}

MassSchedule MassSchedule::tabulated(std::vector<double> values, int period) {
  if (period < 1) throw std::invalid_argument("schedule period must be >= 1");
  if (values.size() != static_cast<std::size_t>(2 * period)) {
    throw std::invalid_argument(
        "tabulated schedule needs 2*period values on the half-integer grid");
  }
  const std::size_t n = values.size();
  for (std::size_t j = 1; j < n; ++j) {
    const double diff = std::abs(values[j] - values[n - j]);
    if (diff > 1e-12) {
      throw std::invalid_argument("tabulated schedule is not symmetric");
    }
  }
  MassSchedule s(period);
  s.values_ = std::move(values);
  return s;
}

double MassSchedule::eta(double k) const {
  const double r = fold_index(k, period_);
  if (is_cosine_) {
    return offset_ + amplitude_ * (1.0 - std::cos(kTwoPi * r / period_));
  }
  const auto j = static_cast<std::size_t>(std::llround(2.0 * r));
  return values_[j];
}

IndexDistribution IndexDistribution::windowed_uniform(int period,
                                                      int half_width) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  if (half_width < 0) throw std::invalid_argument("half_width must be >= 0");
  std::vector<double> w(static_cast<std::size_t>(period), 0.0);
  for (int k = 0; k < period; ++k) {
    if (std::min(k, period - k) <= half_width) w[k] = 1.0;
  }
  return from_weights(std::move(w));
}

IndexDistribution IndexDistribution::from_weights(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("weights must be nonempty");
  const std::size_t p = weights.size();
  double total = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    if (weights[k] < 0.0) {
      throw std::invalid_argument("index weights must be nonnegative");
    }
    total += weights[k];
  }
  if (total <= 0.0) {
    throw std::invalid_argument("index distribution has empty support");
  }
  // Symmetry modulo the period is what makes the velocity reflection
  // (k, v) -> (-k, -v) measure preserving; enforce it up front.
  for (std::size_t k = 1; k < p; ++k) {
    if (std::abs(weights[k] - weights[p - k]) > 1e-12 * total) {
      throw std::invalid_argument("index weights must satisfy w(k) == w(-k)");
    }
  }
  IndexDistribution d;
  d.prob_.resize(p);
  for (std::size_t k = 0; k < p; ++k) d.prob_[k] = weights[k] / total;
  for (std::size_t k = 0; k < p; ++k) {
    if (d.prob_[k] > 0.0) {
      d.support_.push_back(static_cast<int>(k));
      d.support_prob_.push_back(d.prob_[k]);
    }
  }
  return d;
}

double IndexDistribution::log_prob(long long k) const {
  const double p = prob_[reduce(k)];
  return p > 0.0 ? std::log(p) : -kInf;
}

}  // namespace tht
