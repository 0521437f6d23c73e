#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tht/model.hpp"
#include "tht/rng.hpp"

namespace tht {

/// Default exponential prior rates for the measurement-range and
/// measurement-noise scales (means 0.5 and 0.05).
inline constexpr double kRangePriorRate = 2.0;
inline constexpr double kNoisePriorRate = 20.0;

/// Pairwise distance measurements over a planar network of sensors at
/// unknown positions (indices 0..n_unknown-1) followed by anchors at known
/// positions, all inside the unit square. A pair is observed with
/// probability exp(-d^2 / (2 range^2)); an observed distance carries
/// N(0, noise^2) measurement error. The benchmark network has 8 unknown
/// sensors and 3 anchors.
class SensorDataset {
 public:
  static constexpr int kDefaultUnknown = 8;
  static constexpr int kDefaultKnown = 3;

  SensorDataset(int n_unknown, Mat known,
                std::vector<std::pair<int, int>> observed,
                std::vector<double> distances, double range, double noise,
                std::optional<Mat> truth);

  int n_unknown() const { return n_unknown_; }
  int n_known() const { return static_cast<int>(known_.rows()); }
  int n_total() const { return n_unknown_ + n_known(); }

  const Mat& known() const { return known_; }
  const std::vector<std::pair<int, int>>& observed() const { return observed_; }
  const std::vector<double>& distances() const { return distances_; }
  double range() const { return range_; }
  double noise() const { return noise_; }
  const std::optional<Mat>& truth() const { return truth_; }

  bool is_observed(int t, int u) const { return pair_index(t, u) >= 0; }
  double measured_distance(int t, int u) const;

  /// Flat [x0, y0, x1, y1, ...] view of the true unknown positions.
  Vec truth_flat() const;

  std::string to_json() const;  // numbers with 17 significant digits
  static SensorDataset from_json(const std::string& text);
  void save(const std::string& path) const;
  static SensorDataset load(const std::string& path);

 private:
  int pair_index(int t, int u) const;

  int n_unknown_;
  Mat known_;
  std::vector<std::pair<int, int>> observed_;
  std::vector<double> distances_;
  double range_;
  double noise_;
  std::optional<Mat> truth_;
  std::vector<int> pair_lookup_;  // n_total^2, -1 when unobserved
};

/// Measure a synthetic dataset from true positions in the unit square (the
/// first n_unknown rows are the sensors to localize, the rest are anchors).
/// Pairs are visited in lexicographic order, one uniform draw per pair plus
/// one normal draw per observation, so the dataset is a pure function of
/// (positions, range, noise, rng state).
SensorDataset generate_sensor_data(const Mat& positions, double range,
                                   double noise, RngStream& rng,
                                   int n_unknown = SensorDataset::kDefaultUnknown);

/// The shipped benchmark dataset: anchors fixed at (0.45,0.52), (0.55,0.48),
/// (0.90,0.50) -- two nearly coincident, so the posterior is close to
/// mirror-symmetric about the line through them -- with seeded uniform truth
/// for the 8 unknown sensors, range 0.3 and noise 0.02.
SensorDataset default_sensor_dataset(std::uint64_t seed);

/// Posterior over the unknown coordinates given range and noise; the uniform
/// prior over the unit square enters through box reflection. Pairs between
/// known sensors are constant in the unknowns and are excluded.
class SensorModel : public PotentialModel {
 public:
  SensorModel(const SensorDataset& ds, double range, double noise);

  Index dim() const override { return 2 * ds_->n_unknown(); }
  double potential(const Vec& locs) const override;
  Vec gradient(const Vec& locs) const override;
  const Box* bounds() const override { return &box_; }

 private:
  const SensorDataset* ds_;
  double range_, noise_;
  Box box_;
};

/// Conditional negative log posterior of one log-scale hyperparameter
/// (log range or log noise) given the sensor locations. Includes the data
/// likelihood over all pairs, the exponential prior at exp(theta), and the
/// log-Jacobian of the log transform.
class HyperPotential : public PotentialModel {
 public:
  enum class Kind { kRange, kNoise };

  HyperPotential(const SensorDataset& ds, const Vec& locs, Kind kind,
                 double prior_rate);
  HyperPotential(const SensorDataset& ds, const Vec& locs, Kind kind);

  Index dim() const override { return 1; }
  double potential(const Vec& theta) const override;
  Vec gradient(const Vec& theta) const override;

 private:
  struct PairTerm {
    double dist;      // geometric distance at the conditioning locations
    bool observed;
    double measured;  // only when observed
  };

  Kind kind_;
  double prior_rate_;
  std::vector<PairTerm> pairs_;
};

/// Joint log posterior log pi(locs, range, noise | data) up to a constant;
/// -inf outside the unit square.
double sensor_joint_log_posterior(const SensorDataset& ds, const Vec& locs,
                                  double range, double noise);

/// Reflect the unknown positions across the least-squares line through the
/// known anchors; maps a configuration to its mirror mode.
Vec mirror_configuration(const SensorDataset& ds, const Vec& locs);

}  // namespace tht
