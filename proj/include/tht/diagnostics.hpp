#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "tht/samplers.hpp"
#include "tht/tht_map.hpp"

namespace tht {

/// Inverse standard normal CDF (rational approximation with one Halley
/// refinement; good to ~1e-14 over (0, 1)).
double inverse_normal_cdf(double p);

/// Rank-normalized split R-hat (folded over ranks of the pooled split
/// chains, normal scores via the Blom offset). Returns nullopt when the
/// pooled sample is constant.
std::optional<double> rank_normalized_rhat(
    const std::vector<std::vector<double>>& chains);

/// Assigns states to modes; kUnassigned states carry the previous label.
class ModeClassifier {
 public:
  static constexpr int kUnassigned = -1;
  virtual ~ModeClassifier() = default;
  virtual int classify(const Vec& x) const = 0;
};

/// Label = sign of <x - midpoint, direction>.
class ProjectionSignClassifier : public ModeClassifier {
 public:
  ProjectionSignClassifier(Vec midpoint, Vec direction);
  int classify(const Vec& x) const override;

 private:
  Vec midpoint_, direction_;
};

/// Label = index of the nearest reference configuration; unassigned when the
/// two nearest distances are within 10% of each other.
class NearestReferenceClassifier : public ModeClassifier {
 public:
  explicit NearestReferenceClassifier(std::vector<Vec> references,
                                      double margin = 0.1);
  int classify(const Vec& x) const override;

 private:
  std::vector<Vec> references_;
  double margin_;
};

/// Number of label changes between consecutively assigned states.
int count_mode_hops(const std::vector<Vec>& series,
                    const ModeClassifier& classifier);

/// Oscillation frequency of a trace: mean crossings / (2 * duration).
/// Returns 0 for traces with fewer than two crossings.
double estimate_oscillation_frequency(const std::vector<double>& trace,
                                      double dt);

/// ceil(5 / (eps * rho_min)); the schedule period needed for at least five
/// oscillation cycles of the tuning-frame velocity per schedule cycle.
int recommended_period(double eps, double rho_min);

/// 1 / (10 * rho_max); the step size keeping >= 10 leapfrog steps per
/// oscillation cycle.
double recommended_max_eps(double rho_max);

struct PilotOptions {
  double eps = 0.02;         // pilot baseline step size
  int period = 20000;        // pilot cycle length in steps (slow schedule)
  Index coordinate = 0;      // which velocity coordinate to score
};

struct TuningReport {
  double a_hat = 0.0;
  double gamma_hat = 0.0;
  int period_min = 0;
  double eps_max = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  std::vector<double> scores;  // amplitude-drift score per grid entry
};

/// Pilot-path tuning advisor. For each candidate time-scale exponent,
/// simulates one slow schedule cycle with a zero-mean sinusoidal exponent
/// excursion of the given amplitude and scores the drift in the
/// tuning-frame velocity amplitude between the first and last quarter of
/// the cycle; an even (nonnegative) excursion would make those quarters
/// mirror images and hide the drift. The minimizer estimates the potential's
/// polynomial degree, and crossing counts over sliding windows give the
/// oscillation-frequency band behind the period and step-size bounds.
TuningReport recommend_tuning(const PotentialModel& model,
                              const Vec& pilot_start, double schedule_amp,
                              const std::vector<double>& a_grid,
                              RngStream& rng, const PilotOptions& opts = {});

struct DeltaHPoint {
  int step;
  double delta_h;
};

/// Energy increments along one full proposal sweep of max_proposals steps,
/// without acceptance logic. Uses the index-free extended energy, so the
/// support restriction of psi does not truncate the trace; a non-finite
/// state truncates it.
std::vector<DeltaHPoint> delta_h_trace(const PotentialModel& model,
                                       const Vec& x0, const ThtConfig& cfg,
                                       RngStream& rng);

}  // namespace tht
