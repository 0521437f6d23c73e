#pragma once

#include "tht/leapfrog.hpp"

namespace tht {

/// One application of the tempered proposal map S: a leapfrog step with mass
/// alpha_{k+1/2} * M and step size eps * alpha_{k+1/2}^a, then k -> k+1
/// (mod period). Box reflection is applied when the model has bounds.
ExtendedState tht_map(const PotentialModel& model, const ExtendedState& s,
                      const ThtConfig& cfg);

/// Tuning-frame coordinates (x e^{-a eta}, v e^{a eta}).
std::pair<Vec, Vec> bar_transform(const Vec& x, const Vec& v, double eta,
                                  double a);

}  // namespace tht
