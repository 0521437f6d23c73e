#pragma once

#include "tht/samplers.hpp"
#include "tht/targets/sensor.hpp"

namespace tht {

/// Blocked state of the sensor posterior with unknown range and noise.
struct GibbsState {
  Vec locs;          // 16 coordinates, [x0, y0, ..., x7, y7]
  double log_range;
  double log_noise;
};

/// One deterministic-scan sweep: tempered transition on the locations given
/// (range, noise), then one HMC update of log range and one of log noise
/// given the locations. The hyper draws use unit mass.
template <class Rng>
GibbsState gibbs_sweep(const GibbsState& state, const SensorDataset& ds,
                       const ThtConfig& location_cfg,
                       const HmcConfig& hyper_cfg, Rng& rng) {
  GibbsState next = state;

  const SensorModel locs_model(ds, std::exp(state.log_range),
                               std::exp(state.log_noise));
  next.locs = tht_step(locs_model, state.locs, location_cfg, rng).next_x;

  const HyperPotential range_model(ds, next.locs,
                                   HyperPotential::Kind::kRange);
  Vec theta(1);
  theta[0] = state.log_range;
  next.log_range = hmc_step(range_model, theta, hyper_cfg, rng).next_x[0];

  const HyperPotential noise_model(ds, next.locs,
                                   HyperPotential::Kind::kNoise);
  theta[0] = state.log_noise;
  next.log_noise = hmc_step(noise_model, theta, hyper_cfg, rng).next_x[0];

  return next;
}

}  // namespace tht
