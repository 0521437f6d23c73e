#include "tht/tht_map.hpp"

namespace tht {

ExtendedState tht_map(const PotentialModel& model, const ExtendedState& s,
                      const ThtConfig& cfg) {
  const int period = cfg.schedule.period();
  const double k_half = static_cast<double>(s.index) + 0.5;
  const double scale = cfg.schedule.alpha(k_half);
  const double step = cfg.eps * std::pow(scale, cfg.a);

  ExtendedState out{s.position, (s.index + 1) % period, s.velocity};
  Vec grad = model.gradient(out.position);
  detail::advance(model, out.position, out.velocity, grad, cfg.mass, scale,
                  step, model.bounds());
  return out;
}

std::pair<Vec, Vec> bar_transform(const Vec& x, const Vec& v, double eta,
                                  double a) {
  const double s = std::exp(a * eta);
  return {x / s, v * s};
}

}  // namespace tht
