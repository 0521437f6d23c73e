#include "tht/hamiltonian.hpp"

namespace tht {

double extended_energy(const PotentialModel& model, const ExtendedState& s,
                       const MassSchedule& schedule, const MassSpec& mass) {
  const double alpha = schedule.alpha(s.index);
  const double d = static_cast<double>(mass.dim());
  const double log_det_scaled = d * std::log(alpha) + mass.log_det();
  return model.potential(s.position) + alpha * mass.kinetic(s.velocity) -
         0.5 * log_det_scaled;
}

double extended_hamiltonian_at(const PotentialModel& model, const Vec& x,
                               double k, const Vec& v,
                               const MassSchedule& schedule,
                               const IndexDistribution& psi,
                               const MassSpec& mass) {
  const auto ki = static_cast<long long>(std::llround(k));
  if (!psi.in_support(ki)) return kInf;
  const double alpha = schedule.alpha(k);
  const double d = static_cast<double>(mass.dim());
  const double log_det_scaled = d * std::log(alpha) + mass.log_det();
  return model.potential(x) + alpha * mass.kinetic(v) - 0.5 * log_det_scaled -
         psi.log_prob(ki);
}

double extended_hamiltonian(const PotentialModel& model, const ExtendedState& s,
                            const MassSchedule& schedule,
                            const IndexDistribution& psi,
                            const MassSpec& mass) {
  return extended_hamiltonian_at(model, s.position, s.index, s.velocity,
                                 schedule, psi, mass);
}

double chernoff_jump_bound(int dim, double delta) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double d = static_cast<double>(dim);
  const double log_bound =
      0.5 * d * std::log(2.0 * delta / d) + 0.5 * d - delta;
  return std::exp(log_bound);
}

}  // namespace tht
