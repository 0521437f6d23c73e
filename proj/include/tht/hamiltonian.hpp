#pragma once

#include "tht/model.hpp"

namespace tht {

/// Energy of the extended state (x, k, v):
///   U(x) - log psi(k) + 0.5 v^T (alpha_k M) v - 0.5 log det(alpha_k M).
/// Returns +inf without touching the model when psi(k) = 0.
double extended_hamiltonian(const PotentialModel& model, const ExtendedState& s,
                            const MassSchedule& schedule,
                            const IndexDistribution& psi, const MassSpec& mass);

/// Same energy with the -log psi(k) term dropped; used for trajectory
/// diagnostics where the index distribution is irrelevant.
double extended_energy(const PotentialModel& model, const ExtendedState& s,
                       const MassSchedule& schedule, const MassSpec& mass);

/// extended_hamiltonian without the ExtendedState packaging; k may be any
/// integer (reduced internally). Shared by the samplers' hot path.
double extended_hamiltonian_at(const PotentialModel& model, const Vec& x,
                               double k, const Vec& v,
                               const MassSchedule& schedule,
                               const IndexDistribution& psi,
                               const MassSpec& mass);

/// Upper bound (2 delta / d)^{d/2} e^{d/2 - delta} on P(chi^2_d > 2 delta),
/// evaluated in log space.
double chernoff_jump_bound(int dim, double delta);

/// Draw v ~ N(0, alpha^{-1} M^{-1}).
template <class Rng>
Vec sample_initial_velocity(const MassSpec& mass, double alpha, Rng& rng) {
  return mass.chol_minv_mul(rng.standard_normal(mass.dim())) /
         std::sqrt(alpha);
}

}  // namespace tht
