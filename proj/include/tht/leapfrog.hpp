#pragma once

#include <utility>

#include "tht/model.hpp"

namespace tht {

struct PhasePoint {
  Vec position;
  Vec velocity;
};

/// One kick-drift-kick step with effective mass mass_scale * M.
/// The result may contain non-finite coordinates when the integrator blows
/// up; callers treat the trajectory as rejected from that point on.
PhasePoint leapfrog_step(const PotentialModel& model, const PhasePoint& p,
                         const MassSpec& mass, double mass_scale, double step);

/// Fold a point back into the box by repeated mirror reflection, negating the
/// matching velocity component once per reflection. Idempotent on in-box
/// points; unconstrained coordinates pass through.
std::pair<Vec, Vec> reflect_into_box(const Vec& x, const Vec& v,
                                     const Box& box);

namespace detail {

/// In-place leapfrog stage shared by the samplers: advances (x, v) one step
/// with effective mass mass_scale * M, reusing grad = model.gradient(x) from
/// the previous step and leaving grad = model.gradient(x_new) on return.
/// When a box is given, the position fold (and the matching velocity sign
/// flips) happens after the drift, so the closing half kick sees the folded
/// position; this keeps the step exactly self-inverse under velocity
/// negation with bounds active.
void advance(const PotentialModel& model, Vec& x, Vec& v, Vec& grad,
             const MassSpec& mass, double mass_scale, double step,
             const Box* box);

void fold_into_box(Vec& x, Vec& v, const Box& box);

}  // namespace detail

}  // namespace tht
