#include "tht/leapfrog.hpp"

#include <cmath>

namespace tht {

namespace detail {

void fold_into_box(Vec& x, Vec& v, const Box& box) {
  const Vec& lo = box.lo();
  const Vec& hi = box.hi();
  for (Index i = 0; i < x.size(); ++i) {
    double xi = x[i];
    if (!std::isfinite(xi)) continue;  // blow-up propagates untouched
    if (xi >= lo[i] && xi <= hi[i]) continue;
    const bool lo_finite = std::isfinite(lo[i]);
    const bool hi_finite = std::isfinite(hi[i]);
    if (lo_finite && hi_finite) {
      // O(1) triangle-wave fold; the reflection count parity fixes the
      // velocity sign.
      const double width = hi[i] - lo[i];
      const double offset = xi - lo[i];
      const double folds = std::floor(offset / width);
      const double rem = offset - folds * width;
      const bool odd = std::fmod(folds, 2.0) != 0.0;
      x[i] = odd ? hi[i] - rem : lo[i] + rem;
      if (odd) v[i] = -v[i];
    } else if (lo_finite && xi < lo[i]) {
      x[i] = 2.0 * lo[i] - xi;
      v[i] = -v[i];
    } else if (hi_finite && xi > hi[i]) {
      x[i] = 2.0 * hi[i] - xi;
      v[i] = -v[i];
    }
  }
}

void advance(const PotentialModel& model, Vec& x, Vec& v, Vec& grad,
             const MassSpec& mass, double mass_scale, double step,
             const Box* box) {
  const double half = 0.5 * step / mass_scale;
  v.noalias() -= half * mass.apply_minv(grad);
  x.noalias() += step * v;
  if (box != nullptr) fold_into_box(x, v, *box);
  if (x.allFinite()) {
    grad = model.gradient(x);
    v.noalias() -= half * mass.apply_minv(grad);
  } else {
    v.setConstant(kNaN);
  }
}

}  // namespace detail

PhasePoint leapfrog_step(const PotentialModel& model, const PhasePoint& p,
                         const MassSpec& mass, double mass_scale, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(mass_scale > 0.0)) {
    throw std::invalid_argument("mass scale must be positive");
  }
  PhasePoint out{p.position, p.velocity};
  Vec grad = model.gradient(out.position);
  detail::advance(model, out.position, out.velocity, grad, mass, mass_scale,
                  step, nullptr);
  return out;
}

std::pair<Vec, Vec> reflect_into_box(const Vec& x, const Vec& v,
                                     const Box& box) {
  Vec xf = x;
  Vec vf = v;
  detail::fold_into_box(xf, vf, box);
  return {std::move(xf), std::move(vf)};
}

}  // namespace tht
