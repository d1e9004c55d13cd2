#include "topoproj/delta.hpp"

#include <cmath>

#include "topoproj/errors.hpp"

namespace topoproj {

void DeltaParams::validate() const {
  if (!(beta >= 0.0 && beta <= 2.0)) throw InvalidInput("delta beta must lie in [0, 2]");
  if (!(epsilon > 0.0)) throw InvalidInput("delta epsilon must be positive");
  if (clip && !(clip->lo < clip->hi)) throw InvalidInput("delta clip requires lo < hi");
}

StateVector clip_state(const StateVector& x, const ClipBounds& bounds) {
  return x.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
}

StateVector delta_step_unclipped(const StateVector& x, const StateVector& g,
                                 const StateVector& v, const DeltaParams& p) {
  if (!x.allFinite() || !g.allFinite() || !v.allFinite()) {
    throw InvalidInput("delta_step: non-finite input");
  }
  p.validate();
  const double gnorm = g.norm();
  if (gnorm < p.epsilon) return x;
  const StateVector k = g / gnorm;
  const double projection = k.dot(v - x);
  return x + (p.beta * projection) * k;
}

StateVector delta_step(const StateVector& x, const StateVector& g, const StateVector& v,
                       const DeltaParams& p) {
  StateVector out = delta_step_unclipped(x, g, v, p);
  if (p.clip && g.norm() >= p.epsilon) out = clip_state(out, *p.clip);
  return out;
}

}  // namespace topoproj
