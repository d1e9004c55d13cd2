#pragma once

#include <optional>

#include "topoproj/graph.hpp"

namespace topoproj {

struct ClipBounds {
  double lo = -1.0;
  double hi = 1.0;
};

struct DeltaParams {
  double beta = 0.8;      // gate in [0, 2]: 0 identity, 1 projection, 2 reflection
  double epsilon = 1e-8;  // gradients shorter than this leave the state untouched
  std::optional<ClipBounds> clip = ClipBounds{};

  /// Throws InvalidInput when beta is outside [0, 2], epsilon <= 0 or lo >= hi.
  void validate() const;
};

/// Rank-one state update along k = g / |g|:
///
///   x' = clip(x + beta * (k^T (v - x)) * k)
///
/// The step lies in span{k}; the orthogonal complement of k is untouched
/// before clipping. Returns x bit-for-bit when |g| < epsilon. Throws
/// InvalidInput on non-finite inputs.
StateVector delta_step(const StateVector& x, const StateVector& g, const StateVector& v,
                       const DeltaParams& p);

/// The same update without the clip.
StateVector delta_step_unclipped(const StateVector& x, const StateVector& g,
                                 const StateVector& v, const DeltaParams& p);

StateVector clip_state(const StateVector& x, const ClipBounds& bounds);

}  // namespace topoproj
