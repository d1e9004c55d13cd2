#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "topoproj/graph.hpp"

namespace topoproj {

/// Success threshold on final energy.
inline constexpr double kSuccessEnergy = 2.0;

using Position = Eigen::Vector3d;

/// The spatial part of a state: first three components of the bound slice.
inline Position position_of(const StateVector& s) { return s.head<3>(); }
inline Position position_of(const NodeState& s) { return position_of(s.values()); }

/// Pairwise collision avoidance: |pos(a) - pos(b)| >= min_dist.
struct Separation {
  NodeId a = 0;
  NodeId b = 0;
  double min_dist = 0.1;
};

/// pos(a)[axis] < pos(b)[axis] - margin  ("a left of b" for axis 0).
struct Ordering {
  NodeId a = 0;
  NodeId b = 0;
  std::size_t axis = 0;
  double margin = 0.0;
};

struct ConstraintSet {
  std::map<NodeId, NodeState> anchors;  // node -> reference state
  std::vector<Separation> separations;
  std::vector<Ordering> orderings;

  /// Throws InvalidConstraint on ids >= node_count, (a, a) pairs,
  /// min_dist <= 0, margin < 0 or axis > 2.
  void validate(std::size_t node_count) const;
};

struct LossWeights {
  double data = 1.0;
  double phys = 10.0;
  double logic = 2.0;

  void validate() const;
};

enum class Normalization { MSE, SSE };

struct LossBreakdown {
  double data = 0.0;
  double phys = 0.0;
  double logic = 0.0;
  double total = 0.0;
  Normalization norm = Normalization::MSE;

  /// Re-weights the unweighted components.
  double weighted(const LossWeights& w) const {
    return w.data * data + w.phys * phys + w.logic * logic;
  }
};

/// Hinge magnitudes: phi = max(0, min_dist - dist), psi = max(0, a - b + margin).
double penetration_depth(std::span<const NodeState> states, const Separation& c);
double ordering_violation(std::span<const NodeState> states, const Ordering& c);

/// Unweighted components; `total` is their plain sum. With MSE each family is
/// divided by its size (data by node count), an empty family by 1.
LossBreakdown loss_components(std::span<const NodeState> states, const ConstraintSet& cs,
                              Normalization norm);

/// Components plus `total` = weighted sum.
LossBreakdown weighted_loss(std::span<const NodeState> states, const ConstraintSet& cs,
                            const LossWeights& w, Normalization norm);

double total_energy(std::span<const NodeState> states, const ConstraintSet& cs,
                    const LossWeights& w, Normalization norm);

inline bool is_success(double energy) { return energy < kSuccessEnergy; }

/// Analytic gradient of total_energy with respect to every node state.
/// Hinges contribute zero exactly at the kink.
std::vector<StateVector> loss_gradient(std::span<const NodeState> states,
                                       const ConstraintSet& cs, const LossWeights& w,
                                       Normalization norm);

/// Unweighted, normalized per-family gradients; the total gradient is their
/// weighted combination.
struct GradientParts {
  std::vector<StateVector> data;
  std::vector<StateVector> phys;
  std::vector<StateVector> logic;

  StateVector combine(NodeId v, const LossWeights& w) const {
    return w.data * data[v] + w.phys * phys[v] + w.logic * logic[v];
  }
};

GradientParts loss_gradient_parts(std::span<const NodeState> states, const ConstraintSet& cs,
                                  Normalization norm);

}  // namespace topoproj
