#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace topoproj {

inline constexpr std::size_t kStateDim = 64;
inline constexpr std::size_t kBoundDim = 16;
inline constexpr std::size_t kFormDim = 32;
inline constexpr std::size_t kIntentDim = 16;
static_assert(kBoundDim + kFormDim + kIntentDim == kStateDim);

/// Lower bound on every edge weight. Keeps curvature sign meaningful for
/// anti-aligned states.
inline constexpr double kWeightFloor = 1e-6;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using BoundVector = Eigen::Matrix<double, kBoundDim, 1>;
using FormVector = Eigen::Matrix<double, kFormDim, 1>;
using IntentVector = Eigen::Matrix<double, kIntentDim, 1>;

using NodeId = std::size_t;

/// A 64-component node state. Always finite; the constructor rejects
/// NaN/inf with InvalidInput.
class NodeState {
 public:
  NodeState() : values_(StateVector::Zero()) {}
  explicit NodeState(const StateVector& values);

  const StateVector& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  friend bool operator==(const NodeState& a, const NodeState& b) {
    return a.values_ == b.values_;
  }

 private:
  StateVector values_;
};

// bound = [0, 16), form = [16, 48), intent = [48, 64)
struct StateParts {
  BoundVector bound;
  FormVector form;
  IntentVector intent;
};

StateParts decompose_state(const NodeState& s);
NodeState compose_state(const StateParts& parts);

/// Affinity in (kWeightFloor, 1]: the cosine similarity mapped from [-1, 1]
/// onto [0, 1] and floored. Degenerate (near-zero) states get the floor.
double edge_weight(const StateVector& a, const StateVector& b);
inline double edge_weight(const NodeState& a, const NodeState& b) {
  return edge_weight(a.values(), b.values());
}

/// Undirected edge, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge make(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Which node pairs receive edges.
struct Topology {
  enum class Kind { Complete, KNearest, Explicit };

  Kind kind = Kind::Complete;
  std::size_t k = 0;          // KNearest only
  std::vector<Edge> edges;    // Explicit only

  static Topology complete() { return {}; }
  static Topology k_nearest(std::size_t k) { return {Kind::KNearest, k, {}}; }
  static Topology explicit_edges(std::vector<Edge> edges) {
    return {Kind::Explicit, 0, std::move(edges)};
  }
};

/// Node states plus an undirected weighted edge set. Immutable once built;
/// `with_states` produces a reweighted copy over the same edge set.
class SemanticGraph {
 public:
  /// Throws InvalidInput for an empty state list and InvalidTopology for an
  /// explicit edge list that references unknown nodes or contains self-loops.
  static SemanticGraph build(std::vector<NodeState> states,
                             const Topology& topology = Topology::complete());

  std::size_t node_count() const { return states_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<NodeState>& states() const { return states_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const double> weights() const { return weights_; }
  const Topology& topology() const { return topology_; }

  double weight(std::size_t edge_index) const { return weights_.at(edge_index); }
  std::optional<std::size_t> find_edge(Edge e) const;

  /// Unweighted incident-edge count. Throws InvalidNode.
  std::size_t degree(NodeId node) const;
  /// Sum of incident edge weights. Throws InvalidNode.
  double weighted_degree(NodeId node) const;
  /// Edge indices incident to `node`, ascending. Throws InvalidNode.
  std::span<const std::size_t> incident_edges(NodeId node) const;

  /// Same edges, weights recomputed from `states`. Requires the same node count.
  SemanticGraph with_states(std::vector<NodeState> states) const;

 private:
  SemanticGraph() = default;
  void check_node(NodeId node) const;
  void reweight();

  std::vector<NodeState> states_;
  Topology topology_;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> incidence_;
  std::vector<double> weighted_degree_;
};

}  // namespace topoproj
