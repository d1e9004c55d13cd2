#include "topoproj/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <string>

#include "topoproj/errors.hpp"

namespace topoproj {

NodeState::NodeState(const StateVector& values) : values_(values) {
  if (!values_.allFinite()) {
    throw InvalidInput("node state has non-finite components");
  }
}

StateParts decompose_state(const NodeState& s) {
  const auto& x = s.values();
  return StateParts{
      x.segment<kBoundDim>(0),
      x.segment<kFormDim>(kBoundDim),
      x.segment<kIntentDim>(kBoundDim + kFormDim),
  };
}

NodeState compose_state(const StateParts& parts) {
  StateVector x;
  x << parts.bound, parts.form, parts.intent;
  return NodeState(x);
}

namespace {

constexpr double kDegenerateNorm = 1e-12;

// Unit direction, or nullopt for a (near) zero vector.
std::optional<StateVector> unit_of(const StateVector& a) {
  const double na = a.norm();
  if (na < kDegenerateNorm) return std::nullopt;
  return StateVector(a / na);
}

// Normalizing each side before the dot product keeps the weight symmetric
// bit-for-bit regardless of argument order.
double weight_of_units(const std::optional<StateVector>& a, const std::optional<StateVector>& b) {
  if (!a || !b) return kWeightFloor;
  const double cosine = std::clamp(a->dot(*b), -1.0, 1.0);
  return std::max(kWeightFloor, 0.5 * (1.0 + cosine));
}

}  // namespace

double edge_weight(const StateVector& a, const StateVector& b) {
  return weight_of_units(unit_of(a), unit_of(b));
}

namespace {

std::vector<Edge> complete_edges(std::size_t n) {
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v});
  return edges;
}

std::vector<Edge> k_nearest_edges(const std::vector<NodeState>& states, std::size_t k) {
  const std::size_t n = states.size();
  std::set<Edge> chosen;
  std::vector<NodeId> others;
  for (NodeId u = 0; u < n; ++u) {
    others.clear();
    for (NodeId v = 0; v < n; ++v)
      if (v != u) others.push_back(v);
    std::vector<double> affinity(n, 0.0);
    for (NodeId v : others) affinity[v] = edge_weight(states[u], states[v]);
    std::stable_sort(others.begin(), others.end(),
                     [&](NodeId a, NodeId b) { return affinity[a] > affinity[b]; });
    const std::size_t take = std::min(k, others.size());
    for (std::size_t i = 0; i < take; ++i) chosen.insert(Edge::make(u, others[i]));
  }
  return {chosen.begin(), chosen.end()};
}

std::vector<Edge> checked_explicit_edges(const std::vector<Edge>& raw, std::size_t n) {
  std::set<Edge> seen;
  for (const Edge& e : raw) {
    if (e.u >= n || e.v >= n) {
      throw InvalidTopology("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                            ") references an unknown node");
    }
    if (e.u == e.v) {
      throw InvalidTopology("self-loop on node " + std::to_string(e.u));
    }
    if (!seen.insert(Edge::make(e.u, e.v)).second) {
      throw InvalidTopology("duplicate edge (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ")");
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

SemanticGraph SemanticGraph::build(std::vector<NodeState> states, const Topology& topology) {
  if (states.empty()) throw InvalidInput("graph needs at least one node");

  SemanticGraph g;
  g.topology_ = topology;
  switch (topology.kind) {
    case Topology::Kind::Complete:
      g.edges_ = complete_edges(states.size());
      break;
    case Topology::Kind::KNearest:
      g.edges_ = k_nearest_edges(states, topology.k);
      break;
    case Topology::Kind::Explicit:
      g.edges_ = checked_explicit_edges(topology.edges, states.size());
      break;
  }
  g.states_ = std::move(states);

  g.incidence_.assign(g.states_.size(), {});
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    g.incidence_[g.edges_[i].u].push_back(i);
    g.incidence_[g.edges_[i].v].push_back(i);
  }
  g.reweight();
  return g;
}

void SemanticGraph::reweight() {
  std::vector<std::optional<StateVector>> units(states_.size());
  for (NodeId v = 0; v < states_.size(); ++v) units[v] = unit_of(states_[v].values());
  weights_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    weights_[i] = weight_of_units(units[edges_[i].u], units[edges_[i].v]);
  }
  // Summed in ascending weight order so relabeling nodes cannot change a bit.
  weighted_degree_.assign(states_.size(), 0.0);
  std::vector<double> incident;
  for (NodeId v = 0; v < states_.size(); ++v) {
    incident.clear();
    for (std::size_t ei : incidence_[v]) incident.push_back(weights_[ei]);
    std::sort(incident.begin(), incident.end());
    for (double w : incident) weighted_degree_[v] += w;
  }
}

SemanticGraph SemanticGraph::with_states(std::vector<NodeState> states) const {
  if (states.size() != states_.size()) {
    throw InvalidInput("with_states: node count changed from " + std::to_string(states_.size()) +
                       " to " + std::to_string(states.size()));
  }
  SemanticGraph g = *this;
  g.states_ = std::move(states);
  g.reweight();
  return g;
}

std::optional<std::size_t> SemanticGraph::find_edge(Edge e) const {
  e = Edge::make(e.u, e.v);
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

void SemanticGraph::check_node(NodeId node) const {
  if (node >= states_.size()) {
    throw InvalidNode("node " + std::to_string(node) + " not in graph of " +
                      std::to_string(states_.size()) + " nodes");
  }
}

std::size_t SemanticGraph::degree(NodeId node) const {
  check_node(node);
  return incidence_[node].size();
}

double SemanticGraph::weighted_degree(NodeId node) const {
  check_node(node);
  return weighted_degree_[node];
}

std::span<const std::size_t> SemanticGraph::incident_edges(NodeId node) const {
  check_node(node);
  return incidence_[node];
}

}  // namespace topoproj
