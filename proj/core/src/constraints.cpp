#include "topoproj/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "topoproj/errors.hpp"

namespace topoproj {

namespace {

void check_id(NodeId id, std::size_t n, const char* what) {
  if (id >= n) {
    throw InvalidConstraint(std::string(what) + " references node " + std::to_string(id) +
                            " but only " + std::to_string(n) + " nodes exist");
  }
}

struct Divisors {
  double data = 1.0;
  double phys = 1.0;
  double logic = 1.0;
};

Divisors divisors(std::size_t n, const ConstraintSet& cs, Normalization norm) {
  if (norm == Normalization::SSE) return {};
  auto count_or_one = [](std::size_t k) { return k == 0 ? 1.0 : static_cast<double>(k); };
  return {count_or_one(n), count_or_one(cs.separations.size()),
          count_or_one(cs.orderings.size())};
}

}  // namespace

void ConstraintSet::validate(std::size_t node_count) const {
  for (const auto& [id, ref] : anchors) check_id(id, node_count, "anchor");
  for (const auto& c : separations) {
    check_id(c.a, node_count, "separation");
    check_id(c.b, node_count, "separation");
    if (c.a == c.b) throw InvalidConstraint("separation pairs a node with itself");
    if (!(c.min_dist > 0.0) || !std::isfinite(c.min_dist)) {
      throw InvalidConstraint("separation min_dist must be positive and finite");
    }
  }
  for (const auto& c : orderings) {
    check_id(c.a, node_count, "ordering");
    check_id(c.b, node_count, "ordering");
    if (c.a == c.b) throw InvalidConstraint("ordering pairs a node with itself");
    if (c.axis > 2) throw InvalidConstraint("ordering axis must be 0, 1 or 2");
    if (!(c.margin >= 0.0) || !std::isfinite(c.margin)) {
      throw InvalidConstraint("ordering margin must be non-negative and finite");
    }
  }
}

void LossWeights::validate() const {
  for (double v : {data, phys, logic}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("loss weights must be finite and non-negative");
    }
  }
}

double penetration_depth(std::span<const NodeState> states, const Separation& c) {
  const double dist = (position_of(states[c.a]) - position_of(states[c.b])).norm();
  return std::max(0.0, c.min_dist - dist);
}

double ordering_violation(std::span<const NodeState> states, const Ordering& c) {
  return std::max(0.0, states[c.a][c.axis] - states[c.b][c.axis] + c.margin);
}

LossBreakdown loss_components(std::span<const NodeState> states, const ConstraintSet& cs,
                              Normalization norm) {
  cs.validate(states.size());
  const Divisors div = divisors(states.size(), cs, norm);

  LossBreakdown out;
  out.norm = norm;
  for (const auto& [id, ref] : cs.anchors) {
    out.data += (states[id].values() - ref.values()).squaredNorm();
  }
  for (const auto& c : cs.separations) {
    const double phi = penetration_depth(states, c);
    out.phys += phi * phi;
  }
  for (const auto& c : cs.orderings) {
    const double psi = ordering_violation(states, c);
    out.logic += psi * psi;
  }
  out.data /= div.data;
  out.phys /= div.phys;
  out.logic /= div.logic;
  out.total = out.data + out.phys + out.logic;
  return out;
}

LossBreakdown weighted_loss(std::span<const NodeState> states, const ConstraintSet& cs,
                            const LossWeights& w, Normalization norm) {
  LossBreakdown out = loss_components(states, cs, norm);
  out.total = out.weighted(w);
  return out;
}

double total_energy(std::span<const NodeState> states, const ConstraintSet& cs,
                    const LossWeights& w, Normalization norm) {
  return weighted_loss(states, cs, w, norm).total;
}

GradientParts loss_gradient_parts(std::span<const NodeState> states, const ConstraintSet& cs,
                                  Normalization norm) {
  cs.validate(states.size());
  const Divisors div = divisors(states.size(), cs, norm);
  GradientParts parts;
  parts.data.assign(states.size(), StateVector::Zero());
  parts.phys.assign(states.size(), StateVector::Zero());
  parts.logic.assign(states.size(), StateVector::Zero());

  const double data_scale = 2.0 / div.data;
  for (const auto& [id, ref] : cs.anchors) {
    parts.data[id] = data_scale * (states[id].values() - ref.values());
  }

  // d/dp_a of phi^2 with phi = m - |p_a - p_b|: -2 phi (p_a - p_b)/|p_a - p_b|.
  // Coincident positions have no defined direction; they contribute nothing.
  const double phys_scale = 2.0 / div.phys;
  for (const auto& c : cs.separations) {
    const Position delta = position_of(states[c.a]) - position_of(states[c.b]);
    const double dist = delta.norm();
    const double phi = c.min_dist - dist;
    if (phi <= 0.0 || dist == 0.0) continue;
    const Position push = (phys_scale * phi / dist) * delta;
    parts.phys[c.a].head<3>() -= push;
    parts.phys[c.b].head<3>() += push;
  }

  const double logic_scale = 2.0 / div.logic;
  for (const auto& c : cs.orderings) {
    const double psi = states[c.a][c.axis] - states[c.b][c.axis] + c.margin;
    if (psi <= 0.0) continue;
    const auto axis = static_cast<Eigen::Index>(c.axis);
    parts.logic[c.a][axis] += logic_scale * psi;
    parts.logic[c.b][axis] -= logic_scale * psi;
  }
  return parts;
}

std::vector<StateVector> loss_gradient(std::span<const NodeState> states,
                                       const ConstraintSet& cs, const LossWeights& w,
                                       Normalization norm) {
  const GradientParts parts = loss_gradient_parts(states, cs, norm);
  std::vector<StateVector> grad(states.size());
  for (NodeId v = 0; v < states.size(); ++v) grad[v] = parts.combine(v, w);
  return grad;
}

}  // namespace topoproj
