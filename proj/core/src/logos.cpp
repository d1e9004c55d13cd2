#include "topoproj/logos.hpp"

#include <algorithm>
#include <cmath>

namespace topoproj {

void LogosConfig::validate() const {
  if (!(alpha > 0.0)) throw InvalidInput("logos alpha must be positive");
  if (!(tau > 0.0)) throw InvalidInput("logos tau must be positive");
  if (t_max < 1) throw InvalidInput("logos t_max must be at least 1");
  if (grad_clip && !(*grad_clip > 0.0)) throw InvalidInput("logos grad_clip must be positive");
  if (monitor_weights) monitor_weights->validate();
}

StateVector logos_node_update(const StateVector& s, const StateVector& g, double eta,
                              const DeltaParams& dp, const LogosConfig& lc, bool clip) {
  const double step = lc.alpha * eta;
  const StateVector target = s - step * g;
  StateVector next = lc.use_delta ? delta_step_unclipped(s, g, target, dp) : target;
  if (clip && dp.clip) next = clip_state(next, *dp.clip);
  return next;
}

LogosResult logos_project(const SemanticGraph& graph, const ConstraintSet& cs,
                          const LossWeights& weights, const DeltaParams& dp,
                          const LogosConfig& lc) {
  lc.validate();
  dp.validate();
  weights.validate();
  cs.validate(graph.node_count());

  const std::size_t n = graph.node_count();
  std::vector<NodeState> states = graph.states();
  SemanticGraph current = graph;
  std::vector<double> eta(n, 1.0);

  LogosResult result;
  LogosTrace& trace = result.trace;
  trace.iterations.reserve(lc.t_max);

  std::size_t t = 0;
  bool below_tol = false;
  do {
    LogosIteration it;
    it.loss = weighted_loss(states, cs, weights, lc.norm);
    if (!std::isfinite(it.loss.total)) {
      throw DivergenceError("non-finite energy at sweep " + std::to_string(t), trace);
    }
    below_tol = it.loss.total < lc.tau;

    const GradientParts parts = loss_gradient_parts(states, cs, lc.norm);
    if (lc.use_curvature) {
      if (t > 0) current = current.with_states(states);
      eta = curvature_step_scales(current, lc.curvature).per_node_scale;
    }

    std::vector<NodeState> next = states;
    double grad_sum = 0.0;
    double step_sum = 0.0;
    double monitor_sum = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      const StateVector grad = parts.combine(v, weights);
      const double gnorm = grad.norm();
      if (!std::isfinite(gnorm)) {
        throw DivergenceError("non-finite gradient at sweep " + std::to_string(t), trace);
      }
      it.grad_max = std::max(it.grad_max, gnorm);
      grad_sum += gnorm;
      const double mnorm =
          lc.monitor_weights ? parts.combine(v, *lc.monitor_weights).norm() : gnorm;
      it.monitor_grad_max = std::max(it.monitor_grad_max, mnorm);
      monitor_sum += mnorm;
      if (gnorm < dp.epsilon) continue;

      StateVector g = grad;
      if (lc.grad_clip && gnorm > *lc.grad_clip) g *= *lc.grad_clip / gnorm;
      const StateVector updated = logos_node_update(states[v].values(), g, eta[v], dp, lc);
      const double moved = (updated - states[v].values()).norm();
      it.step_max = std::max(it.step_max, moved);
      step_sum += moved;
      next[v] = NodeState(updated);
    }
    it.grad_mean = grad_sum / static_cast<double>(n);
    it.step_mean = step_sum / static_cast<double>(n);
    it.monitor_grad_mean = monitor_sum / static_cast<double>(n);

    states = std::move(next);
    trace.iterations.push_back(it);
    ++t;
    trace.iterations_run = t;
  } while (!below_tol && t < lc.t_max);

  trace.converged = below_tol;
  result.final_loss = weighted_loss(states, cs, weights, lc.norm);
  if (!std::isfinite(result.final_loss.total)) {
    throw DivergenceError("non-finite energy after projection", trace);
  }
  result.states = std::move(states);
  return result;
}

}  // namespace topoproj
