#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "topoproj/constraints.hpp"
#include "topoproj/curvature.hpp"
#include "topoproj/delta.hpp"
#include "topoproj/errors.hpp"
#include "topoproj/graph.hpp"

namespace topoproj {

struct LogosConfig {
  double alpha = 0.01;
  double tau = 1e-6;
  std::size_t t_max = 10;
  std::optional<double> grad_clip = 1.0;  // rescale g to |g| <= grad_clip
  bool use_delta = true;
  bool use_curvature = true;
  Normalization norm = Normalization::MSE;
  CurvatureParams curvature;
  // Weights for the monitor gradient norms; the call's weights when unset.
  std::optional<LossWeights> monitor_weights;

  void validate() const;
};

/// One sweep. `loss` is evaluated on the sweep-start state with the call's
/// weights; gradient norms are taken before clipping.
struct LogosIteration {
  LossBreakdown loss;
  double grad_max = 0.0;
  double grad_mean = 0.0;
  double step_max = 0.0;   // largest per-node |s' - s|
  double step_mean = 0.0;
  double monitor_grad_max = 0.0;   // same norms under monitor_weights
  double monitor_grad_mean = 0.0;
};

struct LogosTrace {
  std::vector<LogosIteration> iterations;
  std::size_t iterations_run = 0;
  bool converged = false;
};

struct LogosResult {
  std::vector<NodeState> states;
  LogosTrace trace;
  LossBreakdown final_loss;
};

/// Raised when the energy or a gradient becomes non-finite mid-run.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, LogosTrace partial)
      : Error(what), partial_(std::move(partial)) {}
  const LogosTrace& partial_trace() const { return partial_; }

 private:
  LogosTrace partial_;
};

/// Single-node update used by every sweep: target v = s - alpha * eta * g,
/// then either the Delta step toward v (use_delta) or the plain step to v.
/// `g` must already be norm-clipped. Clipping to the Delta bounds is applied
/// when `clip` is set.
StateVector logos_node_update(const StateVector& s, const StateVector& g, double eta,
                              const DeltaParams& dp, const LogosConfig& lc, bool clip = true);

/// Iterative constraint projection. Gradients for a sweep are all taken from
/// the sweep-start state and then applied in ascending node order. Edge
/// weights (and so curvature scales) are refreshed at every sweep. Stops once
/// the sweep-start loss is below tau or after t_max sweeps.
LogosResult logos_project(const SemanticGraph& graph, const ConstraintSet& cs,
                          const LossWeights& weights, const DeltaParams& dp,
                          const LogosConfig& lc);

}  // namespace topoproj
