#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topoproj/cmaes.hpp"
#include "topoproj/constraints.hpp"
#include "topoproj/logos.hpp"
#include "topoproj/problems.hpp"

namespace topoproj {

/// Ablation axes. Named presets:
///   baseline  everything off (plain gradient steps, SSE, uniform init)
///   v1        curvature only
///   v2        everything on
struct VariantConfig {
  enum class Name { Baseline, V1, V2, Custom };

  Name name = Name::Custom;
  std::string label = "custom";
  bool use_mse = false;
  bool use_grad_clip = false;
  bool use_physics_init = false;
  bool use_delta = false;
  bool use_curvature = false;
  bool use_cmaes = false;

  static VariantConfig baseline();
  static VariantConfig v1();
  static VariantConfig v2();
  /// "baseline", "v1" or "v2"; throws InvalidInput otherwise.
  static VariantConfig from_name(std::string_view name);

  /// Bit per toggle in declaration order; used for seed derivation so that
  /// identically configured variants share random streams.
  std::uint32_t toggle_mask() const;
  Normalization normalization() const {
    return use_mse ? Normalization::MSE : Normalization::SSE;
  }
};

struct SolverOptions {
  /// alpha, tau, t_max, the clip threshold, curvature params. The variant's
  /// toggles override use_delta / use_curvature / norm / grad_clip.
  LogosConfig logos;
  DeltaParams delta;
  Topology topology = Topology::complete();
  /// Weights of the reported energy and of the CMA-ES fitness. Candidate
  /// weights only steer the projection.
  LossWeights eval_weights{1.0, 10.0, 2.0};
  /// Fixed hyperparameters without CMA-ES, initial CMA-ES mean with it.
  Theta initial_theta{{1.0, 10.0, 2.0}, 0.8};
  double sigma0 = 0.3;
  /// Stop once energy < kSuccessEnergy * deep_convergence_factor.
  double deep_convergence_factor = 1e-3;
  /// Consecutive adopted-energy increases tolerated before the guard halves
  /// sigma; a further increase is not adopted.
  std::size_t guard_window = 3;
  /// Overrides every candidate's beta.
  std::optional<double> forced_beta;
  bool record_snapshots = false;
};

/// One projection sweep on the adopted path. Components are unweighted;
/// `total` uses the evaluation weights.
struct StepRecord {
  std::size_t step = 0;
  LossBreakdown loss;
  double grad_max = 0.0;
  double grad_mean = 0.0;
  double step_max = 0.0;
  double step_mean = 0.0;
};

/// State and hyperparameters at the start of an adopted generation.
struct Snapshot {
  std::vector<NodeState> states;
  Theta theta;
};

struct SolveResult {
  std::vector<NodeState> final_states;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  LossBreakdown final_loss;   // evaluation weights, variant normalization
  double final_energy_mse = 0.0;  // evaluation weights, MSE regardless of variant

  std::size_t steps = 0;            // adopted sweeps == trace.size()
  std::size_t evaluated_steps = 0;  // adopted plus guard-rejected sweeps
  std::size_t generations = 0;
  double wall_time = 0.0;

  bool success = false;
  bool failed = false;     // the run ended on an error
  bool diverged = false;   // a projection produced a non-finite energy
  std::string error;

  std::vector<StepRecord> trace;
  std::vector<CmaGeneration> cma_history;
  std::vector<double> adopted_energies;  // starts with the initial energy
  std::size_t energy_increase_events = 0;
  std::size_t guard_triggers = 0;
  std::size_t rejected_generations = 0;
  std::size_t divergent_candidates = 0;

  double mean_phi = 0.0;
  double mean_psi = 0.0;
  double violations = 0.0;  // mean over all inequality constraints
  double grad_max = 0.0;
  double grad_mean = 0.0;

  Theta final_theta;
  std::vector<Snapshot> snapshots;
};

/// Outer loop. With CMA-ES each generation projects a clone of the current
/// states once per candidate, scores it by the evaluation energy and adopts
/// the best; without it the fixed hyperparameters are projected repeatedly.
/// Stops on deep convergence, energy < tau, or once `budget` sweeps have been
/// spent. Errors are recorded in the result, never thrown, except for an
/// invalid instance or budget == 0 (InvalidInput).
SolveResult solve(const ProblemInstance& inst, const VariantConfig& variant, std::size_t budget,
                  std::uint64_t seed, const SolverOptions& options = {});

/// Initial states the variant starts from.
std::vector<NodeState> initial_states_for(const ProblemInstance& inst,
                                          const VariantConfig& variant);

struct JacobianStats {
  double grad_max = 0.0;
  double grad_mean = 0.0;
  double grad_var = 0.0;
  double lambda_max_J = 0.0;  // largest eigenvalue of sym(J)
  double cond_J = 0.0;        // max |eig| / min |eig| of sym(J)
  double step_std = 0.0;
  bool divergence_flag = false;  // divergence error or final energy above initial
  std::size_t energy_increase_events = 0;
  std::size_t samples = 0;
  SolveResult run;
};

struct JacobianOptions {
  std::size_t budget = 500;
  std::size_t samples = 5;
  double fd_step = 1e-6;
  std::optional<double> forced_beta;
};

/// Solves while recording gradient and step statistics, then probes the
/// per-node update map (other nodes and curvature scales frozen, no clip) by
/// central differences at `samples` evenly spaced adopted generations. The
/// eigen statistics are maxima over samples and nodes.
JacobianStats jacobian_stats(const ProblemInstance& inst, const VariantConfig& variant,
                             std::uint64_t seed, const SolverOptions& options = {},
                             const JacobianOptions& jopts = {});

/// Finite-difference Jacobian of the update of `node` at `states`.
Eigen::MatrixXd update_jacobian(const std::vector<NodeState>& states, NodeId node,
                                const ConstraintSet& cs, const Theta& theta,
                                const LogosConfig& lc, const DeltaParams& dp, double eta,
                                double fd_step);

}  // namespace topoproj
