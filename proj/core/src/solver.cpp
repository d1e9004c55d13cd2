#include "topoproj/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace topoproj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LogosConfig logos_for(const VariantConfig& vc, const SolverOptions& opt) {
  LogosConfig lc = opt.logos;
  lc.use_delta = vc.use_delta;
  lc.use_curvature = vc.use_curvature;
  lc.norm = vc.normalization();
  if (!vc.use_grad_clip) {
    lc.grad_clip.reset();
  } else if (!lc.grad_clip) {
    lc.grad_clip = 1.0;
  }
  lc.monitor_weights = opt.eval_weights;
  return lc;
}

struct Candidate {
  std::optional<LogosResult> result;
  double energy = kInf;
};

void finish_metrics(SolveResult& r, const ConstraintSet& cs) {
  double phi_sum = 0.0;
  double psi_sum = 0.0;
  for (const auto& c : cs.separations) phi_sum += penetration_depth(r.final_states, c);
  for (const auto& c : cs.orderings) psi_sum += ordering_violation(r.final_states, c);
  const std::size_t np = cs.separations.size();
  const std::size_t nl = cs.orderings.size();
  r.mean_phi = np ? phi_sum / static_cast<double>(np) : 0.0;
  r.mean_psi = nl ? psi_sum / static_cast<double>(nl) : 0.0;
  r.violations = (np + nl) ? (phi_sum + psi_sum) / static_cast<double>(np + nl) : 0.0;

  r.grad_max = 0.0;
  double sum = 0.0;
  for (const auto& row : r.trace) {
    r.grad_max = std::max(r.grad_max, row.grad_max);
    sum += row.grad_mean;
  }
  r.grad_mean = r.trace.empty() ? 0.0 : sum / static_cast<double>(r.trace.size());
}

}  // namespace

VariantConfig VariantConfig::baseline() {
  VariantConfig vc;
  vc.name = Name::Baseline;
  vc.label = "baseline";
  return vc;
}

VariantConfig VariantConfig::v1() {
  VariantConfig vc;
  vc.name = Name::V1;
  vc.label = "v1";
  vc.use_curvature = true;
  return vc;
}

VariantConfig VariantConfig::v2() {
  VariantConfig vc;
  vc.name = Name::V2;
  vc.label = "v2";
  vc.use_mse = vc.use_grad_clip = vc.use_physics_init = true;
  vc.use_delta = vc.use_curvature = vc.use_cmaes = true;
  return vc;
}

VariantConfig VariantConfig::from_name(std::string_view name) {
  if (name == "baseline") return baseline();
  if (name == "v1") return v1();
  if (name == "v2") return v2();
  throw InvalidInput("unknown variant '" + std::string(name) + "' (expected baseline, v1, v2)");
}

std::uint32_t VariantConfig::toggle_mask() const {
  std::uint32_t m = 0;
  const bool bits[] = {use_mse, use_grad_clip, use_physics_init,
                       use_delta, use_curvature, use_cmaes};
  for (std::uint32_t i = 0; i < 6; ++i)
    if (bits[i]) m |= 1u << i;
  return m;
}

std::vector<NodeState> initial_states_for(const ProblemInstance& inst,
                                          const VariantConfig& variant) {
  if (variant.use_physics_init && inst.config.init_mode != InitMode::PhysicsAware) {
    return physics_aware_states(inst);
  }
  return inst.initial_states;
}

SolveResult solve(const ProblemInstance& inst, const VariantConfig& variant, std::size_t budget,
                  std::uint64_t seed, const SolverOptions& options) {
  if (budget < 1) throw InvalidInput("solve: budget must be at least 1");
  inst.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const ConstraintSet& cs = inst.constraints;
  const LogosConfig lc = logos_for(variant, options);
  const Normalization norm = lc.norm;
  const double deep = kSuccessEnergy * options.deep_convergence_factor;
  auto energy_of = [&](const std::vector<NodeState>& s) {
    return total_energy(s, cs, options.eval_weights, norm);
  };

  SolveResult r;
  std::vector<NodeState> states;
  try {
    states = initial_states_for(inst, variant);
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.what();
    states = inst.initial_states;
  }
  double energy = energy_of(states);
  r.initial_energy = energy;
  r.adopted_energies.push_back(energy);
  r.final_theta = options.initial_theta;

  std::mt19937_64 rng(seed);
  std::optional<CmaState> cma;
  if (variant.use_cmaes) {
    cma = cma_init(kThetaDim, encode_theta(options.initial_theta), options.sigma0);
  }

  std::size_t streak = 0;
  while (!r.failed && r.evaluated_steps < budget && energy >= deep && energy >= lc.tau) {
    std::vector<Eigen::VectorXd> raw;
    std::vector<Theta> thetas;
    if (cma) {
      raw = cma_ask(*cma, rng);
      for (const auto& x : raw) thetas.push_back(decode_theta(x));
    } else {
      thetas.push_back(options.initial_theta);
    }

    const SemanticGraph graph = SemanticGraph::build(states, options.topology);
    std::vector<Candidate> cands(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      DeltaParams dp = options.delta;
      dp.beta = options.forced_beta.value_or(thetas[i].beta);
      try {
        cands[i].result = logos_project(graph, cs, thetas[i].weights, dp, lc);
        cands[i].energy = energy_of(cands[i].result->states);
        if (!std::isfinite(cands[i].energy)) throw DivergenceError("non-finite energy", {});
      } catch (const DivergenceError& e) {
        cands[i].result.reset();
        cands[i].energy = kInf;
        ++r.divergent_candidates;
        r.diverged = true;
      }
    }
    ++r.generations;

    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
      if (cands[i].energy < cands[best].energy) best = i;

    if (cma) {
      std::vector<double> f(cands.size());
      for (std::size_t i = 0; i < cands.size(); ++i) f[i] = cands[i].energy;
      const double sigma_before = cma->sigma;
      const double mean_f = [&] {
        double s = 0.0;
        std::size_t k = 0;
        for (double v : f)
          if (std::isfinite(v)) s += v, ++k;
        return k ? s / static_cast<double>(k) : kInf;
      }();
      *cma = cma_tell(std::move(*cma), raw, f);
      const double best_ever = std::min(
          cands[best].energy, r.cma_history.empty() ? kInf : r.cma_history.back().best_fitness);
      r.cma_history.push_back(
          {r.generations - 1, best_ever, cands[best].energy, mean_f, sigma_before});
    }

    if (!cands[best].result) {
      r.failed = true;
      r.error = "every candidate diverged in generation " + std::to_string(r.generations);
      break;
    }

    const LogosResult& chosen = *cands[best].result;
    const double next_energy = cands[best].energy;
    const bool increased = next_energy > energy;
    streak = increased ? streak + 1 : 0;
    if (streak > options.guard_window) {
      // Keep the current states; the sweeps still count against the budget.
      streak = options.guard_window;
      if (cma) cma->sigma *= 0.5;
      ++r.guard_triggers;
      ++r.rejected_generations;
      r.evaluated_steps += chosen.trace.iterations_run;
      continue;
    }
    if (streak == options.guard_window && increased) {
      if (cma) cma->sigma *= 0.5;
      ++r.guard_triggers;
    }

    if (options.record_snapshots) {
      Theta t = thetas[best];
      if (options.forced_beta) t.beta = *options.forced_beta;
      r.snapshots.push_back({states, t});
    }
    for (const auto& it : chosen.trace.iterations) {
      StepRecord row;
      row.step = r.steps++;
      row.loss = it.loss;
      row.loss.total = it.loss.weighted(options.eval_weights);
      row.grad_max = it.monitor_grad_max;
      row.grad_mean = it.monitor_grad_mean;
      row.step_max = it.step_max;
      row.step_mean = it.step_mean;
      r.trace.push_back(row);
    }
    r.evaluated_steps += chosen.trace.iterations_run;
    if (increased) ++r.energy_increase_events;
    states = chosen.states;
    energy = next_energy;
    r.adopted_energies.push_back(energy);
    r.final_theta = thetas[best];
  }

  r.final_states = std::move(states);
  r.final_loss = weighted_loss(r.final_states, cs, options.eval_weights, norm);
  r.final_energy = r.final_loss.total;
  r.final_energy_mse = total_energy(r.final_states, cs, options.eval_weights, Normalization::MSE);
  r.success = !r.failed && is_success(r.final_energy);
  finish_metrics(r, cs);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Eigen::MatrixXd update_jacobian(const std::vector<NodeState>& states, NodeId node,
                                const ConstraintSet& cs, const Theta& theta,
                                const LogosConfig& lc, const DeltaParams& dp, double eta,
                                double fd_step) {
  std::vector<NodeState> probe = states;
  auto update = [&](const StateVector& x) -> StateVector {
    probe[node] = NodeState(x);
    StateVector g = loss_gradient(probe, cs, theta.weights, lc.norm)[node];
    const double gnorm = g.norm();
    if (gnorm < dp.epsilon) return x;
    if (lc.grad_clip && gnorm > *lc.grad_clip) g *= *lc.grad_clip / gnorm;
    return logos_node_update(x, g, eta, dp, lc, /*clip=*/false);
  };

  const StateVector x0 = states[node].values();
  const auto d = static_cast<Eigen::Index>(kStateDim);
  Eigen::MatrixXd jac(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    StateVector plus = x0;
    StateVector minus = x0;
    plus[j] += fd_step;
    minus[j] -= fd_step;
    jac.col(j) = (update(plus) - update(minus)) / (2.0 * fd_step);
  }
  return jac;
}

JacobianStats jacobian_stats(const ProblemInstance& inst, const VariantConfig& variant,
                             std::uint64_t seed, const SolverOptions& options,
                             const JacobianOptions& jopts) {
  SolverOptions opt = options;
  opt.record_snapshots = true;
  if (jopts.forced_beta) opt.forced_beta = jopts.forced_beta;

  JacobianStats st;
  st.run = solve(inst, variant, jopts.budget, seed, opt);
  const SolveResult& r = st.run;

  std::vector<double> gm;
  std::vector<double> steps;
  for (const auto& row : r.trace) {
    st.grad_max = std::max(st.grad_max, row.grad_max);
    gm.push_back(row.grad_mean);
    steps.push_back(row.step_mean);
  }
  auto mean_var = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {0.0, 0.0};
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, s / static_cast<double>(v.size())};
  };
  std::tie(st.grad_mean, st.grad_var) = mean_var(gm);
  st.step_std = std::sqrt(mean_var(steps).second);
  st.divergence_flag = r.diverged || r.final_energy > r.initial_energy;
  st.energy_increase_events = r.energy_increase_events;

  const LogosConfig lc = logos_for(variant, opt);
  const std::size_t count = r.snapshots.size();
  const std::size_t samples = std::min(jopts.samples, count);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t idx = samples == 1 ? 0 : s * (count - 1) / (samples - 1);
    const Snapshot& snap = r.snapshots[idx];
    DeltaParams dp = opt.delta;
    dp.beta = snap.theta.beta;

    std::vector<double> eta(snap.states.size(), 1.0);
    if (lc.use_curvature) {
      eta = curvature_step_scales(SemanticGraph::build(snap.states, opt.topology), lc.curvature)
                .per_node_scale;
    }
    for (NodeId v = 0; v < snap.states.size(); ++v) {
      const Eigen::MatrixXd jac = update_jacobian(snap.states, v, inst.constraints, snap.theta,
                                                  lc, dp, eta[v], jopts.fd_step);
      const Eigen::MatrixXd sym = 0.5 * (jac + jac.transpose());
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues();
      const double lo = ev.cwiseAbs().minCoeff();
      const double hi = ev.cwiseAbs().maxCoeff();
      st.lambda_max_J = std::max(st.lambda_max_J, ev.maxCoeff());
      st.cond_J = std::max(st.cond_J, lo > 0.0 ? hi / lo : kInf);
    }
    ++st.samples;
  }
  return st;
}

}  // namespace topoproj
