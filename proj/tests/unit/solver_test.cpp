#include <gtest/gtest.h>

#include <cmath>

#include "topoproj/errors.hpp"
#include "topoproj/solver.hpp"

namespace topoproj {
namespace {

NodeState at(double x, double y, double z) {
  StateVector s = StateVector::Zero();
  s.head<3>() << x, y, z;
  return NodeState(s);
}

ProblemInstance satisfied_instance() {
  ProblemInstance inst;
  inst.n = 3;
  inst.initial_states = {at(0.1, 0.5, 0.5), at(0.5, 0.5, 0.5), at(0.9, 0.5, 0.5)};
  inst.constraints.anchors.emplace(0, inst.initial_states[0]);
  inst.constraints.separations = {{0, 1, 0.1}, {0, 2, 0.1}, {1, 2, 0.1}};
  inst.constraints.orderings = {{0, 1, 0, 0.0}, {1, 2, 0, 0.0}};
  return inst;
}

VariantConfig no_physics_init(VariantConfig v) {
  v.use_physics_init = false;
  v.name = VariantConfig::Name::Custom;
  return v;
}

bool longest_increase_run_at_most(const std::vector<double>& e, std::size_t limit) {
  std::size_t run = 0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    run = e[i] > e[i - 1] ? run + 1 : 0;
    if (run > limit) return false;
  }
  return true;
}

TEST(VariantConfig, Presets) {
  const auto b = VariantConfig::baseline();
  EXPECT_FALSE(b.use_mse || b.use_grad_clip || b.use_physics_init || b.use_delta ||
               b.use_curvature || b.use_cmaes);
  EXPECT_EQ(b.normalization(), Normalization::SSE);
  const auto v1 = VariantConfig::v1();
  EXPECT_TRUE(v1.use_curvature);
  EXPECT_FALSE(v1.use_mse || v1.use_grad_clip || v1.use_physics_init || v1.use_delta ||
               v1.use_cmaes);
  const auto v2 = VariantConfig::v2();
  EXPECT_TRUE(v2.use_mse && v2.use_grad_clip && v2.use_physics_init && v2.use_delta &&
              v2.use_curvature && v2.use_cmaes);
  EXPECT_EQ(VariantConfig::from_name("v1").label, "v1");
  EXPECT_THROW((void)VariantConfig::from_name("v3"), InvalidInput);
  EXPECT_NE(b.toggle_mask(), v1.toggle_mask());
  EXPECT_NE(v1.toggle_mask(), v2.toggle_mask());
}

TEST(Solve, SatisfiedInstanceSucceedsImmediately) {
  for (const auto& v : {VariantConfig::baseline(), VariantConfig::v1(),
                        no_physics_init(VariantConfig::v2())}) {
    const auto r = solve(satisfied_instance(), v, 500, 1);
    EXPECT_TRUE(r.success) << v.label;
    EXPECT_LE(r.steps, 10u);
    EXPECT_NEAR(r.final_energy, 0.0, 1e-12);
    EXPECT_FALSE(r.failed);
  }
}

TEST(Solve, ZeroBudgetRejected) {
  EXPECT_THROW((void)solve(satisfied_instance(), VariantConfig::v2(), 0, 1), InvalidInput);
}

TEST(Solve, BudgetAndAccounting) {
  for (std::size_t budget : {1u, 15u, 60u}) {
    for (const auto& v : {VariantConfig::baseline(), VariantConfig::v2()}) {
      const auto inst = generate_instance(6, 100 + budget);
      const auto r = solve(inst, v, budget, 7);
      EXPECT_LE(r.steps, budget + 10);
      EXPECT_LE(r.evaluated_steps, budget + 10);
      EXPECT_LE(r.steps, r.evaluated_steps);
      EXPECT_EQ(r.trace.size(), r.steps);
      EXPECT_EQ(r.success, r.final_energy < 2.0);
      EXPECT_EQ(r.adopted_energies.front(), r.initial_energy);
      EXPECT_EQ(r.adopted_energies.back(), r.final_energy);
    }
  }
}

TEST(Solve, GuardLimitsIncreasingRuns) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_instance(6, seed);
    const auto r = solve(inst, VariantConfig::v2(), 300, seed);
    EXPECT_TRUE(longest_increase_run_at_most(r.adopted_energies, 3)) << "seed " << seed;
    if (r.rejected_generations > 0) {
      EXPECT_GE(r.guard_triggers, r.rejected_generations);
    }
  }
}

TEST(Solve, GuardRejectsFourthIncrease) {
  // A step scale this large makes nearly every generation overshoot.
  SolverOptions opt;
  opt.logos.alpha = 5.0;
  opt.logos.grad_clip = 10.0;
  const auto inst = generate_instance(8, 3);
  const auto r = solve(inst, VariantConfig::v2(), 200, 3, opt);
  EXPECT_TRUE(longest_increase_run_at_most(r.adopted_energies, 3));
  if (!r.failed) {
    EXPECT_EQ(r.adopted_energies.size(), r.generations - r.rejected_generations + 1);
  }
}

TEST(Solve, AllTogglesOffMatchesBaselineBitwise) {
  VariantConfig off = VariantConfig::v2();
  off.use_mse = off.use_grad_clip = off.use_physics_init = false;
  off.use_delta = off.use_curvature = off.use_cmaes = false;
  const auto inst = generate_instance(6, 55);
  const auto a = solve(inst, off, 120, 9);
  const auto b = solve(inst, VariantConfig::baseline(), 120, 9);
  EXPECT_EQ(a.final_states, b.final_states);
  EXPECT_EQ(a.final_energy, b.final_energy);
  EXPECT_EQ(a.steps, b.steps);
}

TEST(Solve, SameSeedSameNumerics) {
  const auto inst = generate_instance(7, 12);
  const auto a = solve(inst, VariantConfig::v2(), 200, 4);
  const auto b = solve(inst, VariantConfig::v2(), 200, 4);
  EXPECT_EQ(a.final_states, b.final_states);
  EXPECT_EQ(a.final_energy, b.final_energy);
  EXPECT_EQ(a.adopted_energies, b.adopted_energies);
  ASSERT_EQ(a.cma_history.size(), b.cma_history.size());
  for (std::size_t i = 0; i < a.cma_history.size(); ++i) {
    EXPECT_EQ(a.cma_history[i].sigma, b.cma_history[i].sigma);
  }
}

TEST(Solve, CmaHistoryBestEverIsMonotone) {
  const auto r = solve(generate_instance(6, 21), VariantConfig::v2(), 300, 21);
  ASSERT_FALSE(r.cma_history.empty());
  EXPECT_EQ(r.cma_history.size(), r.generations);
  for (std::size_t i = 1; i < r.cma_history.size(); ++i) {
    EXPECT_LE(r.cma_history[i].best_fitness, r.cma_history[i - 1].best_fitness);
  }
}

TEST(Solve, InfeasiblePhysicsInitRecordedAsFailure) {
  GeneratorConfig cfg;
  cfg.min_sep = 0.9;
  const auto inst = generate_instance(3, 1, cfg);
  const auto r = solve(inst, VariantConfig::v2(), 50, 1);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.success);
  EXPECT_FALSE(r.error.empty());
}

TEST(Solve, ReportsGradientAndViolationMetrics) {
  const auto r = solve(generate_instance(6, 2), VariantConfig::baseline(), 40, 2);
  ASSERT_FALSE(r.trace.empty());
  double max_seen = 0.0;
  for (const auto& row : r.trace) max_seen = std::max(max_seen, row.grad_max);
  EXPECT_EQ(r.grad_max, max_seen);
  EXPECT_GT(r.grad_mean, 0.0);
  EXPECT_GE(r.violations, 0.0);
  EXPECT_GE(r.mean_phi, 0.0);
  EXPECT_GE(r.mean_psi, 0.0);
}

TEST(Solve, InitialStatesFollowVariant) {
  const auto inst = generate_instance(6, 77);
  EXPECT_EQ(initial_states_for(inst, VariantConfig::baseline()), inst.initial_states);
  EXPECT_EQ(initial_states_for(inst, VariantConfig::v2()), physics_aware_states(inst));
}

TEST(JacobianStats, ForcedBetaZeroIsIdentity) {
  JacobianOptions jo;
  jo.forced_beta = 0.0;
  jo.budget = 60;
  const auto st = jacobian_stats(generate_instance(6, 5), VariantConfig::v2(), 5, {}, jo);
  EXPECT_GT(st.samples, 0u);
  EXPECT_NEAR(st.lambda_max_J, 1.0, 1e-6);
  EXPECT_NEAR(st.cond_J, 1.0, 1e-6);
}

TEST(JacobianStats, UpdateMapMatchesHessianForm) {
  // Plain quadratic anchor: the per-node map is (1 - 2 beta alpha eta / N) I.
  ProblemInstance inst;
  inst.n = 2;
  inst.initial_states = {at(0.2, 0.2, 0.2), at(0.8, 0.8, 0.8)};
  inst.constraints.anchors.emplace(0, at(0.4, 0.3, 0.1));
  LogosConfig lc;
  lc.grad_clip.reset();
  DeltaParams dp;
  dp.beta = 1.5;
  Theta theta{{1.0, 10.0, 2.0}, 1.5};
  const auto jac = update_jacobian(inst.initial_states, 0, inst.constraints, theta, lc, dp, 1.0,
                                   1e-6);
  const double diag = 1.0 - 1.5 * lc.alpha * 2.0 / 2.0;
  EXPECT_LE((jac - diag * Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(JacobianStats, ReportsRunStatistics) {
  JacobianOptions jo;
  jo.budget = 80;
  const auto st = jacobian_stats(generate_instance(6, 8), VariantConfig::v2(), 8, {}, jo);
  EXPECT_EQ(st.grad_mean, st.run.grad_mean);
  EXPECT_GE(st.grad_var, 0.0);
  EXPECT_GE(st.step_std, 0.0);
  EXPECT_GE(st.lambda_max_J, 0.0);
  EXPECT_EQ(st.divergence_flag, st.run.diverged || st.run.final_energy > st.run.initial_energy);
  EXPECT_EQ(st.energy_increase_events, st.run.energy_increase_events);
}

}  // namespace
}  // namespace topoproj
