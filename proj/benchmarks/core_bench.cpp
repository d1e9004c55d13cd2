#include <random>

#include <benchmark/benchmark.h>

#include "topoproj/cmaes.hpp"
#include "topoproj/curvature.hpp"
#include "topoproj/delta.hpp"
#include "topoproj/logos.hpp"
#include "topoproj/problems.hpp"
#include "topoproj/solver.hpp"

namespace {

using namespace topoproj;

StateVector random_vector(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StateVector v;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
  return v;
}

void BM_GraphBuild(benchmark::State& state) {
  const auto inst = generate_instance(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SemanticGraph::build(inst.initial_states));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GraphBuild)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_CurvatureStepScales(benchmark::State& state) {
  const auto inst = generate_instance(static_cast<std::size_t>(state.range(0)), 2);
  const auto g = SemanticGraph::build(inst.initial_states);
  for (auto _ : state) {
    benchmark::DoNotOptimize(curvature_step_scales(g));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CurvatureStepScales)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_LossGradient(benchmark::State& state) {
  const auto inst = generate_instance(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        loss_gradient(inst.initial_states, inst.constraints, {}, Normalization::MSE));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LossGradient)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_DeltaStep(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const StateVector x = random_vector(rng), g = random_vector(rng), v = random_vector(rng);
  const DeltaParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(delta_step(x, g, v, p));
  }
}
BENCHMARK(BM_DeltaStep);

void BM_LogosProject(benchmark::State& state) {
  const auto inst = generate_instance(static_cast<std::size_t>(state.range(0)), 5);
  const auto g = SemanticGraph::build(physics_aware_states(inst));
  for (auto _ : state) {
    benchmark::DoNotOptimize(logos_project(g, inst.constraints, {}, DeltaParams{}, LogosConfig{}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LogosProject)->DenseRange(4, 20, 8)->Complexity();

void BM_CmaAskTell(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  CmaState st = cma_init(d, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)), 0.3);
  std::mt19937_64 rng(6);
  for (auto _ : state) {
    const auto xs = cma_ask(st, rng);
    std::vector<double> f;
    f.reserve(xs.size());
    for (const auto& x : xs) f.push_back(x.squaredNorm());
    st = cma_tell(std::move(st), xs, f);
    if (st.sigma < 1e-12) st = cma_init(d, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)), 0.3);
  }
}
BENCHMARK(BM_CmaAskTell)->Arg(4)->Arg(16)->Arg(64);

void BM_Solve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto inst = generate_instance(n, 7);
  const VariantConfig v = state.range(1) ? VariantConfig::v2() : VariantConfig::baseline();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(inst, v, 200, 7));
  }
  state.SetLabel(v.label);
}
BENCHMARK(BM_Solve)->ArgsProduct({{6, 12, 20}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
