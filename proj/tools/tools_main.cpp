#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "topoproj/curvature.hpp"
#include "topoproj/errors.hpp"
#include "topoproj/harness.hpp"
#include "topoproj/io.hpp"
#include "topoproj/solver.hpp"

namespace {

using nlohmann::json;
using namespace topoproj;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailedRuns = 2;

struct SolveArgs {
  std::size_t n = 6;
  std::uint64_t seed = 0;
  std::string variant = "v2";
  std::size_t budget = 500;
  std::string instance;
  std::string trace;
  std::string cma_history;
  bool dump_curvature = false;
  bool states = false;
};

struct GenerateArgs {
  std::size_t n = 6;
  std::uint64_t seed = 0;
  std::string out;
};

struct BenchArgs {
  std::string study;
  std::string out;
  std::string spec;
  std::optional<std::size_t> seeds;
  std::vector<std::size_t> sizes;
  std::vector<std::string> variants;
  std::optional<std::uint64_t> master_seed;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> workers;
};

int run_solve(const SolveArgs& a) {
  const VariantConfig variant = VariantConfig::from_name(a.variant);
  const ProblemInstance inst =
      a.instance.empty() ? generate_instance(a.n, a.seed) : load_instance(a.instance);
  // Same derivation as the study harness, so a study row replays here.
  const std::uint64_t seed = solver_seed(a.instance.empty() ? a.seed : inst.seed, variant);
  const SolveResult r = solve(inst, variant, a.budget, seed);

  json out = solve_result_to_json(r, a.states);
  out["variant"] = variant.label;
  out["n"] = inst.n;
  out["instance_seed"] = inst.seed;
  out["solver_seed"] = seed;
  if (a.dump_curvature) {
    const auto states = r.failed ? inst.initial_states : r.final_states;
    out["curvature"] = curvature_step_scales(SemanticGraph::build(states));
  }
  std::cout << out.dump(2) << '\n';

  if (!a.trace.empty()) {
    std::ofstream f(a.trace);
    if (!f) throw InvalidInput("cannot write '" + a.trace + "'");
    write_trace_csv(f, r.trace);
  }
  if (!a.cma_history.empty()) {
    std::ofstream f(a.cma_history);
    if (!f) throw InvalidInput("cannot write '" + a.cma_history + "'");
    write_cma_history_csv(f, r.cma_history);
  }
  return r.failed ? kExitFailedRuns : kExitOk;
}

int run_generate(const GenerateArgs& a) {
  const ProblemInstance inst = generate_instance(a.n, a.seed);
  if (a.out.empty()) {
    std::cout << instance_to_json(inst).dump(2) << '\n';
  } else {
    save_instance(inst, a.out);
  }
  return kExitOk;
}

StudySpec bench_spec(const BenchArgs& a) {
  StudySpec spec;
  if (!a.spec.empty()) {
    std::ifstream in(a.spec);
    if (!in) throw InvalidInput("cannot open study spec '" + a.spec + "'");
    try {
      spec = json::parse(in).get<StudySpec>();
    } catch (const json::exception& e) {
      throw InvalidInput("study spec '" + a.spec + "': " + e.what());
    }
  } else {
    switch (study_kind_from_string(a.study)) {
      case StudyKind::Seeds: spec = StudySpec::seeds_default(); break;
      case StudyKind::Scaling: spec = StudySpec::scaling_default(); break;
      case StudyKind::Ablation: spec = StudySpec::ablation_default(); break;
      case StudyKind::Trace: spec = StudySpec::trace_default(); break;
    }
  }
  if (!a.study.empty()) spec.study = study_kind_from_string(a.study);
  if (a.seeds) spec.n_seeds = *a.seeds;
  if (!a.sizes.empty()) spec.sizes = a.sizes;
  if (!a.variants.empty()) {
    spec.variants.clear();
    for (const auto& v : a.variants) spec.variants.push_back(VariantConfig::from_name(v));
  }
  if (a.master_seed) spec.master_seed = *a.master_seed;
  if (a.budget) spec.budget = *a.budget;
  if (a.workers) spec.workers = *a.workers;
  spec.out_dir = a.out;
  spec.validate();
  return spec;
}

void print_aggregate(const std::string& label, const Aggregate& g) {
  std::printf("%-16s %12.6g %12.6g %9.1f %8.1f%% %10.4g %10.4g\n", label.c_str(), g.energy_mean,
              g.energy_std, g.steps_mean, 100.0 * g.success_rate, g.grad_mean, g.time_mean);
}

void print_header(const char* first) {
  std::printf("%-16s %12s %12s %9s %9s %10s %10s\n", first, "E_mean", "E_std", "steps",
              "success", "grad", "time_s");
}

int run_bench(const BenchArgs& a) {
  const StudySpec spec = bench_spec(a);
  bool failed = false;
  switch (spec.study) {
    case StudyKind::Seeds: {
      const auto r = run_seed_study(spec);
      print_header("variant");
      for (const auto& v : spec.variants) print_aggregate(v.label, r.summary.at(v.label));
      failed = r.any_failed;
      break;
    }
    case StudyKind::Scaling: {
      const auto r = run_scaling_study(spec);
      print_header("n");
      for (const auto& s : r.sizes) print_aggregate(std::to_string(s.n), s.agg);
      std::printf("time exponent %.3f\n", r.time_exponent);
      failed = r.any_failed;
      break;
    }
    case StudyKind::Ablation: {
      const auto r = run_ablation(spec);
      print_header("configuration");
      for (const auto& row : r.table) print_aggregate(row.configuration, row.agg);
      failed = r.any_failed;
      break;
    }
    case StudyKind::Trace: {
      const auto r = run_trace(spec);
      std::printf("instance seed %llu, %zu steps, E_final %.6g\n",
                  static_cast<unsigned long long>(r.instance_seed), r.result.steps,
                  r.result.final_energy);
      failed = r.result.failed;
      break;
    }
  }
  if (!spec.out_dir.empty()) std::printf("wrote %s\n", spec.out_dir.c_str());
  return failed ? kExitFailedRuns : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint projection solver and study harness"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one generated or loaded instance");
  solve_cmd->add_option("--n", sa.n, "Node count for a generated instance")
      ->check(CLI::Range(2, 64));
  solve_cmd->add_option("--seed", sa.seed, "Instance seed");
  solve_cmd->add_option("--variant", sa.variant, "baseline, v1 or v2")
      ->check(CLI::IsMember({"baseline", "v1", "v2"}));
  solve_cmd->add_option("--budget", sa.budget, "Adopted step budget")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--instance", sa.instance, "Instance JSON file")
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--trace", sa.trace, "Write the per-step trace CSV here");
  solve_cmd->add_option("--cma-history", sa.cma_history, "Write the CMA-ES history CSV here");
  solve_cmd->add_flag("--dump-curvature", sa.dump_curvature,
                      "Include edge curvatures and step scales of the final graph");
  solve_cmd->add_flag("--states", sa.states, "Include final states in the output");

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "Write a generated instance as JSON");
  gen_cmd->add_option("--n", ga.n, "Node count")->check(CLI::Range(2, 64));
  gen_cmd->add_option("--seed", ga.seed, "Instance seed");
  gen_cmd->add_option("--out", ga.out, "Output file (stdout if omitted)");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Run a seeded study and write CSVs");
  bench_cmd->add_option("study", ba.study, "seeds, scaling, ablation or trace")
      ->check(CLI::IsMember({"seeds", "scaling", "ablation", "trace"}));
  bench_cmd->add_option("--out", ba.out, "Output directory");
  bench_cmd->add_option("--spec", ba.spec, "Rerun a study.json written by an earlier study")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--seeds", ba.seeds, "Seeds per cell")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--sizes", ba.sizes, "Node counts, comma separated")
      ->delimiter(',')
      ->check(CLI::Range(2, 64));
  bench_cmd->add_option("--variants", ba.variants, "Variants, comma separated")
      ->delimiter(',')
      ->check(CLI::IsMember({"baseline", "v1", "v2"}));
  bench_cmd->add_option("--master-seed", ba.master_seed, "Master seed");
  bench_cmd->add_option("--budget", ba.budget, "Adopted step budget per run")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--workers", ba.workers, "Worker threads (0: all cores)");
  bench_cmd->callback([&] {
    if (ba.study.empty() && ba.spec.empty()) {
      throw CLI::ValidationError("bench", "give a study name or --spec");
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return run_solve(sa);
    if (*gen_cmd) return run_generate(ga);
    return run_bench(ba);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailedRuns;
  }
}
