#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topoproj/solver.hpp"

namespace topoproj {

enum class StudyKind { Seeds, Scaling, Ablation, Trace };

struct StudySpec {
  StudyKind study = StudyKind::Seeds;
  std::vector<std::size_t> sizes{6};
  std::size_t n_seeds = 20;
  std::vector<VariantConfig> variants{VariantConfig::baseline(), VariantConfig::v1(),
                                      VariantConfig::v2()};
  std::size_t budget = 500;
  std::uint64_t master_seed = 0;
  std::string out_dir;     // empty: nothing written
  std::size_t workers = 0; // 0: hardware concurrency

  /// Throws InvalidInput: n_seeds >= 1, sizes non-empty, every n in [2, 64].
  void validate() const;

  static StudySpec seeds_default();
  static StudySpec scaling_default();   // v2, sizes {2,4,6,8,10,12,15,20}
  static StudySpec ablation_default();  // n = 6
  static StudySpec trace_default();     // v2, n = 6, one seed
};

void to_json(nlohmann::json& j, const VariantConfig& v);
void from_json(const nlohmann::json& j, VariantConfig& v);
void to_json(nlohmann::json& j, const StudySpec& s);
void from_json(const nlohmann::json& j, StudySpec& s);

std::string to_string(StudyKind k);
StudyKind study_kind_from_string(const std::string& s);

/// Seeds are splitmix64 mixes of their inputs, so they are stable across
/// builds and platforms:
///   instance_seed = mix(master, n, i)
///   solver_seed   = mix(instance_seed, toggle_mask(variant))
/// Instances do not depend on the variant, so every variant of a study sees
/// the same problems, and `topoproj solve --seed <instance_seed>` replays a
/// study row exactly.
std::uint64_t instance_seed(std::uint64_t master, std::size_t n, std::size_t i);
std::uint64_t solver_seed(std::uint64_t instance_seed, const VariantConfig& v);

struct RunRow {
  std::string variant;
  std::size_t n = 0;
  std::size_t seed_index = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t solver_seed = 0;
  double energy = 0.0;
  std::size_t steps = 0;
  bool success = false;
  bool failed = false;
  double wall_time = 0.0;
  double grad_mean = 0.0;
  double violations = 0.0;
  std::string error;
};

struct Aggregate {
  std::size_t runs = 0;
  std::size_t failed = 0;
  double energy_mean = 0.0;
  double energy_std = 0.0;  // sample standard deviation
  double steps_mean = 0.0;
  double time_mean = 0.0;
  double grad_mean = 0.0;
  double success_rate = 0.0;  // fraction in [0, 1]
  double violations_mean = 0.0;
};

Aggregate aggregate(const std::vector<RunRow>& rows);

/// Solves one (variant, n, seed index) cell. Never throws; errors become a
/// failed row.
RunRow run_cell(const VariantConfig& v, std::size_t n, std::size_t seed_index,
                std::uint64_t master_seed, std::size_t budget,
                const SolverOptions& options = {});

/// Runs every (variant, n, seed) cell concurrently and returns rows in
/// (variant, size, seed) order.
std::vector<RunRow> run_grid(const std::vector<VariantConfig>& variants,
                             const std::vector<std::size_t>& sizes, std::size_t n_seeds,
                             std::uint64_t master_seed, std::size_t budget,
                             std::size_t workers, const SolverOptions& options = {});

struct SeedStudyResult {
  std::vector<RunRow> rows;
  std::map<std::string, Aggregate> summary;
  bool any_failed = false;
};

struct ScalingRow {
  std::size_t n = 0;
  Aggregate agg;
};

struct ScalingStudyResult {
  std::vector<RunRow> rows;
  std::vector<ScalingRow> sizes;
  double time_exponent = 0.0;  // least-squares slope of log(time) on log(n)
  bool any_failed = false;
};

struct AblationRow {
  std::string configuration;
  VariantConfig variant;
  bool subtractive = false;
  Aggregate agg;
  /// Incremental rows: previous mean - this mean (improvement).
  /// Subtractive rows: this mean - full-system mean (degradation).
  double delta_energy = 0.0;
};

struct AblationResult {
  std::vector<RunRow> rows;
  std::vector<AblationRow> table;
  bool any_failed = false;
};

struct TraceResult {
  SolveResult result;
  std::uint64_t instance_seed = 0;
  std::uint64_t solver_seed = 0;
};

/// The seven incremental configurations followed by the three subtractive ones.
std::vector<AblationRow> ablation_configurations();

/// Each study writes its CSV (and `study.json`, the study settings that reproduce
/// it) into spec.out_dir when that is non-empty.
///   seeds.csv:    variant,seed,E_final,steps,success,wall_time
///   scaling.csv:  n,energy_mean,energy_std,steps_mean,time_mean,grad_norm_mean,success_rate,violations_mean
///   ablation.csv: configuration,energy_mean,energy_std,steps_mean,success_rate,grad_norm_mean,delta_energy
///   trace.csv:    step,L_total,L_data,L_phys,L_logic,grad_max,grad_mean
SeedStudyResult run_seed_study(const StudySpec& spec, const SolverOptions& options = {});
ScalingStudyResult run_scaling_study(const StudySpec& spec, const SolverOptions& options = {});
AblationResult run_ablation(const StudySpec& spec, const SolverOptions& options = {});
TraceResult run_trace(const StudySpec& spec, const SolverOptions& options = {});

double growth_exponent(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace topoproj
