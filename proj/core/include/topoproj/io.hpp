#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topoproj/cmaes.hpp"
#include "topoproj/logos.hpp"
#include "topoproj/problems.hpp"
#include "topoproj/solver.hpp"

namespace topoproj {

// Instance format:
//   { "n": int, "states": [[64 reals], ...], "anchors": {"id": [64 reals]},
//     "separations": [[a, b, min_dist], ...], "orderings": [[a, b, axis, margin], ...] }
// "seed" is written and read back when present; everything else is ignored.
nlohmann::json instance_to_json(const ProblemInstance& inst);
/// Throws InvalidInput on malformed documents and InvalidConstraint on bad ids.
ProblemInstance instance_from_json(const nlohmann::json& j);

ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& inst, const std::string& path);

nlohmann::json solve_result_to_json(const SolveResult& r, bool include_states = false);

// Fixed CSV schemas; header row first.
//   trace:  step,L_total,L_data,L_phys,L_logic,grad_max,grad_mean
//   logos:  iteration,L_total,L_data,L_phys,L_logic,grad_max,grad_mean
//   cma:    generation,best_fitness,mean_fitness,sigma
void write_trace_csv(std::ostream& os, const std::vector<StepRecord>& trace);
void write_logos_trace_csv(std::ostream& os, const LogosTrace& trace);
void write_cma_history_csv(std::ostream& os, const std::vector<CmaGeneration>& history);

/// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace topoproj
