#include "topoproj/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "topoproj/errors.hpp"

namespace topoproj {

namespace {

using nlohmann::json;

json vec_to_json(const StateVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

NodeState state_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != kStateDim) {
    throw InvalidInput(where + ": expected an array of 64 numbers");
  }
  StateVector v;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (!j[i].is_number()) throw InvalidInput(where + ": non-numeric component");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return NodeState(v);
}

NodeId id_from_json(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InvalidInput(where + ": node ids must be non-negative integers");
  }
  return j.get<NodeId>();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json instance_to_json(const ProblemInstance& inst) {
  json j;
  j["n"] = inst.n;
  j["seed"] = inst.seed;
  j["states"] = json::array();
  for (const auto& s : inst.initial_states) j["states"].push_back(vec_to_json(s.values()));
  j["anchors"] = json::object();
  for (const auto& [id, ref] : inst.constraints.anchors) {
    j["anchors"][std::to_string(id)] = vec_to_json(ref.values());
  }
  j["separations"] = json::array();
  for (const auto& c : inst.constraints.separations) {
    j["separations"].push_back({c.a, c.b, c.min_dist});
  }
  j["orderings"] = json::array();
  for (const auto& c : inst.constraints.orderings) {
    j["orderings"].push_back({c.a, c.b, c.axis, c.margin});
  }
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("instance: expected a JSON object");
  for (const char* key : {"n", "states"}) {
    if (!j.contains(key)) throw InvalidInput(std::string("instance: missing '") + key + "'");
  }
  ProblemInstance inst;
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 2) {
    throw InvalidInput("instance: 'n' must be an integer >= 2");
  }
  inst.n = j["n"].get<std::size_t>();
  if (j.contains("seed")) inst.seed = j["seed"].get<std::uint64_t>();

  const json& states = j["states"];
  if (!states.is_array()) throw InvalidInput("instance: 'states' must be an array");
  for (std::size_t i = 0; i < states.size(); ++i) {
    inst.initial_states.push_back(state_from_json(states[i], "states[" + std::to_string(i) + "]"));
  }

  if (j.contains("anchors")) {
    if (!j["anchors"].is_object()) throw InvalidInput("instance: 'anchors' must be an object");
    for (const auto& [key, ref] : j["anchors"].items()) {
      NodeId id = 0;
      const auto res = std::from_chars(key.data(), key.data() + key.size(), id);
      if (res.ec != std::errc() || res.ptr != key.data() + key.size()) {
        throw InvalidInput("instance: anchor key '" + key + "' is not a node id");
      }
      inst.constraints.anchors.emplace(id, state_from_json(ref, "anchors[" + key + "]"));
    }
  }
  if (j.contains("separations")) {
    for (const auto& row : j["separations"]) {
      if (!row.is_array() || row.size() != 3) {
        throw InvalidInput("instance: separations are [a, b, min_dist]");
      }
      inst.constraints.separations.push_back(
          {id_from_json(row[0], "separation"), id_from_json(row[1], "separation"),
           row[2].get<double>()});
    }
  }
  if (j.contains("orderings")) {
    for (const auto& row : j["orderings"]) {
      if (!row.is_array() || row.size() != 4) {
        throw InvalidInput("instance: orderings are [a, b, axis, margin]");
      }
      inst.constraints.orderings.push_back({id_from_json(row[0], "ordering"),
                                            id_from_json(row[1], "ordering"),
                                            id_from_json(row[2], "ordering axis"),
                                            row[3].get<double>()});
    }
  }
  inst.validate();
  return inst;
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open instance file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInput("instance file '" + path + "': " + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write instance file '" + path + "'");
  out << instance_to_json(inst).dump(2) << '\n';
}

json solve_result_to_json(const SolveResult& r, bool include_states) {
  json j;
  j["final_energy"] = r.final_energy;
  j["final_energy_mse"] = r.final_energy_mse;
  j["initial_energy"] = r.initial_energy;
  j["loss"] = {{"data", r.final_loss.data},
               {"phys", r.final_loss.phys},
               {"logic", r.final_loss.logic},
               {"normalization", r.final_loss.norm == Normalization::MSE ? "mse" : "sse"}};
  j["steps"] = r.steps;
  j["evaluated_steps"] = r.evaluated_steps;
  j["generations"] = r.generations;
  j["wall_time"] = r.wall_time;
  j["success"] = r.success;
  j["failed"] = r.failed;
  j["diverged"] = r.diverged;
  if (!r.error.empty()) j["error"] = r.error;
  j["grad_max"] = r.grad_max;
  j["grad_mean"] = r.grad_mean;
  j["violations"] = {{"mean_phi", r.mean_phi}, {"mean_psi", r.mean_psi}, {"mean", r.violations}};
  j["energy_increase_events"] = r.energy_increase_events;
  j["guard_triggers"] = r.guard_triggers;
  j["theta"] = {{"lambda_data", r.final_theta.weights.data},
                {"lambda_phys", r.final_theta.weights.phys},
                {"lambda_logic", r.final_theta.weights.logic},
                {"beta", r.final_theta.beta}};
  if (include_states) {
    j["states"] = json::array();
    for (const auto& s : r.final_states) j["states"].push_back(vec_to_json(s.values()));
  }
  return j;
}

void write_trace_csv(std::ostream& os, const std::vector<StepRecord>& trace) {
  os << "step,L_total,L_data,L_phys,L_logic,grad_max,grad_mean\n";
  for (const auto& row : trace) {
    os << row.step << ',' << format_double(row.loss.total) << ',' << format_double(row.loss.data)
       << ',' << format_double(row.loss.phys) << ',' << format_double(row.loss.logic) << ','
       << format_double(row.grad_max) << ',' << format_double(row.grad_mean) << '\n';
  }
}

void write_logos_trace_csv(std::ostream& os, const LogosTrace& trace) {
  os << "iteration,L_total,L_data,L_phys,L_logic,grad_max,grad_mean\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    os << i << ',' << format_double(it.loss.total) << ',' << format_double(it.loss.data) << ','
       << format_double(it.loss.phys) << ',' << format_double(it.loss.logic) << ','
       << format_double(it.grad_max) << ',' << format_double(it.grad_mean) << '\n';
  }
}

void write_cma_history_csv(std::ostream& os, const std::vector<CmaGeneration>& history) {
  os << "generation,best_fitness,mean_fitness,sigma\n";
  for (const auto& g : history) {
    os << g.generation << ',' << format_double(g.best_fitness) << ','
       << format_double(g.mean_fitness) << ',' << format_double(g.sigma) << '\n';
  }
}

}  // namespace topoproj
