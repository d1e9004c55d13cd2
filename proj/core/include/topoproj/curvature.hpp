#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topoproj/graph.hpp"

namespace topoproj {

/// Maps mean incident curvature to a per-node step multiplier:
/// eta = clamp(exp(-gamma * kappa_mean), eta_min, eta_max).
struct CurvatureParams {
  double gamma = 0.5;
  double eta_min = 0.25;
  double eta_max = 2.0;
};

struct EdgeCurvature {
  Edge edge;
  double kappa = 0.0;
};

struct CurvatureReport {
  std::vector<EdgeCurvature> per_edge;   // graph edge order
  std::vector<double> per_node_mean;     // 0 for isolated nodes
  std::vector<double> per_node_scale;    // within [eta_min, eta_max]
};

/// Forman-Ricci curvature of edge e:
///   w(e) * (1/deg(u) + 1/deg(v) - sum_{e' ~ e} w(e') / sqrt(deg(u) deg(v)))
/// where e' ranges over edges sharing exactly one endpoint with e.
/// Throws InvalidEdge if e is not in the graph.
double forman_ricci(const SemanticGraph& graph, Edge e);

/// Same as above by edge index; no lookup.
double forman_ricci_at(const SemanticGraph& graph, std::size_t edge_index);

double step_scale(double mean_curvature, const CurvatureParams& params = {});

CurvatureReport curvature_step_scales(const SemanticGraph& graph,
                                      const CurvatureParams& params = {});

void to_json(nlohmann::json& j, const CurvatureReport& report);

}  // namespace topoproj
