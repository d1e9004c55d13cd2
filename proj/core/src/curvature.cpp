#include "topoproj/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "topoproj/errors.hpp"

namespace topoproj {

double forman_ricci_at(const SemanticGraph& graph, std::size_t edge_index) {
  const Edge e = graph.edges()[edge_index];
  const double w = graph.weight(edge_index);
  const auto du = static_cast<double>(graph.degree(e.u));
  const auto dv = static_cast<double>(graph.degree(e.v));
  // In a simple graph the edges adjacent to (u, v) are exactly the other
  // edges at u plus the other edges at v, so the adjacency sum collapses to
  // the two weighted degrees minus e itself twice.
  const double adjacent = (graph.weighted_degree(e.u) - w) + (graph.weighted_degree(e.v) - w);
  return w * (1.0 / du + 1.0 / dv - adjacent / std::sqrt(du * dv));
}

double forman_ricci(const SemanticGraph& graph, Edge e) {
  const auto idx = graph.find_edge(e);
  if (!idx) {
    throw InvalidEdge("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                      ") not in graph");
  }
  return forman_ricci_at(graph, *idx);
}

double step_scale(double mean_curvature, const CurvatureParams& params) {
  return std::clamp(std::exp(-params.gamma * mean_curvature), params.eta_min, params.eta_max);
}

CurvatureReport curvature_step_scales(const SemanticGraph& graph, const CurvatureParams& params) {
  CurvatureReport report;
  const std::size_t m = graph.edge_count();
  report.per_edge.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.per_edge.push_back({graph.edges()[i], forman_ricci_at(graph, i)});
  }

  const std::size_t n = graph.node_count();
  report.per_node_mean.assign(n, 0.0);
  report.per_node_scale.assign(n, 1.0);
  for (NodeId v = 0; v < n; ++v) {
    const auto incident = graph.incident_edges(v);
    if (!incident.empty()) {
      std::vector<double> kappas;
      kappas.reserve(incident.size());
      for (std::size_t ei : incident) kappas.push_back(report.per_edge[ei].kappa);
      std::sort(kappas.begin(), kappas.end());
      double sum = 0.0;
      for (double k : kappas) sum += k;
      report.per_node_mean[v] = sum / static_cast<double>(incident.size());
    }
    report.per_node_scale[v] = step_scale(report.per_node_mean[v], params);
  }
  return report;
}

void to_json(nlohmann::json& j, const CurvatureReport& report) {
  j = nlohmann::json::object();
  auto edges = nlohmann::json::array();
  for (const auto& ec : report.per_edge) {
    edges.push_back({{"u", ec.edge.u}, {"v", ec.edge.v}, {"kappa", ec.kappa}});
  }
  j["edges"] = std::move(edges);
  j["node_mean_curvature"] = report.per_node_mean;
  j["node_step_scale"] = report.per_node_scale;
}

}  // namespace topoproj
