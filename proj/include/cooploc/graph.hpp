#pragma once

// Interaction graph between agents. Landmarks are roots with no neighbors;
// each vehicle measures only lower-numbered agents, so the graph is a DAG by
// construction and ascending id is always a valid processing order.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "cooploc/types.hpp"

namespace cooploc {

struct InteractionGraph {
  int n_landmarks = 0;
  int n_vehicles = 0;
  // Ordered neighbor list per agent id (index id-1); landmarks must have none.
  // Order is meaningful: measurement rows and q weights follow it.
  std::vector<std::vector<AgentId>> neighbor_sets;

  int agent_count() const { return n_landmarks + n_vehicles; }
  bool is_landmark(AgentId id) const { return id >= 1 && id <= n_landmarks; }
  bool is_vehicle(AgentId id) const { return id > n_landmarks && id <= agent_count(); }
  const std::vector<AgentId>& neighbors_of(AgentId id) const {
    return neighbor_sets.at(static_cast<std::size_t>(id - 1));
  }
};

struct ValidationReport {
  struct Violation {
    std::string code;
    std::string message;
  };
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string code, std::string message) {
    violations.push_back({std::move(code), std::move(message)});
  }
  std::string joined() const {
    std::string all;
    for (const auto& v : violations) {
      if (!all.empty()) all += "; ";
      all += v.message;
    }
    return all;
  }
};

inline ValidationReport validate_graph(const InteractionGraph& g) {
  ValidationReport report;
  const int n = g.agent_count();
  if (g.n_landmarks < 0 || g.n_vehicles < 0 ||
      g.neighbor_sets.size() != static_cast<std::size_t>(n)) {
    report.add("structure", "neighbor_sets size does not match agent count");
    return report;
  }
  if (g.n_landmarks < 3) {
    report.add("landmark-count", "at least three landmark agents are required (got " +
                                     std::to_string(g.n_landmarks) + ")");
  }
  int roots = 0;
  for (AgentId id = 1; id <= n; ++id) {
    const auto& nbrs = g.neighbors_of(id);
    if (nbrs.empty()) ++roots;
    if (g.is_landmark(id) && !nbrs.empty()) {
      report.add("landmark-neighbors",
                 "landmark " + std::to_string(id) + " must not have neighbors");
    }
    std::vector<AgentId> seen;
    for (AgentId j : nbrs) {
      if (j < 1 || j > n) {
        report.add("neighbor-range", "agent " + std::to_string(id) + " references unknown agent " +
                                         std::to_string(j));
        continue;
      }
      if (j >= id) {
        report.add("forward-edge", "agent " + std::to_string(id) +
                                       " may only measure lower-numbered agents, found " +
                                       std::to_string(j));
      }
      if (std::find(seen.begin(), seen.end(), j) != seen.end()) {
        report.add("duplicate-neighbor", "agent " + std::to_string(id) +
                                             " lists neighbor " + std::to_string(j) + " twice");
      }
      seen.push_back(j);
    }
  }
  if (roots < 3) {
    report.add("root-count",
               "at least three root agents are required (got " + std::to_string(roots) + ")");
  }
  return report;
}

// Kahn's algorithm over the vehicle-vehicle subgraph, smallest id first. For
// validated graphs this is simply ascending vehicle id; cycles (possible only
// in unvalidated input) raise an error.
inline std::vector<AgentId> topological_order(const InteractionGraph& g) {
  const int n = g.agent_count();
  std::vector<int> indegree(static_cast<std::size_t>(n) + 1, 0);
  for (AgentId id = g.n_landmarks + 1; id <= n; ++id) {
    for (AgentId j : g.neighbors_of(id)) {
      if (g.is_vehicle(id) && j >= 1 && j <= n && g.is_vehicle(j)) {
        ++indegree[static_cast<std::size_t>(id)];
      }
    }
  }
  std::vector<AgentId> ready;
  for (AgentId id = g.n_landmarks + 1; id <= n; ++id) {
    if (indegree[static_cast<std::size_t>(id)] == 0) ready.push_back(id);
  }
  std::vector<AgentId> order;
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end());
    const AgentId next = ready.front();
    ready.erase(ready.begin());
    order.push_back(next);
    // Edges point from vehicle id to its neighbors j < id, so completing j
    // releases every vehicle listing it.
    for (AgentId id = g.n_landmarks + 1; id <= n; ++id) {
      if (std::find(order.begin(), order.end(), id) != order.end()) continue;
      const auto& nbrs = g.neighbors_of(id);
      if (std::find(nbrs.begin(), nbrs.end(), next) != nbrs.end()) {
        if (--indegree[static_cast<std::size_t>(id)] == 0) ready.push_back(id);
      }
    }
  }
  if (order.size() != static_cast<std::size_t>(g.n_vehicles)) {
    throw std::invalid_argument("topological_order: vehicle dependencies contain a cycle");
  }
  return order;
}

// Active edges at one instant: for each vehicle, the sensed subsequence of its
// declared neighbor list.
struct TopologySnapshot {
  double t = 0.0;
  // Indexed by vehicle order (id - n_landmarks - 1).
  std::vector<std::vector<AgentId>> active;

  std::uint32_t mask_for(const InteractionGraph& g, AgentId vehicle) const {
    const auto& declared = g.neighbors_of(vehicle);
    const auto& act = active.at(static_cast<std::size_t>(vehicle - g.n_landmarks - 1));
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < declared.size(); ++i) {
      if (std::find(act.begin(), act.end(), declared[i]) != act.end()) {
        mask |= (1u << i);
      }
    }
    return mask;
  }
};

}  // namespace cooploc
