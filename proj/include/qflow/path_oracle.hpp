#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qflow/demands.hpp"
#include "qflow/edge_formulation.hpp"
#include "qflow/error.hpp"
#include "qflow/layering.hpp"
#include "qflow/lp.hpp"
#include "qflow/topology.hpp"

namespace qflow {

using BasePath = std::vector<EdgeIndex>;

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// All node-simple directed paths s -> e with at most `max_len` links, in
// lexicographic order of their node sequences (node index order equals id
// order). Throws EnumerationCapError once more than `cap` paths are found.
inline std::vector<BasePath> enumerate_bounded_paths(const NetworkGraph& g, NodeIndex s, NodeIndex e,
                                                     std::size_t max_len, std::size_t cap = kDefaultEnumerationCap) {
  if (max_len == 0) throw InputError("path length bound must be at least 1");
  std::vector<BasePath> out;
  if (s == e) return out;
  std::vector<char> on_path(g.num_nodes(), 0);
  BasePath current;

  auto dfs = [&](auto&& self, NodeIndex u) -> void {
    for (EdgeIndex edge : g.out_edges(u)) {
      const NodeIndex v = g.edge(edge).to;
      if (on_path[v]) continue;
      current.push_back(edge);
      if (v == e) {
        if (out.size() >= cap) {
          throw EnumerationCapError("path enumeration exceeded cap of " + std::to_string(cap));
        }
        out.push_back(current);
      } else if (current.size() < max_len) {
        on_path[v] = 1;
        self(self, v);
        on_path[v] = 0;
      }
      current.pop_back();
    }
  };
  on_path[s] = 1;
  dfs(dfs, s);
  return out;
}

// Path-based LP: one rate variable per path (group-major order), objective
// sum r_p, and for every base edge sum_{p through it} r_p / q^{|p|-1} <= C.
inline LinearProgram build_path_lp(const std::vector<std::vector<BasePath>>& groups, const NetworkGraph& g,
                                   double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InputError("swap success probability must lie in (0, 1]");
  LinearProgram lp;
  std::vector<std::vector<Term>> rows(g.num_edges());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t k = 0; k < groups[gi].size(); ++k) {
      const auto& path = groups[gi][k];
      const std::size_t var = lp.add_variable("r_" + std::to_string(gi) + "_" + std::to_string(k), 1.0);
      const double inv = 1.0 / std::pow(q, static_cast<double>(path.size()) - 1.0);
      for (EdgeIndex e : path) rows[e].push_back({var, inv});
    }
  }
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    lp.add_constraint("cap_" + g.node_id(ed.from) + "_" + g.node_id(ed.to), std::move(rows[e]),
                      Relation::kLessEqual, ed.capacity);
  }
  return lp;
}

// Candidate paths per demand, length <= l_i (infeasible demands: none).
inline std::vector<std::vector<BasePath>> demand_path_sets(const NetworkGraph& g, const DemandSet& d,
                                                           std::size_t cap = kDefaultEnumerationCap) {
  std::vector<std::vector<BasePath>> groups;
  std::size_t total = 0;
  for (const auto& dem : d.demands()) {
    groups.push_back(dem.feasible() ? enumerate_bounded_paths(g, dem.source, dem.destination, dem.length_bound, cap)
                                    : std::vector<BasePath>{});
    total += groups.back().size();
    if (total > cap) throw EnumerationCapError("path enumeration exceeded cap of " + std::to_string(cap));
  }
  return groups;
}

// Candidate paths per sub-demand (i, j): exactly j links. Groups follow
// decompose_demands order.
inline std::vector<std::vector<BasePath>> sub_demand_path_sets(const NetworkGraph& g, const DemandSet& d,
                                                               std::size_t cap = kDefaultEnumerationCap) {
  std::vector<std::vector<BasePath>> groups;
  const auto per_demand = demand_path_sets(g, d, cap);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 1; j <= d[i].length_bound; ++j) {
      std::vector<BasePath> exact;
      for (const auto& p : per_demand[i]) {
        if (p.size() == j) exact.push_back(p);
      }
      groups.push_back(std::move(exact));
    }
  }
  return groups;
}

inline double solve_path_lp(const LinearProgram& lp) {
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) throw NumericalError(std::string("path LP is ") + to_string(sol.status));
  return sol.objective;
}

// Optimum of the per-demand path LP (paths of length <= l_i).
inline double oracle_optimum(const NetworkGraph& g, const DemandSet& d, double q,
                             std::size_t cap = kDefaultEnumerationCap) {
  return solve_path_lp(build_path_lp(demand_path_sets(g, d, cap), g, q));
}

// Same optimum computed over the per-(i, j) path sets.
inline double layered_oracle_optimum(const NetworkGraph& g, const DemandSet& d, double q,
                                     std::size_t cap = kDefaultEnumerationCap) {
  return solve_path_lp(build_path_lp(sub_demand_path_sets(g, d, cap), g, q));
}

// Maps path rates onto an edge flow: g(u^t, v^{t+1}) for sub-demand (i, j)
// is the sum of r_p / q^{j-1} over paths p in group (i, j) whose t-th link
// is (u, v). `groups` and `rates` follow sub_demand_path_sets order.
inline FlowSolution flow_from_path_rates(const std::vector<std::vector<BasePath>>& groups,
                                         const std::vector<double>& rates, const LayeredGraph& lg,
                                         const std::vector<SubDemand>& subs, double q) {
  if (groups.size() != subs.size()) throw InputError("path groups do not match sub-demands");
  FlowSolution f;
  f.flows.assign(subs.size(), std::vector<double>(lg.num_edges(), 0.0));
  std::size_t var = 0;
  for (std::size_t si = 0; si < subs.size(); ++si) {
    const double inv = 1.0 / std::pow(q, static_cast<double>(subs[si].hops) - 1.0);
    for (const auto& path : groups[si]) {
      for (std::size_t t = 0; t < path.size(); ++t) f.flows[si][lg.edge_index(t, path[t])] += rates.at(var) * inv;
      ++var;
    }
  }
  f.objective = flow_objective(f, lg, subs, q);
  return f;
}

}  // namespace qflow
