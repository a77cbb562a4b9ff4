#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qflow/config.hpp"
#include "qflow/error.hpp"
#include "qflow/layering.hpp"
#include "qflow/lp.hpp"
#include "qflow/report.hpp"

namespace qflow {

struct EdgeVariable {
  std::size_t sub;
  std::size_t layered_edge;
};

// The edge-based LP together with the meaning of each of its variables.
struct EdgeLp {
  LinearProgram lp;
  std::vector<EdgeVariable> vars;
  std::size_t capacity_rows = 0;
  std::size_t conservation_rows = 0;
};

// q^{j-1} for j = 1..max_hops (index j).
inline std::vector<double> hop_weights(double q, std::size_t max_hops) {
  std::vector<double> w(max_hops + 1, 1.0);
  for (std::size_t j = 2; j <= max_hops; ++j) w[j] = w[j - 1] * q;
  return w;
}

// One flow variable g_ij per (sub-demand, relevant layered edge). The
// objective weights flow leaving s_i^0 by q^{j-1}; each base edge gets a
// capacity row summed over all sub-demands and layers; each sub-demand gets
// a conservation row at every internal layered node it touches.
inline EdgeLp build_edge_lp(const LayeredGraph& lg, const std::vector<SubDemand>& subs, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InputError("swap success probability must lie in (0, 1]");
  const NetworkGraph& g = lg.base();
  EdgeLp out;
  std::size_t max_hops = 0;
  for (const auto& s : subs) max_hops = std::max(max_hops, s.hops);
  const auto weight = hop_weights(q, max_hops);

  std::vector<std::vector<Term>> cap_terms(g.num_edges());
  std::vector<std::vector<Term>> node_terms(lg.num_nodes());
  std::vector<std::size_t> touched;

  for (std::size_t si = 0; si < subs.size(); ++si) {
    const SubDemand& sub = subs[si];
    touched.clear();
    for (std::size_t le : relevant_edges(lg, sub)) {
      const auto tail = lg.tail(le);
      const auto head = lg.head(le);
      const double obj = tail.layer == 0 ? weight[sub.hops] : 0.0;
      const std::size_t var = out.lp.add_variable(
          "g_d" + std::to_string(sub.demand) + "_j" + std::to_string(sub.hops) + "_t" +
              std::to_string(tail.layer) + "_" + g.node_id(tail.base) + "_" + g.node_id(head.base),
          obj);
      out.vars.push_back({si, le});
      cap_terms[lg.base_edge(le)].push_back({var, 1.0});
      for (auto [node, coef] : {std::pair{lg.node_index(tail), -1.0}, std::pair{lg.node_index(head), 1.0}}) {
        if (node_terms[node].empty()) touched.push_back(node);
        node_terms[node].push_back({var, coef});
      }
    }
    std::sort(touched.begin(), touched.end());
    const std::size_t source = lg.node_index({sub.source, 0});
    const std::size_t sink = lg.node_index({sub.sink, sub.hops});
    for (std::size_t node : touched) {
      if (node != source && node != sink) {
        const auto n = lg.node(node);
        out.lp.add_constraint("flow_d" + std::to_string(sub.demand) + "_j" + std::to_string(sub.hops) + "_" +
                                  g.node_id(n.base) + "_l" + std::to_string(n.layer),
                              std::move(node_terms[node]), Relation::kEqual, 0.0);
        ++out.conservation_rows;
      }
      node_terms[node].clear();
    }
  }
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    out.lp.add_constraint("cap_" + g.node_id(ed.from) + "_" + g.node_id(ed.to), std::move(cap_terms[e]),
                          Relation::kLessEqual, ed.capacity);
    ++out.capacity_rows;
  }
  return out;
}

// g_ij values indexed [sub-demand][layered edge]; pruned edges hold 0.
struct FlowSolution {
  std::vector<std::vector<double>> flows;
  double objective = 0.0;
};

// Total rate sum_{i,j} q^{j-1} * (flow leaving s_i^0), accumulated edge by
// edge in (sub-demand, layered edge) order, the same order the LP sums in.
inline double flow_objective(const FlowSolution& f, const LayeredGraph& lg, const std::vector<SubDemand>& subs,
                             double q) {
  const NetworkGraph& g = lg.base();
  std::size_t max_hops = 0;
  for (const auto& s : subs) max_hops = std::max(max_hops, s.hops);
  const auto weight = hop_weights(q, max_hops);
  double total = 0.0;
  for (std::size_t si = 0; si < subs.size(); ++si) {
    for (EdgeIndex e : g.out_edges(subs[si].source)) {
      total += weight[subs[si].hops] * f.flows[si][lg.edge_index(0, e)];
    }
  }
  return total;
}

inline FlowSolution flow_from_solution(const EdgeLp& model, const LpSolution& sol, const LayeredGraph& lg,
                                       const std::vector<SubDemand>& subs, double q) {
  if (sol.status != LpStatus::kOptimal) {
    throw InfeasibleError(std::string("edge LP is ") + to_string(sol.status));
  }
  FlowSolution f;
  f.flows.assign(subs.size(), std::vector<double>(lg.num_edges(), 0.0));
  for (std::size_t v = 0; v < model.vars.size(); ++v) {
    f.flows[model.vars[v].sub][model.vars[v].layered_edge] = sol.values.at(v);
  }
  f.objective = flow_objective(f, lg, subs, q);
  return f;
}

// Checks nonnegativity, base-edge capacities and per-sub-demand conservation
// at every layered node other than s_i^0 and e_i^j.
inline ValidationReport check_flow_feasibility(const FlowSolution& f, const LayeredGraph& lg,
                                               const std::vector<SubDemand>& subs, double tol_feas) {
  const NetworkGraph& g = lg.base();
  ValidationReport report;
  if (f.flows.size() != subs.size()) {
    report.push_back({"shape", "flow has " + std::to_string(f.flows.size()) + " sub-demands, expected " +
                                   std::to_string(subs.size()), 0.0});
    return report;
  }
  std::vector<double> load(g.num_edges(), 0.0);
  for (std::size_t si = 0; si < subs.size(); ++si) {
    const auto& sub = subs[si];
    std::vector<double> balance(lg.num_nodes(), 0.0);
    for (std::size_t le = 0; le < lg.num_edges(); ++le) {
      const double v = f.flows[si][le];
      if (v < -tol_feas) {
        report.push_back({"nonnegativity", "sub (" + std::to_string(sub.demand) + "," + std::to_string(sub.hops) +
                                               ") layered edge " + std::to_string(le), v});
      }
      if (v == 0.0) continue;
      load[lg.base_edge(le)] += v;
      balance[lg.node_index(lg.tail(le))] -= v;
      balance[lg.node_index(lg.head(le))] += v;
    }
    const std::size_t source = lg.node_index({sub.source, 0});
    const std::size_t sink = lg.node_index({sub.sink, sub.hops});
    for (std::size_t node = 0; node < lg.num_nodes(); ++node) {
      if (node == source || node == sink) continue;
      if (std::abs(balance[node]) > tol_feas) {
        const auto n = lg.node(node);
        report.push_back({"conservation", "sub (" + std::to_string(sub.demand) + "," + std::to_string(sub.hops) +
                                              ") node " + g.node_id(n.base) + "^" + std::to_string(n.layer),
                          -std::abs(balance[node])});
      }
    }
  }
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const double slack = g.capacity(e) - load[e];
    if (slack < -tol_feas) {
      report.push_back({"capacity", "edge (" + g.node_id(g.edge(e).from) + "," + g.node_id(g.edge(e).to) + ")", slack});
    }
  }
  return report;
}

}  // namespace qflow
