#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qflow/config.hpp"
#include "qflow/demands.hpp"
#include "qflow/edge_formulation.hpp"
#include "qflow/error.hpp"
#include "qflow/layering.hpp"
#include "qflow/report.hpp"

namespace qflow {

struct ExtractedPath {
  std::size_t demand = 0;
  // Number of elementary links, i.e. the sub-demand's j.
  std::size_t hops = 0;
  std::vector<EdgeIndex> base_edges;
  // End-to-end EPR pairs per second.
  double rate = 0.0;

  std::vector<NodeIndex> nodes(const NetworkGraph& g) const {
    std::vector<NodeIndex> out;
    if (base_edges.empty()) return out;
    out.push_back(g.edge(base_edges.front()).from);
    for (EdgeIndex e : base_edges) out.push_back(g.edge(e).to);
    return out;
  }

  // Dropping layer indices can revisit a base node.
  bool node_simple(const NetworkGraph& g) const {
    const auto ns = nodes(g);
    return std::set<NodeIndex>(ns.begin(), ns.end()).size() == ns.size();
  }
};

struct PathAssignment {
  std::vector<std::vector<ExtractedPath>> per_demand;

  double demand_rate(std::size_t i) const {
    double r = 0.0;
    for (const auto& p : per_demand.at(i)) r += p.rate;
    return r;
  }

  double total_rate() const {
    double r = 0.0;
    for (std::size_t i = 0; i < per_demand.size(); ++i) r += demand_rate(i);
    return r;
  }

  std::size_t num_paths() const {
    std::size_t n = 0;
    for (const auto& d : per_demand) n += d.size();
    return n;
  }
};

// Depth-first search for an s^0 -> e^j path whose every residual exceeds
// eps. Neighbours are tried in ascending base-node id, so the result is the
// lexicographically smallest such path. Returns layered edge indices.
inline std::optional<std::vector<std::size_t>> find_positive_path(std::span<const double> residual,
                                                                  const LayeredGraph& lg, const SubDemand& sub,
                                                                  double eps) {
  const NetworkGraph& g = lg.base();
  if (sub.hops == 0 || sub.hops > lg.l_max()) return std::nullopt;

  struct Frame {
    NodeIndex node;
    std::size_t next;  // position in g.out_edges(node)
  };
  std::vector<Frame> stack{{sub.source, 0}};
  std::vector<std::size_t> path;
  std::vector<char> dead(lg.num_nodes(), 0);

  while (!stack.empty()) {
    Frame& top = stack.back();
    const std::size_t layer = stack.size() - 1;
    if (layer == sub.hops) {
      if (top.node == sub.sink) return path;
      dead[lg.node_index({top.node, layer})] = 1;
      stack.pop_back();
      if (!path.empty()) path.pop_back();
      continue;
    }
    const auto out = g.out_edges(top.node);
    bool advanced = false;
    while (top.next < out.size()) {
      const EdgeIndex e = out[top.next++];
      const std::size_t le = lg.edge_index(layer, e);
      const NodeIndex to = g.edge(e).to;
      if (residual[le] > eps && !dead[lg.node_index({to, layer + 1})]) {
        path.push_back(le);
        stack.push_back({to, 0});
        advanced = true;
        break;
      }
    }
    if (!advanced) {
      dead[lg.node_index({top.node, layer})] = 1;
      stack.pop_back();
      if (!path.empty()) path.pop_back();
    }
  }
  return std::nullopt;
}

// Called after every allocation with the sub-demand index and the residual
// flow of that sub-demand.
using ExtractionObserver = std::function<void(std::size_t sub_index, std::span<const double> residual)>;

// Repeatedly peels a positive path p off each sub-demand's flow, assigns it
// rate q^{j-1} * min_{e in p} residual(e) and subtracts that minimum along p,
// until the residual leaving s_i^0 is dust (<= eps per outgoing edge).
// Throws NumericalError if significant outflow remains with no positive path.
inline PathAssignment extract_paths(const FlowSolution& f, const LayeredGraph& lg,
                                    const std::vector<SubDemand>& subs, std::size_t num_demands, double q,
                                    const Tolerances& tol, const ExtractionObserver& observer = {}) {
  const NetworkGraph& g = lg.base();
  if (tol.eps <= 0.0) throw InputError("extraction epsilon must be positive");
  std::size_t max_hops = 0;
  for (const auto& s : subs) max_hops = std::max(max_hops, s.hops);
  const auto weight = hop_weights(q, max_hops);
  const double breakdown = tol.feas * static_cast<double>(lg.num_nodes() + 1) +
                           tol.eps * static_cast<double>(lg.num_edges() + 1);

  PathAssignment pa;
  pa.per_demand.resize(num_demands);
  for (std::size_t si = 0; si < subs.size(); ++si) {
    const SubDemand& sub = subs[si];
    if (sub.demand >= num_demands) throw InputError("sub-demand refers to an unknown demand");
    std::vector<double> residual = f.flows.at(si);
    const auto first_hop = g.out_edges(sub.source);

    auto outflow = [&] {
      double s = 0.0;
      for (EdgeIndex e : first_hop) s += residual[lg.edge_index(0, e)];
      return s;
    };

    while (outflow() > tol.eps * static_cast<double>(first_hop.size())) {
      auto path = find_positive_path(residual, lg, sub, tol.eps);
      if (!path) {
        if (outflow() > breakdown) {
          throw NumericalError("path extraction: sub-demand (" + std::to_string(sub.demand) + "," +
                               std::to_string(sub.hops) + ") has outflow " + std::to_string(outflow()) +
                               " but no positive path");
        }
        break;
      }
      double bottleneck = residual[path->front()];
      for (std::size_t le : *path) bottleneck = std::min(bottleneck, residual[le]);
      const double rate = weight[sub.hops] * bottleneck;
      for (std::size_t le : *path) residual[le] -= bottleneck;
      if (observer) observer(si, residual);
      if (rate <= tol.eps * weight[sub.hops]) continue;

      ExtractedPath p;
      p.demand = sub.demand;
      p.hops = sub.hops;
      p.rate = rate;
      for (std::size_t le : *path) p.base_edges.push_back(lg.base_edge(le));
      pa.per_demand[sub.demand].push_back(std::move(p));
    }
  }
  return pa;
}

struct AssignmentReport {
  ValidationReport violations;
  // Informational findings, e.g. paths that revisit a base node.
  std::vector<std::string> notes;
  bool ok() const { return violations.empty(); }
};

// Checks an assignment against the base graph: walks connect s_i to e_i,
// lengths respect l_i, sum_p r_p / q^{|p|-1} fits every capacity, the total
// matches `lp_objective`, and each (i, j) has at most |E||V| paths.
inline AssignmentReport verify_assignment(const PathAssignment& pa, const NetworkGraph& g, const DemandSet& d,
                                          double q, double lp_objective, const Tolerances& tol) {
  AssignmentReport rep;
  if (pa.per_demand.size() != d.size()) {
    rep.violations.push_back({"shape", "assignment covers " + std::to_string(pa.per_demand.size()) +
                                           " demands, expected " + std::to_string(d.size()), 0.0});
    return rep;
  }
  std::vector<double> load(g.num_edges(), 0.0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> per_sub;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = 0; k < pa.per_demand[i].size(); ++k) {
      const auto& p = pa.per_demand[i][k];
      const std::string where = "demand " + std::to_string(i) + " path " + std::to_string(k);
      if (p.base_edges.empty() || p.base_edges.size() != p.hops) {
        rep.violations.push_back({"walk", where + " has inconsistent length", 0.0});
        continue;
      }
      bool walk_ok = g.edge(p.base_edges.front()).from == d[i].source &&
                     g.edge(p.base_edges.back()).to == d[i].destination;
      for (std::size_t s = 1; s < p.base_edges.size(); ++s) {
        walk_ok = walk_ok && g.edge(p.base_edges[s - 1]).to == g.edge(p.base_edges[s]).from;
      }
      if (!walk_ok) rep.violations.push_back({"walk", where + " is not a walk from source to destination", 0.0});
      if (p.hops > d[i].length_bound) {
        rep.violations.push_back({"length", where + " has " + std::to_string(p.hops) + " links, bound " +
                                                std::to_string(d[i].length_bound),
                                  static_cast<double>(d[i].length_bound) - static_cast<double>(p.hops)});
      }
      if (p.rate < 0.0) rep.violations.push_back({"rate", where + " has negative rate", p.rate});
      const double elementary = p.rate / std::pow(q, static_cast<double>(p.hops) - 1.0);
      for (EdgeIndex e : p.base_edges) load[e] += elementary;
      ++per_sub[{i, p.hops}];
      if (!p.node_simple(g)) rep.notes.push_back(where + " revisits a base node");
    }
  }
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const double slack = g.capacity(e) - load[e];
    if (slack < -tol.feas) {
      rep.violations.push_back({"capacity", "edge (" + g.node_id(g.edge(e).from) + "," + g.node_id(g.edge(e).to) + ")",
                                slack});
    }
  }
  const double total = pa.total_rate();
  if (std::abs(total - lp_objective) > tol.objective_slack(lp_objective)) {
    rep.violations.push_back({"objective", "extracted total " + std::to_string(total) + " vs LP objective " +
                                               std::to_string(lp_objective),
                              -std::abs(total - lp_objective)});
  }
  const std::size_t path_cap = g.num_edges() * g.num_nodes();
  for (const auto& [key, count] : per_sub) {
    if (count > path_cap) {
      rep.violations.push_back({"path_count", "demand " + std::to_string(key.first) + " length " +
                                                  std::to_string(key.second) + " has " + std::to_string(count) +
                                                  " paths",
                                static_cast<double>(path_cap) - static_cast<double>(count)});
    }
  }
  return rep;
}

}  // namespace qflow
