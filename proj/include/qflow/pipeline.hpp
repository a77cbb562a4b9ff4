#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/config.hpp"
#include "qflow/demands.hpp"
#include "qflow/edge_formulation.hpp"
#include "qflow/error.hpp"
#include "qflow/fidelity.hpp"
#include "qflow/layering.hpp"
#include "qflow/lp.hpp"
#include "qflow/path_extraction.hpp"
#include "qflow/protocol_sim.hpp"
#include "qflow/topology.hpp"

namespace qflow {

inline constexpr const char* kVersion = "0.1.0";

// Rounds to 12 significant digits; the JSON writer then prints the shortest
// representation, which is exactly those digits.
inline double sig12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

struct RunInfo {
  std::string command;
  std::uint64_t seed = 0;
  Tolerances tol;
};

inline nlohmann::json document_header(const RunInfo& info) {
  return {{"tool", "qflow"},
          {"version", kVersion},
          {"command", info.command},
          {"seed", info.seed},
          {"tolerances", {{"feas", info.tol.feas}, {"obj", info.tol.obj}, {"eps", info.tol.eps}}}};
}

// Everything produced by reduce -> layer -> build -> solve.
struct SolveResult {
  NetworkGraph graph;
  DemandSet demands;
  LayeredGraph layered;
  std::vector<SubDemand> subs;
  EdgeLp model;
  LpSolution lp;
  FlowSolution flow;
};

inline SimplexOptions simplex_options(const Tolerances& tol) {
  SimplexOptions opt;
  opt.tol_feas = tol.feas;
  opt.tol_obj = tol.obj;
  return opt;
}

inline SolveResult solve_instance(const NetworkGraph& g, const std::vector<DemandSpec>& specs,
                                  const Tolerances& tol) {
  DemandSet demands = reduce_demands(specs, g);
  LayeredGraph lg = build_layered_graph(g, demands);
  auto subs = decompose_demands(demands);
  EdgeLp model = build_edge_lp(lg, subs, g.swap_success());
  LpSolution lp = solve_lp(model.lp, simplex_options(tol));
  FlowSolution flow = flow_from_solution(model, lp, lg, subs, g.swap_success());
  return {g, std::move(demands), std::move(lg), std::move(subs), std::move(model), std::move(lp), std::move(flow)};
}

inline PathAssignment extract_instance(const SolveResult& r, const Tolerances& tol) {
  return extract_paths(r.flow, r.layered, r.subs, r.demands.size(), r.graph.swap_success(), tol);
}

// Rate delivered to each demand by the edge flow.
inline std::vector<double> demand_rates(const FlowSolution& f, const LayeredGraph& lg,
                                        const std::vector<SubDemand>& subs, std::size_t num_demands, double q) {
  std::vector<double> rates(num_demands, 0.0);
  for (std::size_t si = 0; si < subs.size(); ++si) {
    const double w = std::pow(q, static_cast<double>(subs[si].hops) - 1.0);
    for (EdgeIndex e : lg.base().out_edges(subs[si].source)) rates[subs[si].demand] += w * f.flows[si][lg.edge_index(0, e)];
  }
  return rates;
}

inline nlohmann::json demand_json(const NetworkGraph& g, const DemandSet& d, std::size_t i) {
  const Demand& dem = d[i];
  nlohmann::json j = {{"index", i},
                      {"source", g.node_id(dem.source)},
                      {"destination", g.node_id(dem.destination)},
                      {"length_bound", dem.length_bound},
                      {"feasible", dem.feasible()}};
  j["target_fidelity"] = dem.target_fidelity ? nlohmann::json(*dem.target_fidelity) : nlohmann::json(nullptr);
  return j;
}

// Flow document: totals, per-demand rates and the nonzero g_ij entries as
// (i, j, u, t, v, value) rows.
inline nlohmann::json solution_document(const SolveResult& r, const RunInfo& info) {
  const NetworkGraph& g = r.graph;
  nlohmann::json doc;
  doc["header"] = document_header(info);
  doc["lp"] = {{"status", to_string(r.lp.status)},
               {"objective", sig12(r.lp.objective)},
               {"variables", r.model.lp.num_variables()},
               {"constraints", r.model.lp.num_constraints()},
               {"iterations", r.lp.iterations}};
  doc["total_rate"] = sig12(r.flow.objective);
  const auto rates = demand_rates(r.flow, r.layered, r.subs, r.demands.size(), g.swap_success());
  doc["demands"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.demands.size(); ++i) {
    auto j = demand_json(g, r.demands, i);
    j["rate"] = sig12(rates[i]);
    doc["demands"].push_back(std::move(j));
  }
  doc["flows"] = nlohmann::json::array();
  for (std::size_t si = 0; si < r.subs.size(); ++si) {
    for (std::size_t le = 0; le < r.layered.num_edges(); ++le) {
      const double v = r.flow.flows[si][le];
      if (v == 0.0) continue;
      const auto tail = r.layered.tail(le);
      doc["flows"].push_back({{"i", r.subs[si].demand},
                              {"j", r.subs[si].hops},
                              {"u", g.node_id(tail.base)},
                              {"t", tail.layer},
                              {"v", g.node_id(r.layered.head(le).base)},
                              {"value", sig12(v)}});
    }
  }
  return doc;
}

// Rebuilds a FlowSolution from a solution document for the given instance.
inline FlowSolution flow_from_document(const nlohmann::json& doc, const LayeredGraph& lg,
                                       const std::vector<SubDemand>& subs, double q) {
  const NetworkGraph& g = lg.base();
  if (!doc.contains("flows") || !doc.at("flows").is_array()) throw InputError("solution document has no flows");
  FlowSolution f;
  f.flows.assign(subs.size(), std::vector<double>(lg.num_edges(), 0.0));
  for (const auto& row : doc.at("flows")) {
    try {
      const auto i = row.at("i").get<std::size_t>();
      const auto j = row.at("j").get<std::size_t>();
      const auto t = row.at("t").get<std::size_t>();
      const NodeIndex u = g.require_node(row.at("u").get<std::string>());
      const NodeIndex v = g.require_node(row.at("v").get<std::string>());
      auto e = g.find_edge(u, v);
      if (!e || t >= lg.l_max()) throw InputError("solution document references an unknown layered edge");
      std::size_t si = subs.size();
      for (std::size_t k = 0; k < subs.size(); ++k) {
        if (subs[k].demand == i && subs[k].hops == j) si = k;
      }
      if (si == subs.size()) throw InputError("solution document references an unknown sub-demand");
      f.flows[si][lg.edge_index(t, *e)] = row.at("value").get<double>();
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(std::string("malformed flow row: ") + ex.what());
    }
  }
  f.objective = flow_objective(f, lg, subs, q);
  return f;
}

inline nlohmann::json paths_document(const PathAssignment& pa, const NetworkGraph& g, const DemandSet& d,
                                     const RunInfo& info) {
  nlohmann::json doc;
  doc["header"] = document_header(info);
  doc["total_rate"] = sig12(pa.total_rate());
  doc["demands"] = nlohmann::json::array();
  const std::optional<WernerParameter> w =
      g.elementary_fidelity() > 0.5 ? std::optional(fidelity_to_werner(FidelityTarget(g.elementary_fidelity())))
                                    : std::nullopt;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto j = demand_json(g, d, i);
    j["rate"] = sig12(pa.demand_rate(i));
    j["paths"] = nlohmann::json::array();
    for (const auto& p : pa.per_demand[i]) {
      nlohmann::json nodes = nlohmann::json::array();
      for (NodeIndex v : p.nodes(g)) nodes.push_back(g.node_id(v));
      j["paths"].push_back({{"path", nodes},
                            {"length", p.hops},
                            {"rate", sig12(p.rate)},
                            {"end_to_end_fidelity", sig12(end_to_end_fidelity(*w, p.hops))},
                            {"node_simple", p.node_simple(g)}});
    }
    doc["demands"].push_back(std::move(j));
  }
  return doc;
}

inline PathAssignment paths_from_document(const nlohmann::json& doc, const NetworkGraph& g, const DemandSet& d) {
  PathAssignment pa;
  pa.per_demand.resize(d.size());
  try {
    for (const auto& dem : doc.at("demands")) {
      const auto i = dem.at("index").get<std::size_t>();
      if (i >= d.size()) throw InputError("paths document references an unknown demand");
      for (const auto& p : dem.at("paths")) {
        ExtractedPath ep;
        ep.demand = i;
        ep.rate = p.at("rate").get<double>();
        const auto& nodes = p.at("path");
        for (std::size_t k = 1; k < nodes.size(); ++k) {
          auto e = g.find_edge(g.require_node(nodes[k - 1].get<std::string>()),
                               g.require_node(nodes[k].get<std::string>()));
          if (!e) throw InputError("paths document uses a missing edge");
          ep.base_edges.push_back(*e);
        }
        ep.hops = ep.base_edges.size();
        pa.per_demand[i].push_back(std::move(ep));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("malformed paths document: ") + ex.what());
  }
  return pa;
}

inline nlohmann::json simulation_document(const SimulationReport& rep, const NetworkGraph& g, const RunInfo& info) {
  nlohmann::json doc;
  doc["header"] = document_header(info);
  doc["trials"] = rep.trials;
  doc["scheduling"] = to_string(rep.scheduling);
  doc["paths"] = nlohmann::json::array();
  for (const auto& r : rep.paths) {
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeIndex v : r.nodes) nodes.push_back(g.node_id(v));
    doc["paths"].push_back({{"demand", r.demand},
                            {"path_index", r.path},
                            {"path", nodes},
                            {"length", r.length},
                            {"analytic_rate", sig12(r.analytic_rate)},
                            {"empirical_rate", sig12(r.empirical_rate)},
                            {"standard_error", sig12(r.standard_error)},
                            {"mean_fidelity", r.mean_fidelity ? nlohmann::json(sig12(*r.mean_fidelity)) : nullptr},
                            {"storage_bound", sig12(r.storage_bound)},
                            {"ready_time", sig12(r.ready_time)}});
  }
  return doc;
}

inline std::string simulation_csv(const SimulationReport& rep, const NetworkGraph& g) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  std::string out =
      "demand,path_index,length,analytic_rate,empirical_rate,standard_error,mean_fidelity,storage_bound,ready_time,"
      "path\n";
  for (const auto& r : rep.paths) {
    std::string path;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) path += (k ? " " : "") + g.node_id(r.nodes[k]);
    out += std::to_string(r.demand) + ',' + std::to_string(r.path) + ',' + std::to_string(r.length) + ',' +
           num(r.analytic_rate) + ',' + num(r.empirical_rate) + ',' + num(r.standard_error) + ',' +
           (r.mean_fidelity ? num(*r.mean_fidelity) : std::string()) + ',' + num(r.storage_bound) + ',' +
           num(r.ready_time) + ",\"" + path + "\"\n";
  }
  return out;
}

}  // namespace qflow
