#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qflow/error.hpp"
#include "qflow/report.hpp"
#include "qflow/rng.hpp"

namespace qflow {

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;

// Ordering used everywhere node ids are sorted: ids made only of digits
// compare numerically and sort before other names, which compare bytewise.
inline bool node_id_less(std::string_view a, std::string_view b) {
  auto numeric = [](std::string_view s) {
    return !s.empty() && s.size() < 19 &&
           std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
  };
  const bool na = numeric(a);
  const bool nb = numeric(b);
  if (na != nb) return na;
  if (na) {
    const auto va = std::stoull(std::string(a));
    const auto vb = std::stoull(std::string(b));
    if (va != vb) return va < vb;
  }
  return a < b;
}

struct EdgeRecord {
  std::string u;
  std::string v;
  double capacity = 0.0;
};

// Graph exactly as described by an input document, before any checks.
struct GraphData {
  bool directed = true;
  double elementary_fidelity = 1.0;
  double swap_success = 1.0;
  std::vector<std::string> nodes;
  std::vector<EdgeRecord> edges;
};

// Lists every broken graph invariant; an empty report means the data can be
// turned into a NetworkGraph. Parallel edges are not violations, they merge.
inline ValidationReport validate_graph(const GraphData& data) {
  ValidationReport report;
  const double f = data.elementary_fidelity;
  if (!(f > 0.5 && f <= 1.0)) {
    report.push_back({"fidelity", "elementary fidelity must exceed 0.5 and be at most 1",
                      std::isfinite(f) ? f - 0.5 : 0.0});
  }
  const double q = data.swap_success;
  if (!(q > 0.0 && q <= 1.0)) {
    report.push_back({"swap_success", "swap success probability must lie in (0, 1]", 0.0});
  }
  std::map<std::string, int> seen;
  for (const auto& id : data.nodes) {
    if (id.empty()) report.push_back({"node", "empty node id", 0.0});
    if (++seen[id] == 2) report.push_back({"node", "duplicate node id '" + id + "'", 0.0});
  }
  for (const auto& e : data.edges) {
    const std::string where = "(" + e.u + "," + e.v + ")";
    if (!seen.contains(e.u)) report.push_back({"endpoint", "unknown endpoint '" + e.u + "' on edge " + where, 0.0});
    if (!seen.contains(e.v)) report.push_back({"endpoint", "unknown endpoint '" + e.v + "' on edge " + where, 0.0});
    if (e.u == e.v) report.push_back({"self_loop", "self-loop on edge " + where, 0.0});
    if (!(e.capacity > 0.0) || !std::isfinite(e.capacity)) {
      report.push_back({"capacity", "nonpositive capacity on edge " + where,
                        std::isfinite(e.capacity) ? e.capacity : 0.0});
    }
  }
  return report;
}

// Each undirected edge {u,v} with capacity c becomes (u,v) and (v,u), both c.
inline GraphData to_directed(const GraphData& undirected) {
  GraphData out = undirected;
  out.directed = true;
  out.edges.clear();
  out.edges.reserve(2 * undirected.edges.size());
  for (const auto& e : undirected.edges) {
    out.edges.push_back({e.u, e.v, e.capacity});
    out.edges.push_back({e.v, e.u, e.capacity});
  }
  return out;
}

// Directed capacity graph with global elementary fidelity F and swap
// success probability q. Nodes are stored in node_id_less order, so node
// indices ascend with ids; edges are sorted by (from, to).
class NetworkGraph {
 public:
  struct Edge {
    NodeIndex from;
    NodeIndex to;
    double capacity;
    bool operator==(const Edge&) const = default;
  };

  static NetworkGraph from_data(const GraphData& data) {
    const GraphData directed = data.directed ? data : to_directed(data);
    const ValidationReport report = validate_graph(directed);
    if (!report.empty()) {
      std::string msg = "invalid topology:";
      for (const auto& v : report) msg += " " + v.where + ";";
      throw InputError(msg);
    }

    NetworkGraph g;
    g.fidelity_ = directed.elementary_fidelity;
    g.swap_success_ = directed.swap_success;
    g.ids_ = directed.nodes;
    std::sort(g.ids_.begin(), g.ids_.end(), node_id_less);
    for (NodeIndex i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i], i);

    std::map<std::pair<NodeIndex, NodeIndex>, double> merged;
    for (const auto& e : directed.edges) {
      merged[{g.index_.at(e.u), g.index_.at(e.v)}] += e.capacity;
    }
    g.edges_.reserve(merged.size());
    for (const auto& [key, cap] : merged) g.edges_.push_back({key.first, key.second, cap});
    g.build_adjacency();
    return g;
  }

  std::size_t num_nodes() const { return ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::string& node_id(NodeIndex v) const { return ids_.at(v); }
  std::span<const std::string> node_ids() const { return ids_; }

  std::optional<NodeIndex> find_node(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeIndex require_node(std::string_view id) const {
    auto v = find_node(id);
    if (!v) throw InputError("unknown node '" + std::string(id) + "'");
    return *v;
  }

  const Edge& edge(EdgeIndex e) const { return edges_.at(e); }
  std::span<const Edge> edges() const { return edges_; }

  // Outgoing edge indices of v, ascending by head node index.
  std::span<const EdgeIndex> out_edges(NodeIndex v) const {
    return {out_.data() + out_start_[v], out_start_[v + 1] - out_start_[v]};
  }
  std::span<const EdgeIndex> in_edges(NodeIndex v) const {
    return {in_.data() + in_start_[v], in_start_[v + 1] - in_start_[v]};
  }

  std::optional<EdgeIndex> find_edge(NodeIndex u, NodeIndex v) const {
    for (EdgeIndex e : out_edges(u)) {
      if (edges_[e].to == v) return e;
    }
    return std::nullopt;
  }

  double capacity(EdgeIndex e) const { return edges_.at(e).capacity; }
  double elementary_fidelity() const { return fidelity_; }
  double swap_success() const { return swap_success_; }

  GraphData to_data() const {
    GraphData d;
    d.directed = true;
    d.elementary_fidelity = fidelity_;
    d.swap_success = swap_success_;
    d.nodes = ids_;
    for (const auto& e : edges_) d.edges.push_back({ids_[e.from], ids_[e.to], e.capacity});
    return d;
  }

  bool operator==(const NetworkGraph& o) const {
    return ids_ == o.ids_ && edges_ == o.edges_ && fidelity_ == o.fidelity_ &&
           swap_success_ == o.swap_success_;
  }

 private:
  NetworkGraph() = default;

  void build_adjacency() {
    const std::size_t n = ids_.size();
    out_start_.assign(n + 1, 0);
    in_start_.assign(n + 1, 0);
    for (const auto& e : edges_) {
      ++out_start_[e.from + 1];
      ++in_start_[e.to + 1];
    }
    for (std::size_t v = 0; v < n; ++v) {
      out_start_[v + 1] += out_start_[v];
      in_start_[v + 1] += in_start_[v];
    }
    out_.resize(edges_.size());
    in_.resize(edges_.size());
    std::vector<std::size_t> out_fill(out_start_.begin(), out_start_.end() - 1);
    std::vector<std::size_t> in_fill(in_start_.begin(), in_start_.end() - 1);
    // edges_ is sorted by (from, to), so both lists come out ordered.
    for (EdgeIndex e = 0; e < edges_.size(); ++e) {
      out_[out_fill[edges_[e].from]++] = e;
      in_[in_fill[edges_[e].to]++] = e;
    }
  }

  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_start_, in_start_;
  std::vector<EdgeIndex> out_, in_;
  double fidelity_ = 1.0;
  double swap_success_ = 1.0;
};

namespace detail {

inline std::string json_id(const nlohmann::json& v, const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw InputError(std::string("topology: ") + what + " must be a string or integer");
}

inline double json_number(const nlohmann::json& obj, const char* key, const char* ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw InputError(std::string(ctx) + ": missing numeric field '" + key + "'");
  }
  return it->get<double>();
}

}  // namespace detail

// Schema: { "directed": bool, "fidelity": F, "swap_success": q,
//           "nodes": [{"id": str}], "edges": [{"u","v","capacity"}] }
// Integer ids are accepted and stringified.
inline GraphData parse_topology_data(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("topology: document must be an object");
  GraphData d;
  auto dir = doc.find("directed");
  if (dir == doc.end() || !dir->is_boolean()) throw InputError("topology: missing boolean 'directed'");
  d.directed = dir->get<bool>();
  d.elementary_fidelity = detail::json_number(doc, "fidelity", "topology");
  d.swap_success = detail::json_number(doc, "swap_success", "topology");

  auto nodes = doc.find("nodes");
  if (nodes == doc.end() || !nodes->is_array()) throw InputError("topology: missing array 'nodes'");
  for (const auto& n : *nodes) {
    if (!n.is_object() || !n.contains("id")) throw InputError("topology: node entries need an 'id'");
    d.nodes.push_back(detail::json_id(n.at("id"), "node id"));
  }
  auto edges = doc.find("edges");
  if (edges == doc.end() || !edges->is_array()) throw InputError("topology: missing array 'edges'");
  for (const auto& e : *edges) {
    if (!e.is_object() || !e.contains("u") || !e.contains("v")) {
      throw InputError("topology: edge entries need 'u' and 'v'");
    }
    d.edges.push_back({detail::json_id(e.at("u"), "edge endpoint"),
                       detail::json_id(e.at("v"), "edge endpoint"),
                       detail::json_number(e, "capacity", "topology edge")});
  }
  return d;
}

inline NetworkGraph load_topology(const nlohmann::json& doc) {
  return NetworkGraph::from_data(parse_topology_data(doc));
}

inline nlohmann::json serialize_topology(const NetworkGraph& g) {
  nlohmann::json doc;
  doc["directed"] = true;
  doc["fidelity"] = g.elementary_fidelity();
  doc["swap_success"] = g.swap_success();
  doc["nodes"] = nlohmann::json::array();
  for (const auto& id : g.node_ids()) doc["nodes"].push_back({{"id", id}});
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges()) {
    doc["edges"].push_back({{"u", g.node_id(e.from)}, {"v", g.node_id(e.to)}, {"capacity", e.capacity}});
  }
  return doc;
}

// Options for ingesting topology-zoo GraphML files. Edges without a
// capacity attribute draw one uniformly from [capacity_min, capacity_max]
// (integers, inclusive) using `seed`.
struct GraphmlOptions {
  double capacity_min = 1.0;
  double capacity_max = 400.0;
  std::uint64_t seed = 1;
  double elementary_fidelity = 0.9925;
  double swap_success = 0.5;
};

// Reads the subset of GraphML used by the topology zoo: <key> declarations,
// <graph edgedefault>, <node id>, <edge source target> and an optional edge
// <data> whose key has attr.name "capacity" (case-insensitive).
inline GraphData parse_graphml(std::string_view text, const GraphmlOptions& opt) {
  const std::string s(text);
  auto attr = [](const std::string& tag, const std::string& name) -> std::optional<std::string> {
    const std::regex re("\\b" + name + "\\s*=\\s*\"([^\"]*)\"");
    std::smatch m;
    if (std::regex_search(tag, m, re)) return m[1].str();
    return std::nullopt;
  };
  auto lower = [](std::string v) {
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    return v;
  };

  GraphData d;
  d.elementary_fidelity = opt.elementary_fidelity;
  d.swap_success = opt.swap_success;
  d.directed = false;

  std::string capacity_key;
  const std::regex key_re("<key\\b[^>]*>");
  for (auto it = std::sregex_iterator(s.begin(), s.end(), key_re); it != std::sregex_iterator(); ++it) {
    const std::string tag = it->str();
    auto name = attr(tag, "attr\\.name");
    auto target = attr(tag, "for");
    auto id = attr(tag, "id");
    if (name && id && lower(*name) == "capacity" && (!target || *target == "edge")) capacity_key = *id;
  }

  const std::regex graph_re("<graph\\b[^>]*>");
  std::smatch gm;
  if (std::regex_search(s, gm, graph_re)) {
    auto def = attr(gm.str(), "edgedefault");
    d.directed = def && *def == "directed";
  }

  const std::regex node_re("<node\\b[^>]*>");
  for (auto it = std::sregex_iterator(s.begin(), s.end(), node_re); it != std::sregex_iterator(); ++it) {
    auto id = attr(it->str(), "id");
    if (!id) throw InputError("graphml: node without id");
    d.nodes.push_back(*id);
  }

  if (opt.capacity_max < opt.capacity_min || opt.capacity_min <= 0) {
    throw InputError("graphml: capacity range must be positive and ordered");
  }
  const std::regex edge_re("<edge\\b([^>]*?)(/>|>([\\s\\S]*?)</edge>)");
  const std::regex data_re("<data\\b[^>]*key\\s*=\\s*\"([^\"]*)\"[^>]*>([^<]*)</data>");
  std::uint64_t drawn = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), edge_re); it != std::sregex_iterator(); ++it) {
    const std::string head = (*it)[1].str();
    const std::string body = (*it)[3].str();
    auto src = attr(head, "source");
    auto dst = attr(head, "target");
    if (!src || !dst) throw InputError("graphml: edge without source/target");
    std::optional<double> cap;
    if (!capacity_key.empty()) {
      for (auto di = std::sregex_iterator(body.begin(), body.end(), data_re); di != std::sregex_iterator(); ++di) {
        if ((*di)[1].str() != capacity_key) continue;
        try {
          cap = std::stod((*di)[2].str());
        } catch (const std::exception&) {
          throw InputError("graphml: unreadable capacity '" + (*di)[2].str() + "'");
        }
      }
    }
    if (!cap) {
      CounterRng rng(opt.seed, drawn++);
      const double span = std::floor(opt.capacity_max) - std::ceil(opt.capacity_min) + 1.0;
      cap = std::ceil(opt.capacity_min) + std::floor(rng.uniform() * span);
    }
    // Topology-zoo files contain the occasional self-loop; they carry no
    // entanglement and are dropped.
    if (*src == *dst) continue;
    d.edges.push_back({*src, *dst, *cap});
  }
  return d;
}

}  // namespace qflow
