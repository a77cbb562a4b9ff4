#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "json.hpp"
#include "qflow/demands.hpp"
#include "qflow/topology.hpp"

namespace qflow {

struct LayeredNode {
  NodeIndex base;
  std::size_t layer;
  bool operator==(const LayeredNode&) const = default;
};

// Expanded graph G': l_max + 1 copies of every node and, for every base edge
// (u,v) and layer t < l_max, an edge u^t -> v^{t+1} carrying C(u,v).
// Layered nodes are indexed t * |V| + v and layered edges t * |E| + e.
class LayeredGraph {
 public:
  LayeredGraph(NetworkGraph base, std::size_t l_max) : base_(std::move(base)), l_max_(l_max) {}

  const NetworkGraph& base() const { return base_; }
  std::size_t l_max() const { return l_max_; }

  std::size_t num_nodes() const { return (l_max_ + 1) * base_.num_nodes(); }
  std::size_t num_edges() const { return l_max_ * base_.num_edges(); }

  std::size_t node_index(LayeredNode n) const { return n.layer * base_.num_nodes() + n.base; }
  LayeredNode node(std::size_t id) const { return {id % base_.num_nodes(), id / base_.num_nodes()}; }

  std::size_t edge_index(std::size_t layer, EdgeIndex base_edge) const {
    return layer * base_.num_edges() + base_edge;
  }
  std::size_t edge_layer(std::size_t id) const { return id / base_.num_edges(); }
  EdgeIndex base_edge(std::size_t id) const { return id % base_.num_edges(); }
  LayeredNode tail(std::size_t id) const { return {base_.edge(base_edge(id)).from, edge_layer(id)}; }
  LayeredNode head(std::size_t id) const { return {base_.edge(base_edge(id)).to, edge_layer(id) + 1}; }
  double capacity(std::size_t id) const { return base_.capacity(base_edge(id)); }

 private:
  NetworkGraph base_;
  std::size_t l_max_;
};

inline LayeredGraph build_layered_graph(const NetworkGraph& g, const DemandSet& d) {
  return LayeredGraph(g, d.l_max());
}

// Sub-demand (i, j): route from s_i^0 to e_i^j, i.e. over exactly j links.
struct SubDemand {
  std::size_t demand;
  std::size_t hops;
  NodeIndex source;
  NodeIndex sink;
  bool operator==(const SubDemand&) const = default;
};

// Demand i yields (i, 1), ..., (i, l_i); infeasible demands yield nothing.
inline std::vector<SubDemand> decompose_demands(const DemandSet& d) {
  std::vector<SubDemand> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 1; j <= d[i].length_bound; ++j) {
      out.push_back({i, j, d[i].source, d[i].destination});
    }
  }
  return out;
}

// Layered edges that lie on at least one s^0 -> e^j path, ascending. Every
// other edge is forced to zero flow by conservation, so it is left out of
// the LP.
inline std::vector<std::size_t> relevant_edges(const LayeredGraph& lg, const SubDemand& sub) {
  const NetworkGraph& g = lg.base();
  const std::size_t n = g.num_nodes();
  const std::size_t j = sub.hops;
  std::vector<std::size_t> out;
  if (j == 0 || j > lg.l_max()) return out;

  // fwd[t][v]: v^t reachable from s^0; bwd[t][v]: e^j reachable from v^t.
  std::vector<std::vector<char>> fwd(j + 1, std::vector<char>(n, 0));
  std::vector<std::vector<char>> bwd(j + 1, std::vector<char>(n, 0));
  fwd[0][sub.source] = 1;
  for (std::size_t t = 0; t < j; ++t) {
    for (NodeIndex u = 0; u < n; ++u) {
      if (!fwd[t][u]) continue;
      for (EdgeIndex e : g.out_edges(u)) fwd[t + 1][g.edge(e).to] = 1;
    }
  }
  bwd[j][sub.sink] = 1;
  for (std::size_t t = j; t-- > 0;) {
    for (NodeIndex v = 0; v < n; ++v) {
      if (!bwd[t + 1][v]) continue;
      for (EdgeIndex e : g.in_edges(v)) bwd[t][g.edge(e).from] = 1;
    }
  }
  for (std::size_t t = 0; t < j; ++t) {
    for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
      const auto& ed = g.edge(e);
      if (fwd[t][ed.from] && bwd[t + 1][ed.to]) out.push_back(lg.edge_index(t, e));
    }
  }
  return out;
}

// Debug dump of G' for inspection.
inline nlohmann::json layered_graph_to_json(const LayeredGraph& lg) {
  const NetworkGraph& g = lg.base();
  nlohmann::json doc;
  doc["l_max"] = lg.l_max();
  doc["nodes"] = nlohmann::json::array();
  for (std::size_t id = 0; id < lg.num_nodes(); ++id) {
    const auto n = lg.node(id);
    doc["nodes"].push_back({{"id", g.node_id(n.base)}, {"layer", n.layer}});
  }
  doc["edges"] = nlohmann::json::array();
  for (std::size_t id = 0; id < lg.num_edges(); ++id) {
    const auto t = lg.tail(id);
    const auto h = lg.head(id);
    doc["edges"].push_back({{"u", g.node_id(t.base)},
                            {"t", t.layer},
                            {"v", g.node_id(h.base)},
                            {"capacity", lg.capacity(id)}});
  }
  return doc;
}

}  // namespace qflow
