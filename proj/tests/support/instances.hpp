#pragma once

// Instance builders shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qflow/demands.hpp"
#include "qflow/rng.hpp"
#include "qflow/topology.hpp"

namespace qflow::testing {

struct Instance {
  NetworkGraph graph;
  std::vector<DemandSpec> demands;
};

inline NetworkGraph make_graph(std::vector<std::string> nodes, std::vector<EdgeRecord> edges, double q,
                               double fidelity = 0.9925, bool directed = true) {
  GraphData d;
  d.directed = directed;
  d.elementary_fidelity = fidelity;
  d.swap_success = q;
  d.nodes = std::move(nodes);
  d.edges = std::move(edges);
  return NetworkGraph::from_data(d);
}

inline DemandSpec hops(std::string s, std::string e, std::size_t l) {
  return {std::move(s), std::move(e), DemandSpec::MaxLength{l}};
}

inline DemandSpec fidelity(std::string s, std::string e, double f) { return {std::move(s), std::move(e), f}; }

// s -> a -> e with capacities 4, 4.
inline Instance chain_instance(double q = 0.5) {
  return {make_graph({"s", "a", "e"}, {{"s", "a", 4}, {"a", "e", 4}}, q), {hops("s", "e", 2)}};
}

// Direct s -> e (cap 1) plus s -> a -> e (caps 4, 4).
inline Instance two_path_instance(double q = 0.5) {
  return {make_graph({"s", "a", "e"}, {{"s", "e", 1}, {"s", "a", 4}, {"a", "e", 4}}, q), {hops("s", "e", 2)}};
}

// Five-node network s, u, v, w, e with demand (s, e, 2) and q = 1/2. The
// capacities are illustrative; only the node set matters for G' sizes.
inline Instance five_node_instance() {
  return {make_graph({"s", "u", "v", "w", "e"},
                     {{"s", "u", 3}, {"u", "e", 2}, {"s", "v", 4}, {"v", "w", 5}, {"w", "e", 4}, {"u", "v", 1},
                      {"v", "e", 1}},
                     0.5, 0.9925, false),
          {hops("s", "e", 2)}};
}

// Shared-link example: p1 = s1-u-v-w-e (every link cap 2, so rate 0.25 at
// q = 1/2) and p2 = s2-w-e with (w,e) cap 20 shared by both paths.
inline NetworkGraph shared_link_graph() {
  return make_graph({"s1", "s2", "u", "v", "w", "e"},
                    {{"s1", "u", 2}, {"u", "v", 2}, {"v", "w", 2}, {"s2", "w", 10}, {"w", "e", 20}}, 0.5);
}

// Random small instance: 3..8 nodes, up to 20 directed edges with integer
// capacities in [1, 10], 1..3 demands with hop bounds 1..4.
inline Instance random_small_instance(std::uint64_t seed, double q) {
  CounterRng rng(seed, 0xA11CE);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)); };
  const std::size_t n = 3 + pick(6);
  std::vector<std::string> nodes;
  for (std::size_t v = 0; v < n; ++v) nodes.push_back(std::to_string(v));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u != v) pairs.emplace_back(u, v);
    }
  }
  for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[pick(i)]);
  const std::size_t m = std::min<std::size_t>(pairs.size(), 4 + pick(17));
  std::vector<EdgeRecord> edges;
  for (std::size_t k = 0; k < m; ++k) {
    edges.push_back({nodes[pairs[k].first], nodes[pairs[k].second], static_cast<double>(1 + pick(10))});
  }
  Instance inst{make_graph(nodes, edges, q), {}};
  const std::size_t k = 1 + pick(3);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = pick(n);
    std::size_t e = pick(n - 1);
    if (e >= s) ++e;
    inst.demands.push_back(hops(nodes[s], nodes[e], 1 + pick(4)));
  }
  return inst;
}

// 50-node sparse network in the spirit of a national research backbone:
// nodes at random points, a Euclidean minimum spanning tree plus the
// shortest remaining links up to 68 undirected edges, capacities uniform
// integers in [1, 400], F = 0.9925, q = 0.5.
inline NetworkGraph backbone_graph(std::uint64_t seed, std::size_t n = 50, std::size_t links = 68) {
  CounterRng rng(seed, 0xBAC0);
  std::vector<std::pair<double, double>> pt(n);
  for (auto& p : pt) p = {rng.uniform(), rng.uniform()};
  auto dist = [&](std::size_t a, std::size_t b) { return std::hypot(pt[a].first - pt[b].first, pt[a].second - pt[b].second); };

  std::set<std::pair<std::size_t, std::size_t>> chosen;
  std::vector<char> in_tree(n, 0);
  in_tree[0] = 1;
  for (std::size_t added = 1; added < n; ++added) {
    double best = 1e9;
    std::pair<std::size_t, std::size_t> arg{0, 0};
    for (std::size_t a = 0; a < n; ++a) {
      if (!in_tree[a]) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (in_tree[b] || dist(a, b) >= best) continue;
        best = dist(a, b);
        arg = {std::min(a, b), std::max(a, b)};
      }
    }
    in_tree[arg.first] = in_tree[arg.second] = 1;
    chosen.insert(arg);
  }
  std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> rest;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!chosen.contains({a, b})) rest.push_back({dist(a, b), {a, b}});
    }
  }
  std::sort(rest.begin(), rest.end());
  for (std::size_t i = 0; chosen.size() < links && i < rest.size(); ++i) chosen.insert(rest[i].second);

  std::vector<std::string> nodes;
  for (std::size_t v = 1; v <= n; ++v) nodes.push_back(std::to_string(v));
  std::vector<EdgeRecord> edges;
  for (const auto& [a, b] : chosen) {
    edges.push_back({nodes[a], nodes[b], 1.0 + std::floor(rng.uniform() * 400.0)});
  }
  return make_graph(nodes, edges, 0.5, 0.9925, false);
}

// `k` random demands with fidelity targets uniform in [0.93, 0.99].
inline std::vector<DemandSpec> backbone_demands(const NetworkGraph& g, std::uint64_t seed, std::size_t k = 4) {
  CounterRng rng(seed, 0xDE3A);
  std::vector<DemandSpec> out;
  const std::size_t n = g.num_nodes();
  while (out.size() < k) {
    const auto s = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    const auto e = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    if (s == e) continue;
    out.push_back(fidelity(g.node_id(s), g.node_id(e), 0.93 + 0.06 * rng.uniform()));
  }
  return out;
}

}  // namespace qflow::testing
