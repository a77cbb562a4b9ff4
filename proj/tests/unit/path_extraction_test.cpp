#include <gtest/gtest.h>

#include <set>

#include "qflow/path_extraction.hpp"
#include "support/instances.hpp"

using namespace qflow;
using namespace qflow::testing;

namespace {

struct Solved {
  DemandSet demands;
  LayeredGraph lg;
  std::vector<SubDemand> subs;
  FlowSolution flow;
};

Solved solve(const Instance& inst) {
  auto d = reduce_demands(inst.demands, inst.graph);
  auto lg = build_layered_graph(inst.graph, d);
  auto subs = decompose_demands(d);
  auto model = build_edge_lp(lg, subs, inst.graph.swap_success());
  auto f = flow_from_solution(model, solve_lp(model.lp), lg, subs, inst.graph.swap_success());
  return {std::move(d), std::move(lg), std::move(subs), std::move(f)};
}

std::vector<std::string> names(const ExtractedPath& p, const NetworkGraph& g) {
  std::vector<std::string> out;
  for (auto v : p.nodes(g)) out.push_back(g.node_id(v));
  return out;
}

}  // namespace

TEST(PathExtraction, Chain) {
  auto inst = chain_instance();
  auto s = solve(inst);
  auto pa = extract_paths(s.flow, s.lg, s.subs, s.demands.size(), 0.5, {});
  ASSERT_EQ(pa.num_paths(), 1u);
  const auto& p = pa.per_demand[0][0];
  EXPECT_EQ(names(p, inst.graph), (std::vector<std::string>{"s", "a", "e"}));
  EXPECT_EQ(p.hops, 2u);
  EXPECT_NEAR(p.rate, 2.0, 1e-9);
  EXPECT_TRUE(verify_assignment(pa, inst.graph, s.demands, 0.5, s.flow.objective, {}).ok());
}

TEST(PathExtraction, TwoPaths) {
  auto inst = two_path_instance();
  auto s = solve(inst);
  auto pa = extract_paths(s.flow, s.lg, s.subs, s.demands.size(), 0.5, {});
  ASSERT_EQ(pa.per_demand[0].size(), 2u);
  EXPECT_EQ(pa.per_demand[0][0].hops, 1u);
  EXPECT_NEAR(pa.per_demand[0][0].rate, 1.0, 1e-9);
  EXPECT_EQ(pa.per_demand[0][1].hops, 2u);
  EXPECT_NEAR(pa.per_demand[0][1].rate, 2.0, 1e-9);
  EXPECT_NEAR(pa.total_rate(), 3.0, 1e-9);
}

TEST(PathExtraction, ZeroFlowGivesNoPaths) {
  auto inst = chain_instance();
  auto s = solve(inst);
  FlowSolution zero;
  zero.flows.assign(s.subs.size(), std::vector<double>(s.lg.num_edges(), 0.0));
  auto pa = extract_paths(zero, s.lg, s.subs, 1, 0.5, {});
  EXPECT_EQ(pa.num_paths(), 0u);
  ASSERT_EQ(pa.per_demand.size(), 1u);
  EXPECT_TRUE(verify_assignment(pa, inst.graph, s.demands, 0.5, 0.0, {}).ok());
}

TEST(PathExtraction, AscendingIdTieBreak) {
  auto g = make_graph({"s", "b", "a", "e"}, {{"s", "b", 1}, {"b", "e", 1}, {"s", "a", 1}, {"a", "e", 1}}, 1.0);
  auto d = reduce_demands({hops("s", "e", 2)}, g);
  auto lg = build_layered_graph(g, d);
  auto subs = decompose_demands(d);
  FlowSolution f;
  f.flows.assign(subs.size(), std::vector<double>(lg.num_edges(), 0.0));
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    const bool first = g.edge(e).from == g.require_node("s");
    f.flows[1][lg.edge_index(first ? 0 : 1, e)] = 1.0;
  }
  f.objective = flow_objective(f, lg, subs, 1.0);
  auto pa = extract_paths(f, lg, subs, 1, 1.0, {});
  ASSERT_EQ(pa.per_demand[0].size(), 2u);
  EXPECT_EQ(names(pa.per_demand[0][0], g), (std::vector<std::string>{"s", "a", "e"}));
  EXPECT_EQ(names(pa.per_demand[0][1], g), (std::vector<std::string>{"s", "b", "e"}));
}

TEST(PathExtraction, ResidualStaysFeasibleAfterEveryStep) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = random_small_instance(seed, 0.75);
    auto s = solve(inst);
    std::size_t calls = 0;
    auto observer = [&](std::size_t si, std::span<const double> residual) {
      ++calls;
      const auto& sub = s.subs[si];
      std::vector<double> balance(s.lg.num_nodes(), 0.0);
      for (std::size_t le = 0; le < residual.size(); ++le) {
        EXPECT_GE(residual[le], -1e-9);
        EXPECT_LE(residual[le], s.flow.flows[si][le] + 1e-12);
        balance[s.lg.node_index(s.lg.tail(le))] -= residual[le];
        balance[s.lg.node_index(s.lg.head(le))] += residual[le];
      }
      for (std::size_t n = 0; n < balance.size(); ++n) {
        if (n == s.lg.node_index({sub.source, 0}) || n == s.lg.node_index({sub.sink, sub.hops})) continue;
        EXPECT_NEAR(balance[n], 0.0, 1e-6);
      }
    };
    auto pa = extract_paths(s.flow, s.lg, s.subs, s.demands.size(), 0.75, {}, observer);
    EXPECT_EQ(calls >= pa.num_paths(), true);
    auto rep = verify_assignment(pa, inst.graph, s.demands, 0.75, s.flow.objective, {});
    EXPECT_TRUE(rep.ok()) << "seed " << seed << ": " << (rep.ok() ? "" : rep.violations[0].where);
  }
}

TEST(PathExtraction, VerifyCatchesBadAssignments) {
  auto inst = two_path_instance();
  auto s = solve(inst);
  auto pa = extract_paths(s.flow, s.lg, s.subs, 1, 0.5, {});

  auto inflated = pa;
  inflated.per_demand[0][1].rate += 0.5;
  auto rep = verify_assignment(inflated, inst.graph, s.demands, 0.5, s.flow.objective, {});
  std::set<std::string> kinds;
  for (const auto& v : rep.violations) kinds.insert(v.kind);
  EXPECT_TRUE(kinds.contains("capacity"));
  EXPECT_TRUE(kinds.contains("objective"));

  auto tight = reduce_demands({hops("s", "e", 1)}, inst.graph);
  rep = verify_assignment(pa, inst.graph, tight, 0.5, s.flow.objective, {});
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations[0].kind, "length");

  auto broken = pa;
  std::swap(broken.per_demand[0][1].base_edges[0], broken.per_demand[0][1].base_edges[1]);
  rep = verify_assignment(broken, inst.graph, s.demands, 0.5, s.flow.objective, {});
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations[0].kind, "walk");
}

TEST(PathExtraction, NonSimpleProjectionIsNoted) {
  // s -> a -> s -> e uses s twice. The spare node z lets hop bounds reach 3.
  auto g = make_graph({"s", "a", "e", "z"}, {{"s", "a", 2}, {"a", "s", 2}, {"s", "e", 1}, {"e", "z", 1}}, 1.0);
  auto d = reduce_demands({hops("s", "e", 2)}, g);
  auto lg = build_layered_graph(g, d);
  auto subs = decompose_demands(d);
  FlowSolution f;
  f.flows.assign(subs.size(), std::vector<double>(lg.num_edges(), 0.0));
  f.flows[0][lg.edge_index(0, *g.find_edge(g.require_node("s"), g.require_node("e")))] = 1.0;
  f.objective = 1.0;
  auto pa = extract_paths(f, lg, subs, 1, 1.0, {});
  ASSERT_EQ(pa.num_paths(), 1u);
  EXPECT_TRUE(pa.per_demand[0][0].node_simple(g));

  ExtractedPath loop{0, 3, {*g.find_edge(g.require_node("s"), g.require_node("a")),
                            *g.find_edge(g.require_node("a"), g.require_node("s")),
                            *g.find_edge(g.require_node("s"), g.require_node("e"))},
                     0.5};
  EXPECT_FALSE(loop.node_simple(g));
  PathAssignment manual;
  manual.per_demand = {{loop}};
  auto d3 = reduce_demands({hops("s", "e", 3)}, g);
  auto rep = verify_assignment(manual, g, d3, 1.0, 0.5, {});
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(rep.notes.size(), 1u);
}

TEST(PathExtraction, BreakdownOnUnroutableFlow) {
  // Outflow at s^0 with nothing reaching e: no positive path exists.
  auto inst = chain_instance();
  auto s = solve(inst);
  FlowSolution f;
  f.flows.assign(s.subs.size(), std::vector<double>(s.lg.num_edges(), 0.0));
  const auto& g = inst.graph;
  f.flows[1][s.lg.edge_index(0, *g.find_edge(g.require_node("s"), g.require_node("a")))] = 1.0;
  EXPECT_THROW(extract_paths(f, s.lg, s.subs, 1, 0.5, {}), NumericalError);
}
