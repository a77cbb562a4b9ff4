#include <gtest/gtest.h>

#include "qflow/demands.hpp"
#include "support/instances.hpp"

using namespace qflow;
using namespace qflow::testing;

namespace {

NetworkGraph path_graph(std::size_t n) {
  std::vector<std::string> nodes;
  std::vector<EdgeRecord> edges;
  for (std::size_t v = 1; v <= n; ++v) nodes.push_back(std::to_string(v));
  for (std::size_t v = 1; v < n; ++v) edges.push_back({std::to_string(v), std::to_string(v + 1), 5});
  return make_graph(nodes, edges, 0.5, 0.9925, false);
}

}  // namespace

TEST(Demands, FidelityTargetsBecomeHopBounds) {
  auto g = backbone_graph(1);
  auto d = reduce_demands({fidelity("1", "7", 0.94), fidelity("2", "9", 0.95), fidelity("3", "4", 0.97),
                           fidelity("5", "50", 0.99)},
                          g);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d[0].length_bound, 8u);
  EXPECT_EQ(d[1].length_bound, 6u);
  EXPECT_EQ(d[2].length_bound, 4u);
  EXPECT_EQ(d[3].length_bound, 1u);
  EXPECT_EQ(d.l_max(), 8u);
  EXPECT_EQ(d[0].source, g.require_node("1"));
  EXPECT_EQ(d[3].destination, g.require_node("50"));
  EXPECT_DOUBLE_EQ(*d[1].target_fidelity, 0.95);
}

TEST(Demands, InfeasibleTargetIsFlaggedNotRejected) {
  auto g = path_graph(4);
  auto d = reduce_demands({fidelity("1", "4", 0.999), hops("1", "3", 2)}, g);
  EXPECT_FALSE(d[0].feasible());
  EXPECT_EQ(d[0].length_bound, 0u);
  EXPECT_TRUE(d[1].feasible());
  EXPECT_EQ(d.l_max(), 2u);
}

TEST(Demands, BoundsAreCappedByNodeCount) {
  auto g = path_graph(4);
  auto d = reduce_demands({hops("1", "4", 10), fidelity("1", "4", 0.6)}, g);
  EXPECT_EQ(d[0].length_bound, 3u);
  EXPECT_EQ(d[1].length_bound, 3u);

  auto perfect = make_graph({"a", "b"}, {{"a", "b", 1}}, 1.0, 1.0);
  EXPECT_EQ(reduce_demands({fidelity("a", "b", 0.99)}, perfect)[0].length_bound, 1u);
}

TEST(Demands, Rejections) {
  auto g = path_graph(4);
  EXPECT_THROW(reduce_demands({hops("1", "1", 2)}, g), InputError);
  EXPECT_THROW(reduce_demands({hops("1", "9", 2)}, g), InputError);
  EXPECT_THROW(reduce_demands({hops("1", "2", 0)}, g), InputError);
  EXPECT_THROW(reduce_demands({fidelity("1", "2", 0.4)}, g), InputError);
  EXPECT_THROW(reduce_demands({}, g), InputError);
}

TEST(Demands, OrderIsPreserved) {
  auto g = path_graph(5);
  auto d = reduce_demands({hops("5", "1", 1), hops("2", "3", 3), hops("1", "5", 2)}, g);
  EXPECT_EQ(d[0].source, g.require_node("5"));
  EXPECT_EQ(d[1].length_bound, 3u);
  EXPECT_EQ(d[2].destination, g.require_node("5"));
}

TEST(Demands, ParseDocument) {
  auto specs = parse_demands(nlohmann::json::parse(R"([
    {"source": "s", "destination": "e", "target_fidelity": 0.95},
    {"source": 3, "destination": 4, "max_length": 2}
  ])"));
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_DOUBLE_EQ(std::get<double>(specs[0].requirement), 0.95);
  EXPECT_EQ(specs[1].source, "3");
  EXPECT_EQ(std::get<DemandSpec::MaxLength>(specs[1].requirement).hops, 2u);

  EXPECT_THROW(parse_demands(nlohmann::json::object()), InputError);
  EXPECT_THROW(parse_demands(nlohmann::json::parse(R"([{"source": "s", "destination": "e"}])")), InputError);
  EXPECT_THROW(parse_demands(nlohmann::json::parse(
                   R"([{"source": "s", "destination": "e", "max_length": 2, "target_fidelity": 0.9}])")),
               InputError);
  EXPECT_THROW(parse_demands(nlohmann::json::parse(R"([{"source": "s", "destination": "e", "max_length": 0}])")),
               InputError);
}
