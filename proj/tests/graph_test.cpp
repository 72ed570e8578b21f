#include <gtest/gtest.h>

#include <algorithm>

#include "plantmatch/csv.hpp"
#include "plantmatch/graph.hpp"
#include "test_util.hpp"

namespace plantmatch {
namespace {

TEST(NodeTypeTest, ParsesVocabularyAndFallsBackToUnknown) {
  EXPECT_EQ(parse_node_type("Pump"), NodeType::Pump);
  EXPECT_EQ(parse_node_type("pipe"), NodeType::Pipe);
  EXPECT_EQ(parse_node_type("Air compressor"), NodeType::AirCompressor);
  EXPECT_EQ(parse_node_type("Heat exchanger/condenser"), NodeType::HeatExchanger);
  EXPECT_EQ(parse_node_type("Large tank"), NodeType::LargeTank);
  EXPECT_EQ(parse_node_type("Tank of unknown size"), NodeType::UnknownSizeTank);
  EXPECT_EQ(parse_node_type("UnknownSizeTank"), NodeType::UnknownSizeTank);
  EXPECT_EQ(parse_node_type("VALVE"), NodeType::Unknown);
  EXPECT_EQ(parse_node_type(""), NodeType::Unknown);
}

TEST(NodeTypeTest, TankPredicateCoversExactlyTheThreeTankKinds) {
  int tanks = 0;
  for (std::size_t i = 0; i < kNodeTypeCount; ++i)
    if (is_tank(static_cast<NodeType>(i))) ++tanks;
  EXPECT_EQ(tanks, 3);
  EXPECT_TRUE(is_tank(NodeType::LargeTank));
  EXPECT_TRUE(is_tank(NodeType::SmallTank));
  EXPECT_TRUE(is_tank(NodeType::UnknownSizeTank));
  EXPECT_FALSE(is_tank(NodeType::Unknown));
}

TEST(FlowGroupSetTest, ParseAndFormat) {
  const auto s = FlowGroupSet::parse("Pulp;Water");
  EXPECT_TRUE(s.contains(FlowGroup::Pulp));
  EXPECT_TRUE(s.contains(FlowGroup::Water));
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.to_string(), "Pulp;Water");

  EXPECT_TRUE(FlowGroupSet::parse("").empty());
  // tokens outside the vocabulary are dropped
  EXPECT_EQ(FlowGroupSet::parse("Pulp;XYZ"), FlowGroupSet{FlowGroup::Pulp});
  EXPECT_EQ(FlowGroupSet::parse("white water"), FlowGroupSet{FlowGroup::WhiteWater});
}

TEST(FlowGroupSetTest, SetOperations) {
  const FlowGroupSet a{FlowGroup::Pulp, FlowGroup::Broke};
  const FlowGroupSet b{FlowGroup::Broke, FlowGroup::Steam};
  EXPECT_TRUE(a.intersects(b));
  const auto u = a.united(b);
  EXPECT_EQ(u.size(), 3u);
  EXPECT_FALSE(FlowGroupSet{}.intersects(a));
  // no duplicate members by construction
  EXPECT_EQ(FlowGroupSet({FlowGroup::Pulp, FlowGroup::Pulp}).size(), 1u);
}

TEST(LoadGraphTest, MaterializesTableExample) {
  const auto g = testing::table_example_graph();
  ASSERT_EQ(g.node_count(), 5u);
  ASSERT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(g.node(g.node_index("Node1")).type, NodeType::Pump);
  EXPECT_EQ(g.node(g.node_index("Node2")).type, NodeType::Pipe);
  EXPECT_EQ(g.node(g.node_index("Node3")).type, NodeType::Unknown);
  EXPECT_EQ(g.node(g.node_index("Node4")).type, NodeType::Refiner);
  EXPECT_EQ(g.node(g.node_index("Node5")).type, NodeType::Pipe);
  const Edge& e1 = g.edge(0);
  EXPECT_EQ(g.node(e1.source).id, "Node1");
  EXPECT_EQ(g.node(e1.target).id, "Node2");
  EXPECT_EQ(e1.flows, FlowGroupSet{FlowGroup::Water});
  EXPECT_EQ(g.edge(2).flows, FlowGroupSet{FlowGroup::Pulp});
}

TEST(LoadGraphTest, EmptyRowsGiveEmptyGraph) {
  const auto g = load_graph({}, {});
  EXPECT_EQ(g.node_count(), 0u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(LoadGraphTest, UnknownTypeStringBecomesUnknown) {
  const auto g = load_graph({{"a", "VALVE"}}, {});
  EXPECT_EQ(g.node(0).type, NodeType::Unknown);
}

TEST(LoadGraphTest, RejectsDuplicateNodeId) {
  EXPECT_THROW(load_graph({{"a", "Pump"}, {"a", "Pipe"}}, {}), Error);
  try {
    load_graph({{"a", "Pump"}, {"a", "Pipe"}}, {});
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

TEST(LoadGraphTest, RejectsEdgeWithMissingEndpoint) {
  EXPECT_THROW(load_graph({{"a", "Pump"}}, {{"e1", "a", "ghost", ""}}), Error);
  try {
    load_graph({{"a", "Pump"}}, {{"e1", "a", "ghost", ""}});
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'e1'"), std::string::npos);
    EXPECT_NE(msg.find("'ghost'"), std::string::npos);
  }
}

TEST(LoadGraphTest, RejectsDuplicateEdgeId) {
  EXPECT_THROW(load_graph({{"a", "Pump"}, {"b", "Pipe"}},
                          {{"e", "a", "b", ""}, {"e", "b", "a", ""}}),
               Error);
}

TEST(LoadGraphTest, RoundTripIsLosslessUpToCanonicalization) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto g = testing::random_process_graph(seed);
    const auto g2 = load_graph(node_rows(g), edge_rows(g));
    ASSERT_EQ(g2.node_count(), g.node_count());
    ASSERT_EQ(g2.edge_count(), g.edge_count());
    for (std::uint32_t i = 0; i < g.node_count(); ++i) {
      EXPECT_EQ(g2.node(i).id, g.node(i).id);
      EXPECT_EQ(g2.node(i).type, g.node(i).type);
    }
    for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
      EXPECT_EQ(g2.edge(e).id, g.edge(e).id);
      EXPECT_EQ(g2.edge(e).source, g.edge(e).source);
      EXPECT_EQ(g2.edge(e).target, g.edge(e).target);
      EXPECT_EQ(g2.edge(e).flows, g.edge(e).flows);
    }
  }
}

// --- merge_duplicate_nodes -------------------------------------------------

TEST(MergeDuplicatesTest, MergesSpellingVariantsOfOneTank) {
  // three spellings of one tank, plus neighbors wired to each variant
  auto g = load_graph(
      {
          {"TANK-101", "Large tank"},
          {"TANK101", "Large tank"},
          {"TK-101", "Unknown"},
          {"pumpA", "Pump"},
          {"pumpB", "Pump"},
          {"pipeC", "Pipe"},
      },
      {
          {"e1", "pumpA", "TANK-101", "Water"},
          {"e2", "pumpB", "TANK101", "Water"},
          {"e3", "TK-101", "pipeC", "Pulp"},
      });
  const AliasMap aliases{{"TANK101", "TANK-101"}, {"TK-101", "TANK-101"}};
  const auto merged = merge_duplicate_nodes(g, aliases);
  EXPECT_EQ(merged.node_count(), 4u);
  EXPECT_EQ(merged.edge_count(), 3u);
  const auto tank = merged.node_index("TANK-101");
  EXPECT_EQ(merged.node(tank).type, NodeType::LargeTank);
  EXPECT_FALSE(merged.find_node("TANK101").has_value());
  EXPECT_FALSE(merged.find_node("TK-101").has_value());
  // every edge reattached to the canonical tank
  EXPECT_EQ(merged.in_edges(tank).size(), 2u);
  EXPECT_EQ(merged.out_edges(tank).size(), 1u);
}

TEST(MergeDuplicatesTest, EmptyAliasMapIsIdentity) {
  const auto g = testing::table_example_graph();
  const auto merged = merge_duplicate_nodes(g, {});
  EXPECT_EQ(merged.node_count(), g.node_count());
  EXPECT_EQ(merged.edge_count(), g.edge_count());
  for (std::uint32_t i = 0; i < g.node_count(); ++i)
    EXPECT_EQ(merged.node(i).id, g.node(i).id);
}

TEST(MergeDuplicatesTest, UnknownCanonicalAdoptsKnownAliasType) {
  auto g = load_graph({{"canon", "Unknown"}, {"alias", "Pump"}, {"t", "Refiner"}},
                      {{"e1", "alias", "t", ""}});
  const auto merged = merge_duplicate_nodes(g, {{"alias", "canon"}});
  EXPECT_EQ(merged.node_count(), 2u);
  EXPECT_EQ(merged.node(merged.node_index("canon")).type, NodeType::Pump);
}

TEST(MergeDuplicatesTest, RejectsAliasChains) {
  const auto g = load_graph({{"a", "Pump"}, {"b", "Pump"}, {"c", "Pump"}}, {});
  EXPECT_THROW(merge_duplicate_nodes(g, {{"a", "b"}, {"b", "c"}}), Error);
  EXPECT_THROW(merge_duplicate_nodes(g, {{"a", "a"}}), Error);
}

TEST(MergeDuplicatesTest, RejectsConflictingKnownTypes) {
  const auto g = load_graph({{"canon", "Pump"}, {"alias", "Refiner"}}, {});
  try {
    merge_duplicate_nodes(g, {{"alias", "canon"}});
    FAIL() << "expected a type conflict";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Pump"), std::string::npos);
    EXPECT_NE(msg.find("Refiner"), std::string::npos);
  }
}

TEST(MergeDuplicatesTest, CanonicalAbsentFromGraphIsCreatedFromAlias) {
  const auto g = load_graph({{"alias", "Pump"}, {"t", "Refiner"}}, {{"e", "alias", "t", ""}});
  const auto merged = merge_duplicate_nodes(g, {{"alias", "canon"}});
  EXPECT_EQ(merged.node_count(), 2u);
  EXPECT_EQ(merged.node(merged.node_index("canon")).type, NodeType::Pump);
  EXPECT_EQ(merged.node(merged.edge(0).source).id, "canon");
}

TEST(MergeDuplicatesTest, PreservesEdgeCountAndDropsExactlyTheAliases) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = testing::random_process_graph(seed, 10, 30);
    // alias the last two nodes onto the first node when types permit
    const auto& canon = g.node(0);
    AliasMap aliases;
    std::size_t distinct_aliases = 0;
    for (std::uint32_t i = 1; i <= 2; ++i) {
      const auto& cand = g.node(g.node_count() - i);
      const bool conflict = cand.type != NodeType::Unknown &&
                            canon.type != NodeType::Unknown && cand.type != canon.type;
      if (!conflict) {
        aliases.emplace(cand.id, canon.id);
        ++distinct_aliases;
      }
    }
    const auto merged = merge_duplicate_nodes(g, aliases);
    EXPECT_EQ(merged.edge_count(), g.edge_count());
    EXPECT_EQ(merged.node_count(), g.node_count() - distinct_aliases);
  }
}

// --- validate ---------------------------------------------------------------

TEST(ValidateTest, CountsForTableExample) {
  const auto r = validate(testing::table_example_graph());
  EXPECT_EQ(r.node_count, 5u);
  EXPECT_EQ(r.edge_count, 3u);
  EXPECT_EQ(r.distinct_node_types, 4u);  // Pump, Pipe, Unknown, Refiner
  EXPECT_EQ(r.distinct_flow_groups, 2u);
  EXPECT_TRUE(r.clean());
  EXPECT_TRUE(r.isolated_nodes.empty());
}

TEST(ValidateTest, EmptyGraphHasZeroCounts) {
  const auto r = validate(load_graph({}, {}));
  EXPECT_EQ(r.node_count, 0u);
  EXPECT_EQ(r.edge_count, 0u);
  EXPECT_EQ(r.distinct_node_types, 0u);
  EXPECT_EQ(r.distinct_flow_groups, 0u);
  EXPECT_TRUE(r.clean());
}

TEST(ValidateTest, FlagsIsolatedNodes) {
  const auto g = load_graph({{"a", "Pump"}, {"b", "Pipe"}, {"lonely", "Fan"}},
                            {{"e", "a", "b", "Water"}});
  const auto r = validate(g);
  ASSERT_EQ(r.isolated_nodes.size(), 1u);
  EXPECT_EQ(r.isolated_nodes[0], "lonely");
}

TEST(ValidateTest, LoadedGraphsHaveNoDanglingEndpoints) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = validate(testing::random_process_graph(seed));
    EXPECT_TRUE(r.dangling_endpoints.empty());
    EXPECT_TRUE(r.adjacency_consistent);
  }
}

TEST(ValidateTest, UnknownFlowCountsAsOneKind) {
  const auto g = load_graph({{"a", "Pump"}, {"b", "Fan"}},
                            {{"e1", "a", "b", ""}, {"e2", "a", "b", "Water"}});
  EXPECT_EQ(validate(g).distinct_flow_groups, 2u);
}

// --- CSV round trip ----------------------------------------------------------

TEST(CsvTest, GraphRoundTripThroughFiles) {
  const auto dir = ::testing::TempDir();
  const auto g = testing::random_process_graph(3);
  csv::write_graph_csv(g, dir + "/nodes.csv", dir + "/edges.csv");
  const auto g2 = csv::load_graph_csv(dir + "/nodes.csv", dir + "/edges.csv");
  ASSERT_EQ(g2.node_count(), g.node_count());
  ASSERT_EQ(g2.edge_count(), g.edge_count());
  for (std::uint32_t e = 0; e < g.edge_count(); ++e)
    EXPECT_EQ(g2.edge(e).flows, g.edge(e).flows);
}

TEST(CsvTest, RejectsWrongHeader) {
  const auto dir = ::testing::TempDir();
  const auto path = dir + "/bad.csv";
  {
    std::ofstream out(path);
    out << "wrong,header\nx,y\n";
  }
  EXPECT_THROW(csv::read_node_rows(path), Error);
}

TEST(CsvTest, RejectsMissingFile) {
  EXPECT_THROW(csv::read_node_rows("/nonexistent/nodes.csv"), Error);
}

TEST(CsvTest, AliasFileRejectsContradictoryRows) {
  const auto dir = ::testing::TempDir();
  const auto path = dir + "/aliases.csv";
  {
    std::ofstream out(path);
    out << "canonical_id,alias_id\nA,x\nB,x\n";
  }
  EXPECT_THROW(csv::read_aliases_csv(path), Error);
}

TEST(CsvTest, QuotedFieldsSurviveRoundTrip) {
  ProcessGraph g;
  g.add_node("tank, big", NodeType::LargeTank);
  g.add_node("pump \"P1\"", NodeType::Pump);
  g.add_edge("e,1", 1, 0, FlowGroupSet{FlowGroup::Water});
  const auto dir = ::testing::TempDir();
  csv::write_graph_csv(g, dir + "/qnodes.csv", dir + "/qedges.csv");
  const auto g2 = csv::load_graph_csv(dir + "/qnodes.csv", dir + "/qedges.csv");
  ASSERT_EQ(g2.node_count(), 2u);
  EXPECT_TRUE(g2.find_node("tank, big").has_value());
  EXPECT_TRUE(g2.find_node("pump \"P1\"").has_value());
  ASSERT_EQ(g2.edge_count(), 1u);
  EXPECT_EQ(g2.edge(0).id, "e,1");
}

}  // namespace
}  // namespace plantmatch
