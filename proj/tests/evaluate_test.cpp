#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "calibration.hpp"
#include "plantmatch/dspfp.hpp"
#include "plantmatch/evaluate.hpp"
#include "plantmatch/simplify.hpp"
#include "plantmatch/synthetic.hpp"
#include "test_util.hpp"

namespace plantmatch {
namespace {

SimilarityMatrix neighbor_matrix(const ProcessGraph& g1, const ProcessGraph& g2) {
  SimilarityConfig cfg;
  cfg.measure = SimilarityMeasure::Neighbor;
  return similarity_matrix(g1, g2, cfg);
}

// --- recall ------------------------------------------------------------------

TEST(RecallTest, SupersetScoresOne) {
  const TruthSet truth{{"a", "x"}, {"b", "y"}};
  const MatchSet predicted{{"a", "x"}, {"b", "y"}, {"c", "z"}};
  EXPECT_DOUBLE_EQ(recall(predicted, truth), 1.0);
}

TEST(RecallTest, DisjointScoresZero) {
  const TruthSet truth{{"a", "x"}};
  EXPECT_DOUBLE_EQ(recall(MatchSet{{"a", "y"}}, truth), 0.0);
  EXPECT_DOUBLE_EQ(recall(MatchSet{}, truth), 0.0);
}

TEST(RecallTest, CountsFractions) {
  const TruthSet truth{{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "4"}};
  const MatchSet predicted{{"a", "1"}, {"b", "2"}, {"c", "3"}, {"d", "9"}};
  EXPECT_DOUBLE_EQ(recall(predicted, truth), 0.75);
}

TEST(RecallTest, RejectsEmptyTruth) {
  EXPECT_THROW(recall(MatchSet{{"a", "x"}}, TruthSet{}), Error);
}

TEST(RecallTest, ManyToOneTruthCapsInjectiveRecall) {
  // two sources share one true target; an injective alignment can hit at
  // most one of the pairs
  const TruthSet truth{{"s1", "t"}, {"s2", "t"}};
  const std::vector<std::string> sources{"s1", "s2"};
  const std::vector<std::string> targets{"t", "other"};
  double best = 0.0;
  for (int a = 0; a < 2; ++a) {
    Alignment f;
    f.pairs = {{"s1", targets[a]}, {"s2", targets[1 - a]}};
    best = std::max(best, recall(f, truth));
  }
  EXPECT_DOUBLE_EQ(best, 0.5);
}

// --- filtering ----------------------------------------------------------------

std::vector<ScoredMatch> three_matches() {
  return {{{"a", "x"}, 0.4}, {{"b", "y"}, 0.55}, {{"c", "z"}, 0.9}};
}

TEST(FilterMatchesTest, LimitZeroKeepsAll) {
  EXPECT_EQ(filter_matches(three_matches(), 0.0).size(), 3u);
}

TEST(FilterMatchesTest, LimitAboveOneDropsAll) {
  EXPECT_TRUE(filter_matches(three_matches(), 1.01).empty());
}

TEST(FilterMatchesTest, KeepsExactlyThoseAtOrAboveLimit) {
  const auto kept = filter_matches(three_matches(), 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].pair.first, "b");
  EXPECT_EQ(kept[1].pair.first, "c");
}

TEST(SweepFilterTest, EndpointRowsAndMonotonicity) {
  const TruthSet truth{{"a", "x"}, {"b", "y"}, {"c", "z"}};
  const auto rows = sweep_filter(three_matches(), truth, {0.0, 0.5, 0.8, 1.01});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_DOUBLE_EQ(rows.front().recall, 1.0);  // unfiltered recall
  EXPECT_DOUBLE_EQ(rows.back().recall, 0.0);
  EXPECT_EQ(rows.back().retained, 0u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].retained, rows[i - 1].retained);
    EXPECT_LE(rows[i].recall, rows[i - 1].recall);
  }
}

TEST(SweepFilterTest, RejectsUnsortedLimits) {
  const TruthSet truth{{"a", "x"}};
  EXPECT_THROW(sweep_filter(three_matches(), truth, {0.5, 0.1}), Error);
}

// --- generator -----------------------------------------------------------------

TEST(GeneratePlantTest, MinimalPlantIsConnectedWithNonPipeNodes) {
  const auto g = generate_plant(1, 3, 9);
  std::size_t non_pipe = 0;
  for (const auto& n : g.nodes())
    if (n.type != NodeType::Pipe) ++non_pipe;
  EXPECT_GE(non_pipe, 3u);

  // weak connectivity
  std::vector<char> seen(g.node_count(), 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    auto visit = [&](std::uint32_t next) {
      if (!seen[next]) {
        seen[next] = 1;
        stack.push_back(next);
      }
    };
    for (auto e : g.out_edges(v)) visit(g.edge(e).target);
    for (auto e : g.in_edges(v)) visit(g.edge(e).source);
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }));
}

TEST(GeneratePlantTest, DeterministicForFixedSeed) {
  const auto a = generate_plant(3, 12, 77);
  const auto b = generate_plant(3, 12, 77);
  ASSERT_EQ(a.node_count(), b.node_count());
  ASSERT_EQ(a.edge_count(), b.edge_count());
  for (std::uint32_t i = 0; i < a.node_count(); ++i) {
    EXPECT_EQ(a.node(i).id, b.node(i).id);
    EXPECT_EQ(a.node(i).type, b.node(i).type);
  }
  for (std::uint32_t e = 0; e < a.edge_count(); ++e) {
    EXPECT_EQ(a.edge(e).source, b.edge(e).source);
    EXPECT_EQ(a.edge(e).target, b.edge(e).target);
  }
}

TEST(GeneratePlantTest, SectionsAreIsomorphicByTypeFingerprint) {
  const auto g = generate_plant(3, 15, 123);
  // fingerprint: the type sequence of each section's main components
  std::map<int, std::vector<NodeType>> sections;
  for (int s = 1; s <= 3; ++s) {
    const std::string prefix = "s" + std::to_string(s) + "_c";
    for (std::size_t i = 0; i < 15; ++i) {
      auto idx = g.find_node(prefix + std::to_string(i));
      if (!idx) idx = g.find_node(prefix + std::to_string(i) + "_mix");
      ASSERT_TRUE(idx.has_value());
      sections[s].push_back(g.node(*idx).type);
    }
  }
  EXPECT_EQ(sections[1], sections[2]);
  EXPECT_EQ(sections[2], sections[3]);
}

TEST(GeneratePlantTest, RejectsBadArguments) {
  EXPECT_THROW(generate_plant(0, 5, 1), Error);
  EXPECT_THROW(generate_plant(1, 2, 1), Error);
}

// --- perturbation ----------------------------------------------------------------

TEST(PerturbTest, ZeroProbabilitiesGiveIsomorphicCopyWithFullTruth) {
  const auto g = generate_plant(2, 8, 33);
  const auto [copy, truth] = perturb(g, PerturbParams{0, 0, 0, 17});
  EXPECT_EQ(copy.node_count(), g.node_count());
  EXPECT_EQ(copy.edge_count(), g.edge_count());
  EXPECT_EQ(truth.size(), g.node_count());
  // the truth map preserves types and is a bijection onto the copy
  std::set<std::string> images;
  for (const auto& [src, dst] : truth) {
    const auto si = g.find_node(src);
    const auto di = copy.find_node(dst);
    ASSERT_TRUE(si.has_value());
    ASSERT_TRUE(di.has_value());
    EXPECT_EQ(g.node(*si).type, copy.node(*di).type);
    images.insert(dst);
  }
  EXPECT_EQ(images.size(), copy.node_count());
  // edges are preserved under the truth map
  std::map<std::string, std::string> to_new(truth.begin(), truth.end());
  std::multiset<std::pair<std::string, std::string>> ge, ce;
  for (const auto& e : g.edges())
    ge.emplace(to_new.at(g.node(e.source).id), to_new.at(g.node(e.target).id));
  for (const auto& e : copy.edges())
    ce.emplace(copy.node(e.source).id, copy.node(e.target).id);
  EXPECT_EQ(ge, ce);
}

TEST(PerturbTest, FreshIdsShareNothingWithTheOriginal) {
  const auto g = generate_plant(2, 6, 3);
  const auto [copy, truth] = perturb(g, PerturbParams{0.1, 0.1, 0.1, 4});
  for (const auto& n : copy.nodes()) EXPECT_FALSE(g.find_node(n.id).has_value());
  (void)truth;
}

TEST(PerturbTest, HideAllTypesMakesEverythingUnknown) {
  const auto g = generate_plant(1, 6, 3);
  const auto [copy, truth] = perturb(g, PerturbParams{0, 1.0, 0, 5});
  for (const auto& n : copy.nodes()) EXPECT_EQ(n.type, NodeType::Unknown);
  (void)truth;
}

TEST(PerturbTest, FullSeriesParallelChangesEveryComponentGroup) {
  const auto g = generate_plant(3, 10, 21);
  const auto [copy, truth] = perturb(g, PerturbParams{0, 0, 1.0, 6});
  EXPECT_LT(truth.size(), g.node_count());
  // every surviving original non-pipe node must have gained a twin; every
  // missing one was dropped, so the truth map never covers all originals
  std::size_t original_non_pipe = 0;
  for (const auto& n : g.nodes())
    if (n.type != NodeType::Pipe) ++original_non_pipe;
  std::size_t surviving_non_pipe = 0;
  for (const auto& [src, dst] : truth) {
    const auto si = g.find_node(src);
    if (g.node(*si).type != NodeType::Pipe) { ++surviving_non_pipe; }
  }
  EXPECT_LT(surviving_non_pipe, original_non_pipe);
}

TEST(PerturbTest, DeterministicForFixedSeed) {
  const auto g = generate_plant(2, 8, 90);
  const PerturbParams params{0.2, 0.3, 0.4, 1234};
  const auto a = perturb(g, params);
  const auto b = perturb(g, params);
  EXPECT_EQ(a.truth, b.truth);
  ASSERT_EQ(a.graph.node_count(), b.graph.node_count());
  for (std::uint32_t i = 0; i < a.graph.node_count(); ++i)
    EXPECT_EQ(a.graph.node(i).id, b.graph.node(i).id);
}

TEST(PerturbTest, UnperturbedCopyWithOracleSimilarityRecallsPerfectly) {
  // identity-favoring similarity built from the truth itself: any sensible
  // matcher must recover the bijection
  const auto g = generate_plant(1, 8, 55);
  const auto [copy, truth] = perturb(g, PerturbParams{0, 0, 0, 2});
  std::vector<std::string> rows, cols;
  for (const auto& n : g.nodes()) rows.push_back(n.id);
  for (const auto& n : copy.nodes()) cols.push_back(n.id);
  SimilarityMatrix k(rows, cols);
  for (const auto& [s, t] : truth) k.at(g.node_index(s), copy.node_index(t)) = 1.0;

  const auto via_dspfp = dspfp(g, copy, k, DspfpParams{});
  EXPECT_DOUBLE_EQ(recall(via_dspfp, truth), 1.0);

  AnnealParams p;
  p.seed = 8;
  p.max_moves = 200000;
  const auto via_anneal = anneal(g, copy, k, p);
  EXPECT_DOUBLE_EQ(recall(via_anneal, truth), 1.0);
}

// --- brute force oracle ------------------------------------------------------------

TEST(BruteForceAlignTest, SingleNodePair) {
  ProcessGraph g1, g2;
  g1.add_node("a", NodeType::Pump);
  g2.add_node("x", NodeType::Pump);
  SimilarityConfig cfg;
  const auto a = brute_force_align(g1, g2, similarity_matrix(g1, g2, cfg), 0.5, 0.5);
  ASSERT_EQ(a.pairs.size(), 1u);
  EXPECT_EQ(a.pairs[0], (std::pair<std::string, std::string>{"a", "x"}));
}

TEST(BruteForceAlignTest, IdenticalTypedPathsAlignIdentically) {
  auto make = [](const std::string& p) {
    ProcessGraph g;
    g.add_node(p + "a", NodeType::Pump);
    g.add_node(p + "b", NodeType::Refiner);
    g.add_node(p + "c", NodeType::Screen);
    g.add_edge("e1", 0, 1, {});
    g.add_edge("e2", 1, 2, {});
    return g;
  };
  const auto g1 = make("s_");
  const auto g2 = make("t_");
  SimilarityConfig cfg;
  cfg.measure = SimilarityMeasure::TypeOnly;
  const auto a = brute_force_align(g1, g2, similarity_matrix(g1, g2, cfg), 0.5, 0.5);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.pairs[i].first, g1.node(i).id);
    EXPECT_EQ(a.pairs[i].second, g2.node(i).id);
  }
}

TEST(BruteForceAlignTest, BeatsRandomInjections) {
  const auto g1 = combine_multi_edges(testing::random_process_graph(61, 5, 5));
  const auto g2 = combine_multi_edges(testing::random_process_graph(62, 7, 7));
  const auto k = neighbor_matrix(g1, g2);
  const auto oracle = brute_force_align(g1, g2, k, 0.5, 0.5);
  MatchObjective objective(g1, g2, k, 0.5, 0.5, true);

  Rng rng(5);
  std::vector<std::uint32_t> targets(g2.node_count());
  for (std::uint32_t i = 0; i < targets.size(); ++i) targets[i] = i;
  for (int trial = 0; trial < 1000; ++trial) {
    rng.shuffle(targets);
    std::vector<std::uint32_t> mapping(targets.begin(),
                                       targets.begin() + g1.node_count());
    EXPECT_LE(objective.evaluate(mapping), oracle.score + 1e-12);
  }
}

TEST(BruteForceAlignTest, ScoreMatchesIndependentReEvaluation) {
  const auto g1 = combine_multi_edges(testing::random_process_graph(71, 4, 6));
  const auto g2 = combine_multi_edges(testing::random_process_graph(72, 6, 7));
  const auto k = neighbor_matrix(g1, g2);
  const auto a = brute_force_align(g1, g2, k, 0.3, 0.7);
  MatchObjective objective(g1, g2, k, 0.3, 0.7, true);
  EXPECT_NEAR(objective.evaluate(index_mapping(g1, g2, a)), a.score, 1e-12);
}

TEST(BruteForceAlignTest, RejectsOversizedInstances) {
  const auto g = generate_plant(1, 4, 1);  // well over 7 nodes with pipes
  SimilarityConfig cfg;
  EXPECT_THROW(brute_force_align(g, g, similarity_matrix(g, g, cfg), 0.5, 0.5), Error);
}

// --- sweeps -------------------------------------------------------------------------

struct SweepFixture {
  ProcessGraph source, target;
  TruthSet truth;
  SimilarityMatrix k;

  SweepFixture() {
    const auto plant = generate_plant(calibration::kSweepPlantSections,
                                      calibration::kSweepPlantSectionSize,
                                      calibration::kSweepPlantSeed);
    auto perturbed = perturb(plant, PerturbParams{0.05, 0.2, 0.3,
                                                  calibration::kSweepPerturbSeed});
    source = apply_profile(plant, SimplifyProfile::Simp2);
    target = apply_profile(perturbed.graph, SimplifyProfile::Simp2);
    for (const auto& [s, t] : perturbed.truth)
      if (source.find_node(s) && target.find_node(t)) truth.emplace(s, t);
    k = neighbor_matrix(source, target);
  }
};

TEST(SweepRuntimeTest, SingleBudgetGivesSingleRow) {
  const SweepFixture f;
  AnnealParams base;
  base.seed = 1;
  const auto rows = sweep_runtime(f.source, f.target, f.k, base, {500.0}, true, &f.truth);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].recall.has_value());
}

TEST(SweepRuntimeTest, LargerBudgetsReachAtLeastSmallBudgetObjectives) {
  const SweepFixture f;
  int large_wins = 0;
  for (int seed = 1; seed <= calibration::kRuntimeSweepSeeds; ++seed) {
    AnnealParams base;
    base.seed = static_cast<std::uint64_t>(seed);
    const auto rows = sweep_runtime(f.source, f.target, f.k, base,
                                    {calibration::kRuntimeSmallBudgetMoves,
                                     calibration::kRuntimeLargeBudgetMoves},
                                    true, &f.truth);
    ASSERT_EQ(rows.size(), 2u);
    if (rows[1].objective >= rows[0].objective - 1e-12) ++large_wins;
  }
  EXPECT_GE(large_wins, calibration::kRuntimeLargeAtLeastSmall);
}

TEST(SweepWeightsTest, DegenerateGridAndRowCount) {
  const SweepFixture f;
  AnnealParams base;
  base.seed = 2;
  base.max_moves = 2000;
  const auto one = sweep_weights(f.source, f.target, f.k, {{1.0, 0.0}}, base, &f.truth);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].w_wec, 1.0);

  const auto grid = sweep_weights(f.source, f.target, f.k, weight_grid_tenths(), base,
                                  nullptr);
  EXPECT_EQ(grid.size(), 11u);
  EXPECT_THROW(sweep_weights(f.source, f.target, f.k, {{0.5, 0.4}}, base, nullptr), Error);
}

TEST(SweepWeightsTest, BalancedWeightsBeatPureObjectivesOnCalibratedFixture) {
  const SweepFixture f;
  AnnealParams base;
  base.seed = calibration::kWeightsAnnealSeed;
  base.max_moves = calibration::kWeightsMoves;
  const auto rows = sweep_weights(f.source, f.target, f.k,
                                  {{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}}, base, &f.truth);
  ASSERT_EQ(rows.size(), 3u);
  const double pure_wec = rows[0].recall.value();
  const double balanced = rows[1].recall.value();
  const double pure_sim = rows[2].recall.value();
  EXPECT_GE(balanced, pure_wec);
  EXPECT_GE(balanced, pure_sim);
}

}  // namespace
}  // namespace plantmatch
