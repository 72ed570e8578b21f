// evaluate.hpp - recall against handpicked truth, similarity filtering and
// the experiment sweeps.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plantmatch/alignment.hpp"
#include "plantmatch/anneal.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/objective.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch {

// Handpicked correct matches; may contain many-to-one relations.
using TruthSet = std::set<std::pair<std::string, std::string>>;

// Fraction of truth pairs present in the prediction. Empty predictions score
// 0; an empty truth set leaves the ratio undefined and is rejected.
inline double recall(const MatchSet& predicted, const TruthSet& truth) {
  if (truth.empty()) throw Error("recall: truth set is empty");
  std::size_t hit = 0;
  for (const auto& t : truth)
    if (predicted.count(t)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline double recall(const Alignment& predicted, const TruthSet& truth) {
  return recall(to_match_set(predicted), truth);
}

struct ScoredMatch {
  std::pair<std::string, std::string> pair;
  double similarity = 0.0;
};

// Keeps exactly the matches whose similarity reaches the limit.
inline std::vector<ScoredMatch> filter_matches(const std::vector<ScoredMatch>& matches,
                                               double limit) {
  std::vector<ScoredMatch> out;
  for (const auto& m : matches)
    if (m.similarity >= limit) out.push_back(m);
  return out;
}

struct FilterSweepRow {
  double limit = 0.0;
  std::size_t retained = 0;
  double recall = 0.0;
};

inline std::vector<FilterSweepRow> sweep_filter(const std::vector<ScoredMatch>& matches,
                                                const TruthSet& truth,
                                                const std::vector<double>& limits) {
  if (!std::is_sorted(limits.begin(), limits.end()))
    throw Error("sweep_filter: limits must be sorted ascending");
  std::vector<FilterSweepRow> rows;
  rows.reserve(limits.size());
  for (double limit : limits) {
    const auto kept = filter_matches(matches, limit);
    MatchSet set;
    for (const auto& m : kept) set.insert(m.pair);
    rows.push_back({limit, kept.size(), recall(set, truth)});
  }
  return rows;
}

struct RuntimeSweepRow {
  double budget = 0.0;  // seconds, or moves when budgets are move counts
  std::optional<double> recall;
  double objective = 0.0;
};

// One annealer run per budget with the base parameters. Budgets are seconds
// by default; with budgets_are_moves they are deterministic move counts.
inline std::vector<RuntimeSweepRow> sweep_runtime(
    const ProcessGraph& g1, const ProcessGraph& g2, const SimilarityMatrix& k,
    const AnnealParams& base, const std::vector<double>& budgets, bool budgets_are_moves,
    const TruthSet* truth) {
  std::vector<RuntimeSweepRow> rows;
  rows.reserve(budgets.size());
  for (double budget : budgets) {
    AnnealParams p = base;
    if (budgets_are_moves) {
      if (budget < 1.0) throw Error("sweep_runtime: move budget must be >= 1");
      p.max_moves = static_cast<std::uint64_t>(budget);
    } else {
      if (!(budget > 0.0)) throw Error("sweep_runtime: budget must be positive");
      p.budget_seconds = budget;
      p.max_moves = 0;
    }
    const Alignment a = anneal(g1, g2, k, p);
    RuntimeSweepRow row;
    row.budget = budget;
    row.objective = a.score;
    if (truth) row.recall = recall(a, *truth);
    rows.push_back(row);
  }
  return rows;
}

struct WeightSweepRow {
  double w_wec = 0.0;
  double w_sim = 0.0;
  std::optional<double> recall;
  double objective = 0.0;
};

inline std::vector<WeightSweepRow> sweep_weights(
    const ProcessGraph& g1, const ProcessGraph& g2, const SimilarityMatrix& k,
    const std::vector<std::pair<double, double>>& weights, const AnnealParams& base,
    const TruthSet* truth) {
  std::vector<WeightSweepRow> rows;
  rows.reserve(weights.size());
  for (const auto& [w_wec, w_sim] : weights) {
    if (std::abs(w_wec + w_sim - 1.0) > 1e-9)
      throw Error("sweep_weights: each weight pair must sum to 1");
    AnnealParams p = base;
    p.w_wec = w_wec;
    p.w_sim = w_sim;
    const Alignment a = anneal(g1, g2, k, p);
    WeightSweepRow row;
    row.w_wec = w_wec;
    row.w_sim = w_sim;
    row.objective = a.score;
    if (truth) row.recall = recall(a, *truth);
    rows.push_back(row);
  }
  return rows;
}

// The default 11-point weight grid in increments of 0.1.
inline std::vector<std::pair<double, double>> weight_grid_tenths() {
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i <= 10; ++i)
    grid.emplace_back(static_cast<double>(i) / 10.0, static_cast<double>(10 - i) / 10.0);
  return grid;
}

// Exhaustive oracle over all injective maps V1 -> V2, maximizing the same
// objective as the annealer. Ties resolve to the lexicographically first
// mapping. Factorial search; inputs are capped at |V1| <= 6, |V2| <= 7.
inline Alignment brute_force_align(const ProcessGraph& g1, const ProcessGraph& g2,
                                   const SimilarityMatrix& k, double w_wec, double w_sim,
                                   bool respect_flow_labels = true) {
  const std::size_t n1 = g1.node_count();
  const std::size_t n2 = g2.node_count();
  if (n1 > 6 || n2 > 7)
    throw Error("brute_force_align: size bound exceeded (|V1| <= 6, |V2| <= 7)");
  if (n1 > n2) throw Error("brute_force_align: |V1| must not exceed |V2|");

  Alignment out;
  out.matcher = "brute_force";
  if (n1 == 0) return out;

  MatchObjective objective(g1, g2, k, w_wec, w_sim, respect_flow_labels);
  std::vector<std::uint32_t> mapping(n1, MatchObjective::kUnmapped);
  std::vector<char> used(n2, 0);
  std::vector<std::uint32_t> best_mapping;
  double best = -1.0;

  auto search = [&](auto&& self, std::size_t u) -> void {
    if (u == n1) {
      const double j = objective.evaluate(mapping);
      if (j > best) {
        best = j;
        best_mapping = mapping;
      }
      return;
    }
    for (std::uint32_t t = 0; t < n2; ++t) {
      if (used[t]) continue;
      used[t] = 1;
      mapping[u] = t;
      self(self, u + 1);
      used[t] = 0;
    }
    mapping[u] = MatchObjective::kUnmapped;
  };
  search(search, 0);

  for (std::uint32_t u = 0; u < n1; ++u)
    out.pairs.emplace_back(g1.node(u).id, g2.node(best_mapping[u]).id);
  out.score = best;
  return out;
}

}  // namespace plantmatch
