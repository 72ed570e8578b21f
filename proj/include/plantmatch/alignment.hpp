// alignment.hpp - matcher output types.
#pragma once

#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "plantmatch/graph.hpp"

namespace plantmatch {

// Mapping from source-graph nodes to target-graph nodes. Each source id
// appears at most once; 1-to-1 alignments are additionally injective in the
// targets, many-to-1 alignments may repeat targets.
struct Alignment {
  std::vector<std::pair<std::string, std::string>> pairs;
  double score = 0.0;  // matcher objective value, when the matcher has one
  std::string matcher;

  bool injective() const {
    std::unordered_set<std::string> seen;
    for (const auto& [s, t] : pairs)
      if (!seen.insert(t).second) return false;
    return true;
  }

  bool sources_unique() const {
    std::unordered_set<std::string> seen;
    for (const auto& [s, t] : pairs)
      if (!seen.insert(s).second) return false;
    return true;
  }
};

// Possibly many-to-many set of matched pairs.
using MatchSet = std::set<std::pair<std::string, std::string>>;

inline MatchSet to_match_set(const Alignment& a) {
  return MatchSet(a.pairs.begin(), a.pairs.end());
}

}  // namespace plantmatch
