// similarity.hpp - node similarity measures and the pairwise score matrix.
//
// Four measures, combined per
//   (a * neighborScore + (1 - a) * anchorScore) * nodeTypeScore
// with the degenerate cases: TypeOnly fixes the bracket to 1, Neighbor sets
// a = 1, Anchor sets a = 0.
//
// The neighborhood measure divides by the degree of the *source* node, so
// the matrix is asymmetric: g1 is always the source side.
#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "plantmatch/graph.hpp"

namespace plantmatch {

// ---------------------------------------------------------------------------
// Type- and edge-level scores

// Node type similarity. Tank size classes compare like distinct known types,
// except that a tank of unknown size scores 0.8 against any tank. A
// combination of an unknown type with anything known (tank or not) is 0.5;
// two unknowns are 0.8.
inline double node_type_score(NodeType a, NodeType b) {
  if (a == NodeType::Unknown || b == NodeType::Unknown) return a == b ? 0.8 : 0.5;
  if (is_tank(a) && is_tank(b)) {
    if (a == NodeType::UnknownSizeTank || b == NodeType::UnknownSizeTank) return 0.8;
    return a == b ? 1.0 : 0.0;
  }
  return a == b ? 1.0 : 0.0;
}

// Binary neighbor-type test: same known type, or either side unknown.
// Mirrors the tank handling of node_type_score.
inline bool neighbor_type_compatible(NodeType a, NodeType b) {
  if (a == NodeType::Unknown || b == NodeType::Unknown) return true;
  if (is_tank(a) && is_tank(b))
    return a == b || a == NodeType::UnknownSizeTank || b == NodeType::UnknownSizeTank;
  return a == b;
}

// Edge flow compatibility: at least one shared flow group, or either side
// unknown (the empty set).
inline bool edge_compatible(FlowGroupSet a, FlowGroupSet b) {
  return a.empty() || b.empty() || a.intersects(b);
}

// ---------------------------------------------------------------------------
// Maximum bipartite matching on a 0/1 compatibility matrix

namespace detail {

// Kuhn's augmenting-path algorithm. Returns the size of a maximum matching;
// on a binary matrix this equals the Hungarian assignment count.
inline int max_bipartite_match(const std::vector<std::vector<char>>& compat) {
  const std::size_t rows = compat.size();
  const std::size_t cols = rows == 0 ? 0 : compat[0].size();
  std::vector<int> col_match(cols, -1);
  std::vector<char> visited(cols, 0);

  auto augment = [&](auto&& self, std::size_t r) -> bool {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!compat[r][c] || visited[c]) continue;
      visited[c] = 1;
      if (col_match[c] < 0 || self(self, static_cast<std::size_t>(col_match[c]))) {
        col_match[c] = static_cast<int>(r);
        return true;
      }
    }
    return false;
  };

  int matched = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill(visited.begin(), visited.end(), 0);
    if (augment(augment, r)) ++matched;
  }
  return matched;
}

// Per-edge neighbor descriptor: the neighbor's type plus the flows of the
// connecting edge. Multi-edges yield one descriptor per edge.
struct NeighborDesc {
  NodeType type;
  FlowGroupSet flows;
};

inline std::vector<NeighborDesc> in_neighbor_descs(const ProcessGraph& g, std::uint32_t u) {
  std::vector<NeighborDesc> out;
  out.reserve(g.in_edges(u).size());
  for (auto e : g.in_edges(u))
    out.push_back({g.node(g.edge(e).source).type, g.edge(e).flows});
  return out;
}

inline std::vector<NeighborDesc> out_neighbor_descs(const ProcessGraph& g, std::uint32_t u) {
  std::vector<NeighborDesc> out;
  out.reserve(g.out_edges(u).size());
  for (auto e : g.out_edges(u))
    out.push_back({g.node(g.edge(e).target).type, g.edge(e).flows});
  return out;
}

inline int matched_neighbor_count(const std::vector<NeighborDesc>& a,
                                  const std::vector<NeighborDesc>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::vector<char>> compat(a.size(), std::vector<char>(b.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      compat[i][j] = neighbor_type_compatible(a[i].type, b[j].type) &&
                             edge_compatible(a[i].flows, b[j].flows)
                         ? 1
                         : 0;
  return max_bipartite_match(compat);
}

}  // namespace detail

// Fraction of u's neighbors that can be paired with compatible neighbors of
// v, in-neighbors with in-neighbors and out-neighbors with out-neighbors.
// Normalized by deg(u); a degree-0 source node scores 0.
inline double neighborhood_score(const ProcessGraph& g1, std::uint32_t u,
                                 const ProcessGraph& g2, std::uint32_t v) {
  const std::size_t deg = g1.degree(u);
  if (deg == 0) return 0.0;
  const int m_in = detail::matched_neighbor_count(detail::in_neighbor_descs(g1, u),
                                                  detail::in_neighbor_descs(g2, v));
  const int m_out = detail::matched_neighbor_count(detail::out_neighbor_descs(g1, u),
                                                   detail::out_neighbor_descs(g2, v));
  return static_cast<double>(m_in + m_out) / static_cast<double>(deg);
}

inline double neighborhood_score(const ProcessGraph& g1, std::string_view u,
                                 const ProcessGraph& g2, std::string_view v) {
  return neighborhood_score(g1, g1.node_index(u), g2, g2.node_index(v));
}

// ---------------------------------------------------------------------------
// Anchor similarity

// Ordered anchor pairs; element order defines the anchor-vector layout.
struct AnchorSet {
  std::vector<std::pair<std::string, std::string>> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }

  std::vector<std::string> source_ids() const {
    std::vector<std::string> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.first);
    return out;
  }
  std::vector<std::string> target_ids() const {
    std::vector<std::string> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.second);
    return out;
  }
};

// Element 2i is the influence of anchor i downstream (anchor -> node),
// element 2i+1 upstream (node -> anchor), both through r(x) = exp(-x/sigma1)
// with r(infinity) = 0.
using AnchorVector = std::vector<double>;

namespace detail {

inline constexpr int kUnreachable = -1;

// Unit-weight shortest path lengths from `start` along the chosen direction.
// With unit weights a breadth-first search yields Dijkstra's distances.
inline std::vector<int> bfs_distances(const ProcessGraph& g, std::uint32_t start,
                                      bool forward) {
  std::vector<int> dist(g.node_count(), kUnreachable);
  std::deque<std::uint32_t> queue;
  dist[start] = 0;
  queue.push_back(start);
  while (!queue.empty()) {
    const std::uint32_t n = queue.front();
    queue.pop_front();
    const auto& edges = forward ? g.out_edges(n) : g.in_edges(n);
    for (auto e : edges) {
      const std::uint32_t next = forward ? g.edge(e).target : g.edge(e).source;
      if (dist[next] == kUnreachable) {
        dist[next] = dist[n] + 1;
        queue.push_back(next);
      }
    }
  }
  return dist;
}

inline double anchor_influence(int path_length, double sigma1) {
  if (path_length == kUnreachable) return 0.0;
  return std::exp(-static_cast<double>(path_length) / sigma1);
}

// Index-addressed variant used by the matrix assembly.
inline std::vector<AnchorVector> anchor_vectors_indexed(
    const ProcessGraph& g, const std::vector<std::uint32_t>& anchors, double sigma1) {
  std::vector<AnchorVector> vectors(g.node_count(), AnchorVector(2 * anchors.size(), 0.0));
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const auto down = bfs_distances(g, anchors[a], true);   // anchor -> node
    const auto up = bfs_distances(g, anchors[a], false);    // node -> anchor
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      vectors[n][2 * a] = anchor_influence(down[n], sigma1);
      vectors[n][2 * a + 1] = anchor_influence(up[n], sigma1);
    }
  }
  return vectors;
}

}  // namespace detail

inline std::unordered_map<std::string, AnchorVector> anchor_vectors(
    const ProcessGraph& g, const std::vector<std::string>& anchor_ids, double sigma1) {
  std::vector<std::uint32_t> anchors;
  anchors.reserve(anchor_ids.size());
  for (const auto& id : anchor_ids) anchors.push_back(g.node_index(id));
  auto indexed = detail::anchor_vectors_indexed(g, anchors, sigma1);
  std::unordered_map<std::string, AnchorVector> out;
  out.reserve(g.node_count());
  for (std::uint32_t n = 0; n < g.node_count(); ++n)
    out.emplace(g.node(n).id, std::move(indexed[n]));
  return out;
}

// Gaussian similarity of two anchor vectors: exp(-|v1 - v2|^2 / sigma2).
inline double anchor_score(const AnchorVector& v1, const AnchorVector& v2, double sigma2) {
  if (v1.size() != v2.size())
    throw Error("anchor vectors have different lengths (" + std::to_string(v1.size()) +
                " vs " + std::to_string(v2.size()) + ")");
  double sq = 0.0;
  for (std::size_t i = 0; i < v1.size(); ++i) {
    const double d = v1[i] - v2[i];
    sq += d * d;
  }
  return std::exp(-sq / sigma2);
}

// ---------------------------------------------------------------------------
// Combination

inline double combined_score(double type_score, double neighbor_score, double anchor_score,
                             double a) {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(std::string(name) + " outside [0,1]: " + std::to_string(v));
  };
  check(type_score, "type score");
  check(neighbor_score, "neighbor score");
  check(anchor_score, "anchor score");
  check(a, "weight a");
  return (a * neighbor_score + (1.0 - a) * anchor_score) * type_score;
}

// ---------------------------------------------------------------------------
// Matrix assembly

enum class SimilarityMeasure { TypeOnly, Neighbor, Anchor, Combined };

constexpr std::string_view to_string(SimilarityMeasure m) {
  switch (m) {
    case SimilarityMeasure::TypeOnly: return "type";
    case SimilarityMeasure::Neighbor: return "neighbor";
    case SimilarityMeasure::Anchor: return "anchor";
    case SimilarityMeasure::Combined: return "combined";
  }
  return "type";
}

inline SimilarityMeasure parse_similarity_measure(std::string_view s) {
  const std::string key = detail::normalize_token(s);
  if (key == "type" || key == "typeonly") return SimilarityMeasure::TypeOnly;
  if (key == "neighbor" || key == "neighbour") return SimilarityMeasure::Neighbor;
  if (key == "anchor") return SimilarityMeasure::Anchor;
  if (key == "combined") return SimilarityMeasure::Combined;
  throw Error("unknown similarity measure '" + std::string(s) + "'");
}

struct SimilarityConfig {
  SimilarityMeasure measure = SimilarityMeasure::TypeOnly;
  double a = 0.5;        // Combined only; Neighbor behaves as a=1, Anchor as a=0
  double sigma1 = 5.0;   // anchor influence decay
  double sigma2 = 1.0;   // anchor vector comparison width
  AnchorSet anchors;     // required for Anchor/Combined
};

// Dense score matrix over source rows and target columns, with the node
// orderings recorded so entries stay tied to ids.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids)
      : rows_(row_ids.size()),
        cols_(col_ids.size()),
        values_(rows_ * cols_, 0.0),
        row_ids_(std::move(row_ids)),
        col_ids_(std::move(col_ids)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }
  const std::vector<double>& values() const { return values_; }

  SimilarityMatrix transposed() const {
    SimilarityMatrix t(col_ids_, row_ids_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
};

inline SimilarityMatrix similarity_matrix(const ProcessGraph& g1, const ProcessGraph& g2,
                                          const SimilarityConfig& cfg) {
  if (!(cfg.a >= 0.0 && cfg.a <= 1.0)) throw Error("weight a outside [0,1]");
  if (cfg.sigma1 <= 0.0 || cfg.sigma2 <= 0.0) throw Error("sigma parameters must be positive");

  const bool use_neighbor = cfg.measure == SimilarityMeasure::Neighbor ||
                            cfg.measure == SimilarityMeasure::Combined;
  const bool use_anchor = cfg.measure == SimilarityMeasure::Anchor ||
                          cfg.measure == SimilarityMeasure::Combined;

  std::vector<AnchorVector> av1, av2;
  if (use_anchor) {
    if (cfg.anchors.empty())
      throw Error("similarity measure '" + std::string(to_string(cfg.measure)) +
                  "' requires a non-empty anchor set");
    std::vector<std::uint32_t> a1, a2;
    for (const auto& [s, t] : cfg.anchors.pairs) {
      a1.push_back(g1.node_index(s));
      a2.push_back(g2.node_index(t));
    }
    av1 = detail::anchor_vectors_indexed(g1, a1, cfg.sigma1);
    av2 = detail::anchor_vectors_indexed(g2, a2, cfg.sigma1);
  }

  std::vector<std::vector<detail::NeighborDesc>> in1, out1, in2, out2;
  if (use_neighbor) {
    in1.resize(g1.node_count());
    out1.resize(g1.node_count());
    for (std::uint32_t u = 0; u < g1.node_count(); ++u) {
      in1[u] = detail::in_neighbor_descs(g1, u);
      out1[u] = detail::out_neighbor_descs(g1, u);
    }
    in2.resize(g2.node_count());
    out2.resize(g2.node_count());
    for (std::uint32_t v = 0; v < g2.node_count(); ++v) {
      in2[v] = detail::in_neighbor_descs(g2, v);
      out2[v] = detail::out_neighbor_descs(g2, v);
    }
  }

  std::vector<std::string> row_ids, col_ids;
  for (const auto& n : g1.nodes()) row_ids.push_back(n.id);
  for (const auto& n : g2.nodes()) col_ids.push_back(n.id);
  SimilarityMatrix m(std::move(row_ids), std::move(col_ids));

  const double a = cfg.measure == SimilarityMeasure::Neighbor  ? 1.0
                   : cfg.measure == SimilarityMeasure::Anchor  ? 0.0
                                                               : cfg.a;
  for (std::uint32_t u = 0; u < g1.node_count(); ++u) {
    const std::size_t deg_u = g1.degree(u);
    for (std::uint32_t v = 0; v < g2.node_count(); ++v) {
      const double type = node_type_score(g1.node(u).type, g2.node(v).type);
      if (cfg.measure == SimilarityMeasure::TypeOnly) {
        m.at(u, v) = type;
        continue;
      }
      double neighbor = 0.0;
      if (use_neighbor && deg_u > 0) {
        const int m_in = detail::matched_neighbor_count(in1[u], in2[v]);
        const int m_out = detail::matched_neighbor_count(out1[u], out2[v]);
        neighbor = static_cast<double>(m_in + m_out) / static_cast<double>(deg_u);
      }
      const double anchor = use_anchor ? anchor_score(av1[u], av2[v], cfg.sigma2) : 0.0;
      m.at(u, v) = (a * neighbor + (1.0 - a) * anchor) * type;
    }
  }
  return m;
}

}  // namespace plantmatch
