// flooding.hpp - similarity flooding over the pairwise connectivity graph.
//
// Pair nodes (a, b) in V1 x V2 exchange similarity along label-compatible
// edge pairs using inverse-product propagation coefficients, iterating the
// fixpoint formula
//   sigma_{i+1} = normalize(sigma0 + sigma_i + phi(sigma0 + sigma_i))
// with divide-by-max normalization. The selectThreshold filter then keeps
// pairs whose score reaches t_rel times both its row and its column maximum;
// at t_rel = 1 these are exactly the simultaneous row and column maxima.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "plantmatch/alignment.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch {

struct FloodParams {
  double eps = 1e-5;
  int max_iter = 100;
  double t_rel = 1.0;
  bool apply_type_filter = true;

  void validate() const {
    if (!(eps > 0.0)) throw Error("similarity_flooding: eps must be positive");
    if (max_iter < 1) throw Error("similarity_flooding: max_iter must be >= 1");
    if (!(t_rel > 0.0 && t_rel <= 1.0))
      throw Error("similarity_flooding: t_rel must be in (0,1]");
  }
};

namespace detail {

struct PropagationArc {
  std::uint32_t from;  // flattened pair index a * n2 + b
  std::uint32_t to;
  double coeff;
};

// An edge "carries" a flow group when the group is in its flow set, or when
// the set is empty: the unknown flow acts as a wildcard for every label.
inline bool carries(FlowGroupSet flows, std::size_t label) {
  return flows.empty() || flows.contains(static_cast<FlowGroup>(label));
}

// Builds the propagation arcs of the pairwise connectivity graph with
// inverse-product coefficients; coefficients of multiple shared labels on an
// edge pair accumulate.
inline std::vector<PropagationArc> build_arcs(const ProcessGraph& g1,
                                              const ProcessGraph& g2) {
  const std::size_t n2 = g2.node_count();

  // Per-label counts of carrying edges, per node.
  auto label_counts = [](const ProcessGraph& g) {
    std::vector<std::array<std::uint32_t, kFlowGroupCount>> out(
        g.node_count(), std::array<std::uint32_t, kFlowGroupCount>{});
    std::vector<std::array<std::uint32_t, kFlowGroupCount>> in(
        g.node_count(), std::array<std::uint32_t, kFlowGroupCount>{});
    for (const auto& e : g.edges()) {
      for (std::size_t l = 0; l < kFlowGroupCount; ++l) {
        if (!carries(e.flows, l)) continue;
        ++out[e.source][l];
        ++in[e.target][l];
      }
    }
    return std::make_pair(out, in);
  };
  const auto [out1, in1] = label_counts(g1);
  const auto [out2, in2] = label_counts(g2);

  // Accumulate coefficients keyed by (from, to) pair-node indices.
  std::unordered_map<std::uint64_t, double> forward, backward;
  auto flat = [n2](std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint64_t>(a) * n2 + b;
  };
  const std::uint64_t pair_count =
      static_cast<std::uint64_t>(g1.node_count()) * n2;

  for (const auto& e1 : g1.edges()) {
    for (const auto& e2 : g2.edges()) {
      double fwd = 0.0, bwd = 0.0;
      for (std::size_t l = 0; l < kFlowGroupCount; ++l) {
        if (!carries(e1.flows, l) || !carries(e2.flows, l)) continue;
        fwd += 1.0 / (static_cast<double>(out1[e1.source][l]) *
                      static_cast<double>(out2[e2.source][l]));
        bwd += 1.0 / (static_cast<double>(in1[e1.target][l]) *
                      static_cast<double>(in2[e2.target][l]));
      }
      if (fwd == 0.0 && bwd == 0.0) continue;
      const std::uint64_t tail = flat(e1.source, e2.source);
      const std::uint64_t head = flat(e1.target, e2.target);
      if (fwd > 0.0) forward[tail * pair_count + head] += fwd;
      if (bwd > 0.0) backward[head * pair_count + tail] += bwd;
    }
  }

  std::vector<PropagationArc> arcs;
  arcs.reserve(forward.size() + backward.size());
  for (const auto& [key, coeff] : forward)
    arcs.push_back({static_cast<std::uint32_t>(key / pair_count),
                    static_cast<std::uint32_t>(key % pair_count), coeff});
  for (const auto& [key, coeff] : backward)
    arcs.push_back({static_cast<std::uint32_t>(key / pair_count),
                    static_cast<std::uint32_t>(key % pair_count), coeff});
  return arcs;
}

inline Eigen::VectorXd flood_fixpoint(const ProcessGraph& g1, const ProcessGraph& g2,
                                      const SimilarityMatrix& sigma0,
                                      const FloodParams& params) {
  const std::size_t n1 = g1.node_count();
  const std::size_t n2 = g2.node_count();
  const auto arcs = build_arcs(g1, g2);
  const auto total = static_cast<Eigen::Index>(n1 * n2);

  Eigen::VectorXd base(total);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      base(static_cast<Eigen::Index>(i * n2 + j)) = sigma0(i, j);

  Eigen::VectorXd sigma = base;
  Eigen::VectorXd mixed(total), next(total);
  for (int iter = 0; iter < params.max_iter; ++iter) {
    mixed = base + sigma;
    next = mixed;
    for (const auto& arc : arcs) next(arc.to) += arc.coeff * mixed(arc.from);
    const double m = next.maxCoeff();
    if (m > 0.0) next /= m;
    const double delta = (next - sigma).norm();
    sigma.swap(next);
    if (delta < params.eps) break;
  }
  return sigma;
}

}  // namespace detail

// Final propagated scores, exposed for diagnostics and tests; rows and
// columns follow the graphs' node orderings.
inline SimilarityMatrix similarity_flooding_scores(const ProcessGraph& g1,
                                                   const ProcessGraph& g2,
                                                   const SimilarityMatrix& sigma0,
                                                   const FloodParams& params) {
  params.validate();
  const std::size_t n1 = g1.node_count();
  const std::size_t n2 = g2.node_count();
  if (sigma0.rows() != n1 || sigma0.cols() != n2)
    throw Error("similarity_flooding: similarity matrix dimensions do not match the graphs");

  std::vector<std::string> row_ids, col_ids;
  for (const auto& n : g1.nodes()) row_ids.push_back(n.id);
  for (const auto& n : g2.nodes()) col_ids.push_back(n.id);
  SimilarityMatrix result(std::move(row_ids), std::move(col_ids));
  if (n1 == 0 || n2 == 0) return result;

  const Eigen::VectorXd sigma = detail::flood_fixpoint(g1, g2, sigma0, params);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      result.at(i, j) = sigma(static_cast<Eigen::Index>(i * n2 + j));
  return result;
}

inline MatchSet similarity_flooding(const ProcessGraph& g1, const ProcessGraph& g2,
                                    const SimilarityMatrix& sigma0,
                                    const FloodParams& params) {
  const SimilarityMatrix scores = similarity_flooding_scores(g1, g2, sigma0, params);
  const std::size_t n1 = scores.rows();
  const std::size_t n2 = scores.cols();

  std::vector<double> row_max(n1, 0.0), col_max(n2, 0.0);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double v = scores(i, j);
      if (v > row_max[i]) row_max[i] = v;
      if (v > col_max[j]) col_max[j] = v;
    }
  }

  // selectThreshold keeps ties, so the result may be many-to-many. Pairs with
  // zero score are never matches.
  MatchSet out;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double v = scores(i, j);
      if (v <= 0.0) continue;
      if (v < params.t_rel * row_max[i] || v < params.t_rel * col_max[j]) continue;
      if (params.apply_type_filter &&
          node_type_score(g1.node(i).type, g2.node(j).type) == 0.0)
        continue;
      out.emplace(g1.node(i).id, g2.node(j).id);
    }
  }
  return out;
}

}  // namespace plantmatch
