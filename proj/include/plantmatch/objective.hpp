// objective.hpp - edge conservation and the WEC + node-similarity objective.
//
// One shared definition used by the annealer, the brute-force oracle and the
// quality measures:
//   J(f) = w_wec * WEC(f) + w_sim * NodeSim(f)
//   NodeSim(f) = (1/|V1|) * sum_u k(u, f(u))
//   WEC(f)     = [sum over conserved edges (u,v) of (k(u,f(u)) + k(v,f(v))) / 2]
//                / min(|E1|, |E2|)
// An edge (u,v) of g1 is conserved when g2 has an edge f(u) -> f(v) in the
// same direction and, when flow labels are respected, with compatible flows.
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "plantmatch/graph.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch {

// Hashed view of a graph's directed adjacency with the flow sets per node
// pair, for O(1) conservation tests.
class TargetAdjacency {
 public:
  explicit TargetAdjacency(const ProcessGraph& g) : n_(g.node_count()) {
    for (const auto& e : g.edges())
      flows_by_pair_[key(e.source, e.target)].push_back(e.flows);
  }

  bool conserved(std::uint32_t s, std::uint32_t t, FlowGroupSet source_flows,
                 bool respect_flow_labels) const {
    auto it = flows_by_pair_.find(key(s, t));
    if (it == flows_by_pair_.end()) return false;
    if (!respect_flow_labels) return true;
    for (FlowGroupSet f : it->second)
      if (edge_compatible(source_flows, f)) return true;
    return false;
  }

 private:
  std::uint64_t key(std::uint32_t s, std::uint32_t t) const {
    return static_cast<std::uint64_t>(s) * n_ + t;
  }

  std::uint64_t n_;
  std::unordered_map<std::uint64_t, std::vector<FlowGroupSet>> flows_by_pair_;
};

// Objective evaluator over index mappings (mapping[u] = target index, or
// kUnmapped). Mappings shorter than |V1| are not permitted; unmapped slots
// simply contribute nothing.
class MatchObjective {
 public:
  static constexpr std::uint32_t kUnmapped = 0xffffffffu;

  MatchObjective(const ProcessGraph& g1, const ProcessGraph& g2, const SimilarityMatrix& k,
                 double w_wec, double w_sim, bool respect_flow_labels)
      : g1_(&g1),
        g2_(&g2),
        k_(&k),
        target_adj_(g2),
        w_wec_(w_wec),
        w_sim_(w_sim),
        respect_flow_labels_(respect_flow_labels) {
    if (k.rows() != g1.node_count() || k.cols() != g2.node_count())
      throw Error("similarity matrix dimensions do not match the graphs");
    wec_denom_ = static_cast<double>(std::min(g1.edge_count(), g2.edge_count()));
    // deduplicated incident edge lists (a self-loop is in both in and out)
    incident_.resize(g1.node_count());
    for (std::uint32_t u = 0; u < g1.node_count(); ++u) {
      auto& list = incident_[u];
      list = g1.out_edges(u);
      for (auto e : g1.in_edges(u))
        if (g1.edge(e).source != u) list.push_back(e);
    }
  }

  const ProcessGraph& source() const { return *g1_; }
  const ProcessGraph& target() const { return *g2_; }
  const SimilarityMatrix& similarity() const { return *k_; }
  bool respects_flow_labels() const { return respect_flow_labels_; }

  // Edges of g1 touching u, each edge listed once.
  const std::vector<std::uint32_t>& incident_edges(std::uint32_t u) const {
    return incident_[u];
  }

  bool edge_conserved(std::uint32_t e, const std::vector<std::uint32_t>& mapping) const {
    const Edge& ed = g1_->edge(e);
    const std::uint32_t s = mapping[ed.source];
    const std::uint32_t t = mapping[ed.target];
    if (s == kUnmapped || t == kUnmapped) return false;
    return target_adj_.conserved(s, t, ed.flows, respect_flow_labels_);
  }

  // Conserved-edge contribution to the (unnormalized) WEC sum.
  double edge_weight(std::uint32_t e, const std::vector<std::uint32_t>& mapping) const {
    if (!edge_conserved(e, mapping)) return 0.0;
    const Edge& ed = g1_->edge(e);
    return 0.5 * ((*k_)(ed.source, mapping[ed.source]) + (*k_)(ed.target, mapping[ed.target]));
  }

  double node_weight(std::uint32_t u, std::uint32_t target) const {
    return target == kUnmapped ? 0.0 : (*k_)(u, target);
  }

  // J from running sums of edge weights and node similarities.
  double combine(double wec_sum, double sim_sum) const {
    const double wec = wec_denom_ > 0.0 ? wec_sum / wec_denom_ : 0.0;
    const double n1 = static_cast<double>(g1_->node_count());
    const double sim = n1 > 0.0 ? sim_sum / n1 : 0.0;
    return w_wec_ * wec + w_sim_ * sim;
  }

  double evaluate(const std::vector<std::uint32_t>& mapping) const {
    double wec_sum = 0.0;
    for (std::uint32_t e = 0; e < g1_->edge_count(); ++e) wec_sum += edge_weight(e, mapping);
    double sim_sum = 0.0;
    for (std::uint32_t u = 0; u < g1_->node_count(); ++u)
      sim_sum += node_weight(u, mapping[u]);
    return combine(wec_sum, sim_sum);
  }

  std::size_t conserved_count(const std::vector<std::uint32_t>& mapping) const {
    std::size_t c = 0;
    for (std::uint32_t e = 0; e < g1_->edge_count(); ++e)
      if (edge_conserved(e, mapping)) ++c;
    return c;
  }

  double wec_denominator() const { return wec_denom_; }

 private:
  const ProcessGraph* g1_;
  const ProcessGraph* g2_;
  const SimilarityMatrix* k_;
  TargetAdjacency target_adj_;
  double w_wec_;
  double w_sim_;
  bool respect_flow_labels_;
  double wec_denom_ = 0.0;
  std::vector<std::vector<std::uint32_t>> incident_;
};

// Converts an id-level alignment into an index mapping for the objective.
inline std::vector<std::uint32_t> index_mapping(const ProcessGraph& g1,
                                                const ProcessGraph& g2,
                                                const Alignment& a) {
  std::vector<std::uint32_t> mapping(g1.node_count(), MatchObjective::kUnmapped);
  for (const auto& [s, t] : a.pairs) {
    const std::uint32_t u = g1.node_index(s);
    if (mapping[u] != MatchObjective::kUnmapped)
      throw Error("alignment maps source '" + s + "' twice");
    mapping[u] = g2.node_index(t);
  }
  return mapping;
}

}  // namespace plantmatch
