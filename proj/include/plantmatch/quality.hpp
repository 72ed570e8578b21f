// quality.hpp - alignment quality measures EC, ICS, S3 and WEC.
//
// c is the number of conserved source edges, E_ind the target edges whose
// endpoints both lie in the image of the alignment:
//   EC  = c / |E1|
//   ICS = c / |E_ind|
//   S3  = c / (|E1| + |E_ind| - c)
//   WEC = conserved-edge weight sum / min(|E1|, |E2|)
// Each ratio is 0 when its denominator vanishes. The measures assume simple
// graphs (apply combine_multi_edges first); on multigraphs parallel source
// edges conserved through one target edge can push ICS past 1.
#pragma once

#include <unordered_set>

#include "plantmatch/alignment.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/objective.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch {

struct QualityScores {
  double ec = 0.0;
  double ics = 0.0;
  double s3 = 0.0;
  double wec = 0.0;
};

inline QualityScores quality_measures(const ProcessGraph& g1, const ProcessGraph& g2,
                                      const Alignment& f, const SimilarityMatrix& k,
                                      bool respect_flow_labels = true) {
  if (!f.sources_unique()) throw Error("quality_measures: alignment repeats a source node");
  if (!f.injective()) throw Error("quality_measures: alignment is not 1-to-1");
  const auto mapping = index_mapping(g1, g2, f);
  MatchObjective objective(g1, g2, k, 1.0, 0.0, respect_flow_labels);

  std::size_t conserved = 0;
  double weight_sum = 0.0;
  for (std::uint32_t e = 0; e < g1.edge_count(); ++e) {
    if (!objective.edge_conserved(e, mapping)) continue;
    ++conserved;
    weight_sum += objective.edge_weight(e, mapping);
  }

  std::unordered_set<std::uint32_t> image;
  for (auto t : mapping)
    if (t != MatchObjective::kUnmapped) image.insert(t);
  std::size_t induced = 0;
  for (const auto& e : g2.edges())
    if (image.count(e.source) && image.count(e.target)) ++induced;

  const auto c = static_cast<double>(conserved);
  const auto e1 = static_cast<double>(g1.edge_count());
  const auto e_ind = static_cast<double>(induced);

  QualityScores q;
  q.ec = e1 > 0.0 ? c / e1 : 0.0;
  q.ics = e_ind > 0.0 ? c / e_ind : 0.0;
  const double s3_denom = e1 + e_ind - c;
  q.s3 = s3_denom > 0.0 ? c / s3_denom : 0.0;
  q.wec = objective.wec_denominator() > 0.0 ? weight_sum / objective.wec_denominator() : 0.0;
  return q;
}

}  // namespace plantmatch
