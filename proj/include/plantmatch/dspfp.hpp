// dspfp.hpp - doubly stochastic projected fixed-point matcher.
//
// Outer loop on the relaxed assignment matrix X:
//   G      = A1 X A2' + A1' X A2 + lambda K
//   X_next = (1 - alpha) X + alpha Proj(G)
// where Proj is an alternating row/column (Sinkhorn) normalization toward a
// doubly stochastic matrix. Both loops stop when the L1 change falls below
// eps or after max_iter rounds. The symmetric gradient keeps edge direction
// meaningful without symmetrizing the graphs; rectangular instances are
// squared up with zero-similarity dummy nodes that never reach the output.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "plantmatch/alignment.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/objective.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch {

struct DspfpParams {
  enum class Mode { OneToOne, ManyToOne };

  double alpha = 1.0;
  double lambda = 0.5;
  double eps = 1e-5;
  int max_iter = 100;  // applies to both the inner and the outer loop
  Mode mode = Mode::OneToOne;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("dspfp: alpha must be in (0,1]");
    if (lambda < 0.0) throw Error("dspfp: lambda must be >= 0");
    if (!(eps > 0.0)) throw Error("dspfp: eps must be positive");
    if (max_iter < 1) throw Error("dspfp: max_iter must be >= 1");
  }
};

// Alternating row/column normalization (Sinkhorn iteration) toward a doubly
// stochastic matrix. Requires a square, non-negative input with at least one
// positive entry per row and column.
inline Eigen::MatrixXd ds_projection(Eigen::MatrixXd m, double eps, int max_iter) {
  if (m.rows() != m.cols()) throw Error("ds_projection: matrix must be square");
  if ((m.array() < 0.0).any()) throw Error("ds_projection: matrix must be non-negative");
  const auto n = m.rows();
  if (n == 0) return m;

  for (int sweep = 0; sweep < max_iter; ++sweep) {
    const Eigen::MatrixXd before = m;
    Eigen::VectorXd row_sums = m.rowwise().sum();
    if ((row_sums.array() <= 0.0).any())
      throw Error("ds_projection: zero row encountered");
    m.array().colwise() /= row_sums.array();
    Eigen::VectorXd col_sums = m.colwise().sum();
    if ((col_sums.array() <= 0.0).any())
      throw Error("ds_projection: zero column encountered");
    m.array().rowwise() /= col_sums.transpose().array();
    if ((m - before).cwiseAbs().sum() < eps) break;
  }
  return m;
}

struct DspfpStats {
  int outer_iterations = 0;
  double final_error = 0.0;
  bool converged = false;        // error < eps before hitting max_iter
  double max_row_sum_err = 0.0;  // |row sum - 1| over the final X
  double max_col_sum_err = 0.0;
};

namespace detail {

inline Eigen::MatrixXd directed_adjacency(const ProcessGraph& g, Eigen::Index n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) a(e.source, e.target) = 1.0;
  return a;
}

}  // namespace detail

inline Alignment dspfp(const ProcessGraph& g1, const ProcessGraph& g2,
                       const SimilarityMatrix& k, const DspfpParams& params,
                       DspfpStats* stats = nullptr) {
  params.validate();
  const std::size_t n1 = g1.node_count();
  const std::size_t n2 = g2.node_count();
  if (k.rows() != n1 || k.cols() != n2)
    throw Error("dspfp: similarity matrix dimensions do not match the graphs");

  Alignment result;
  result.matcher = params.mode == DspfpParams::Mode::OneToOne ? "dspfp1" : "dspfpM";
  if (n1 == 0 || n2 == 0) return result;

  const auto n = static_cast<Eigen::Index>(std::max(n1, n2));
  const Eigen::MatrixXd a1 = detail::directed_adjacency(g1, n);
  const Eigen::MatrixXd a2 = detail::directed_adjacency(g2, n);
  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) sim(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(j)) = k(i, j);

  Eigen::MatrixXd x =
      Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));

  DspfpStats local;
  for (local.outer_iterations = 1; local.outer_iterations <= params.max_iter;
       ++local.outer_iterations) {
    Eigen::MatrixXd grad =
        a1 * x * a2.transpose() + a1.transpose() * x * a2 + params.lambda * sim;
    // Dummy rows and columns would otherwise be all zero; the floor keeps the
    // projection well defined.
    grad = grad.cwiseMax(1e-12);
    const Eigen::MatrixXd projected = ds_projection(std::move(grad), params.eps, params.max_iter);
    const Eigen::MatrixXd x_next = (1.0 - params.alpha) * x + params.alpha * projected;
    local.final_error = (x_next - x).cwiseAbs().sum();
    x = x_next;
    if (local.final_error < params.eps) {
      local.converged = true;
      break;
    }
  }
  local.outer_iterations = std::min(local.outer_iterations, params.max_iter);
  local.max_row_sum_err = (x.rowwise().sum().array() - 1.0).abs().maxCoeff();
  local.max_col_sum_err = (x.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (stats) *stats = local;

  // Greedy discretization over the real (non-dummy) block. Ties go to the
  // lowest (row, column) index.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> picks;
  if (params.mode == DspfpParams::Mode::OneToOne) {
    std::vector<char> row_used(n1, 0), col_used(n2, 0);
    const std::size_t count = std::min(n1, n2);
    for (std::size_t step = 0; step < count; ++step) {
      double best = -1.0;
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < n1; ++i) {
        if (row_used[i]) continue;
        for (std::size_t j = 0; j < n2; ++j) {
          if (col_used[j]) continue;
          const double v = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          if (v > best) {
            best = v;
            bi = i;
            bj = j;
          }
        }
      }
      row_used[bi] = 1;
      col_used[bj] = 1;
      picks.emplace_back(static_cast<std::uint32_t>(bi), static_cast<std::uint32_t>(bj));
    }
  } else {
    // Zeroing only the selected row makes each row's pick independent, so the
    // outcome is each source row's argmax.
    for (std::size_t i = 0; i < n1; ++i) {
      double best = -1.0;
      std::size_t bj = 0;
      for (std::size_t j = 0; j < n2; ++j) {
        const double v = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v > best) {
          best = v;
          bj = j;
        }
      }
      picks.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(bj));
    }
  }
  std::sort(picks.begin(), picks.end());

  std::vector<std::uint32_t> mapping(n1, MatchObjective::kUnmapped);
  for (const auto& [i, j] : picks) {
    mapping[i] = j;
    result.pairs.emplace_back(g1.node(i).id, g2.node(j).id);
  }

  // Discrete QAP-style objective: conserved directed adjacencies plus the
  // lambda-weighted node similarity. Labels reach DSPFP only through k.
  MatchObjective obj(g1, g2, k, 1.0, 0.0, /*respect_flow_labels=*/false);
  double sim_sum = 0.0;
  for (std::size_t u = 0; u < n1; ++u)
    if (mapping[u] != MatchObjective::kUnmapped) sim_sum += k(u, mapping[u]);
  result.score = static_cast<double>(obj.conserved_count(mapping)) + params.lambda * sim_sum;
  return result;
}

}  // namespace plantmatch
