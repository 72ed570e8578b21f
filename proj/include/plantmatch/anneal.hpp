// anneal.hpp - simulated-annealing aligner over injective node mappings.
//
// State is an injective map V1 -> V2 optimizing
//   J(f) = w_wec * WEC(f) + w_sim * NodeSim(f)
// (see objective.hpp). Moves are an even mix of reassigning one source to an
// unused target and swapping the images of two sources; acceptance follows
// the Metropolis rule under a geometric temperature schedule whose starting
// point is calibrated by a short probe of the initial state. The budget is
// wall-clock by default; a fixed move count makes runs reproducible.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "plantmatch/alignment.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/objective.hpp"
#include "plantmatch/rng.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch {

struct AnnealParams {
  double w_wec = 0.5;
  double w_sim = 0.5;
  double budget_seconds = 300.0;
  std::uint64_t seed = 0;
  double t0_acceptance = 0.95;  // probe-calibrated initial acceptance rate
  double tf_factor = 1e-10;     // final temperature as a fraction of T0
  bool respect_flow_labels = true;
  std::uint64_t max_moves = 0;  // > 0: deterministic move budget instead of wall clock

  void validate() const {
    if (std::abs(w_wec + w_sim - 1.0) > 1e-9)
      throw Error("anneal: w_wec + w_sim must equal 1");
    if (w_wec < 0.0 || w_sim < 0.0) throw Error("anneal: weights must be non-negative");
    if (max_moves == 0 && !(budget_seconds > 0.0))
      throw Error("anneal: budget must be positive");
    if (!(t0_acceptance > 0.0 && t0_acceptance < 1.0))
      throw Error("anneal: t0_acceptance must be in (0,1)");
    if (!(tf_factor > 0.0 && tf_factor <= 1.0))
      throw Error("anneal: tf_factor must be in (0,1]");
  }
};

// Best-so-far objective values observed during a run, by move index.
struct AnnealTrace {
  std::vector<std::pair<std::uint64_t, double>> best_by_move;
  std::uint64_t total_moves = 0;
};

namespace detail {

struct Move {
  enum class Kind { Change, Swap } kind = Kind::Change;
  std::uint32_t u1 = 0;
  std::uint32_t u2 = 0;        // swap only
  std::size_t unused_idx = 0;  // change only
};

// Annealer core; requires |V1| <= |V2|.
inline Alignment anneal_core(const ProcessGraph& g1, const ProcessGraph& g2,
                             const SimilarityMatrix& k, const AnnealParams& params,
                             AnnealTrace* trace) {
  const std::size_t n1 = g1.node_count();
  const std::size_t n2 = g2.node_count();
  MatchObjective objective(g1, g2, k, params.w_wec, params.w_sim,
                           params.respect_flow_labels);
  Rng rng(params.seed);

  // Random injective start.
  std::vector<std::uint32_t> targets(n2);
  for (std::uint32_t t = 0; t < n2; ++t) targets[t] = t;
  rng.shuffle(targets);
  std::vector<std::uint32_t> mapping(n1);
  for (std::size_t u = 0; u < n1; ++u) mapping[u] = targets[u];
  std::vector<std::uint32_t> unused(targets.begin() + static_cast<std::ptrdiff_t>(n1),
                                    targets.end());
  constexpr std::size_t kNotUnused = static_cast<std::size_t>(-1);
  std::vector<std::size_t> unused_pos(n2, kNotUnused);
  for (std::size_t i = 0; i < unused.size(); ++i) unused_pos[unused[i]] = i;

  // Running sums for incremental evaluation.
  double wec_sum = 0.0;
  for (std::uint32_t e = 0; e < g1.edge_count(); ++e)
    wec_sum += objective.edge_weight(e, mapping);
  double sim_sum = 0.0;
  for (std::uint32_t u = 0; u < n1; ++u) sim_sum += objective.node_weight(u, mapping[u]);

  double current = objective.combine(wec_sum, sim_sum);
  std::vector<std::uint32_t> best_mapping = mapping;
  double best = current;
  if (trace) {
    trace->best_by_move.clear();
    trace->best_by_move.emplace_back(0, best);
  }

  const bool can_change = n2 > n1;
  const bool can_swap = n1 >= 2;

  auto finish = [&](std::uint64_t moves_done) {
    Alignment out;
    out.matcher = "anneal";
    out.pairs.reserve(n1);
    for (std::uint32_t u = 0; u < n1; ++u)
      out.pairs.emplace_back(g1.node(u).id, g2.node(best_mapping[u]).id);
    out.score = objective.evaluate(best_mapping);  // exact, free of incremental drift
    if (trace) trace->total_moves = moves_done;
    return out;
  };

  if (!can_change && !can_swap) return finish(0);

  std::vector<std::uint64_t> edge_stamp(g1.edge_count(), 0);
  std::uint64_t stamp = 0;
  std::vector<std::uint32_t> affected;

  auto propose = [&]() {
    Move m;
    const bool change = can_change && (!can_swap || rng.bernoulli(0.5));
    if (change) {
      m.kind = Move::Kind::Change;
      m.u1 = static_cast<std::uint32_t>(rng.below(n1));
      m.unused_idx = rng.below(unused.size());
    } else {
      m.kind = Move::Kind::Swap;
      m.u1 = static_cast<std::uint32_t>(rng.below(n1));
      do {
        m.u2 = static_cast<std::uint32_t>(rng.below(n1));
      } while (m.u2 == m.u1);
    }
    return m;
  };

  auto gather_affected = [&](const Move& m) {
    affected.clear();
    ++stamp;
    for (auto e : objective.incident_edges(m.u1)) {
      edge_stamp[e] = stamp;
      affected.push_back(e);
    }
    if (m.kind == Move::Kind::Swap) {
      for (auto e : objective.incident_edges(m.u2)) {
        if (edge_stamp[e] == stamp) continue;
        edge_stamp[e] = stamp;
        affected.push_back(e);
      }
    }
  };

  auto apply = [&](const Move& m) {
    if (m.kind == Move::Kind::Change) {
      const std::uint32_t t_old = mapping[m.u1];
      const std::uint32_t t_new = unused[m.unused_idx];
      mapping[m.u1] = t_new;
      unused[m.unused_idx] = t_old;
      unused_pos[t_old] = m.unused_idx;
      unused_pos[t_new] = kNotUnused;
    } else {
      std::swap(mapping[m.u1], mapping[m.u2]);
    }
  };

  // Applying a move twice with the same arguments undoes it.
  auto revert = [&](const Move& m) { apply(m); };

  // Applies the move and reports the objective deltas; the caller reverts
  // when the move is not kept.
  auto evaluate_move = [&](const Move& m, double& d_wec, double& d_sim) {
    gather_affected(m);
    double wec_before = 0.0;
    for (auto e : affected) wec_before += objective.edge_weight(e, mapping);
    double sim_before = objective.node_weight(m.u1, mapping[m.u1]);
    if (m.kind == Move::Kind::Swap) sim_before += objective.node_weight(m.u2, mapping[m.u2]);

    apply(m);
    double wec_after = 0.0;
    for (auto e : affected) wec_after += objective.edge_weight(e, mapping);
    double sim_after = objective.node_weight(m.u1, mapping[m.u1]);
    if (m.kind == Move::Kind::Swap) sim_after += objective.node_weight(m.u2, mapping[m.u2]);

    d_wec = wec_after - wec_before;
    d_sim = sim_after - sim_before;
  };

  // Calibrate T0 so the initial acceptance of worsening moves is roughly
  // t0_acceptance.
  double worsening_mean = 0.0;
  {
    std::size_t worsening = 0;
    double magnitude_sum = 0.0;
    const int probes = 256;
    for (int i = 0; i < probes; ++i) {
      const Move m = propose();
      double d_wec = 0.0, d_sim = 0.0;
      evaluate_move(m, d_wec, d_sim);
      revert(m);
      const double d = objective.combine(d_wec, d_sim);
      if (d < 0.0) {
        ++worsening;
        magnitude_sum += -d;
      }
    }
    worsening_mean = worsening > 0 ? magnitude_sum / static_cast<double>(worsening) : 0.0;
  }
  const double t0 = worsening_mean > 0.0
                        ? worsening_mean / -std::log(params.t0_acceptance)
                        : 1e-3;
  const double tf = params.tf_factor * t0;
  const double log_ratio = std::log(tf / t0);

  const bool wall_clock = params.max_moves == 0;
  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed_seconds = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
        .count();
  };

  std::uint64_t move_index = 0;
  double progress = 0.0;
  while (true) {
    if (wall_clock) {
      if ((move_index & 127u) == 0) {
        progress = elapsed_seconds() / params.budget_seconds;
        if (progress >= 1.0) break;
      }
    } else {
      if (move_index >= params.max_moves) break;
      progress = static_cast<double>(move_index) / static_cast<double>(params.max_moves);
    }
    const double temperature = t0 * std::exp(log_ratio * progress);

    const Move m = propose();
    double d_wec = 0.0, d_sim = 0.0;
    evaluate_move(m, d_wec, d_sim);
    const double delta = objective.combine(d_wec, d_sim);
    const bool accept =
        delta >= 0.0 || rng.unit() < std::exp(delta / temperature);
    if (accept) {
      wec_sum += d_wec;
      sim_sum += d_sim;
      current = objective.combine(wec_sum, sim_sum);
      if (current > best) {
        best = current;
        best_mapping = mapping;
        if (trace) trace->best_by_move.emplace_back(move_index + 1, best);
      }
    } else {
      revert(m);
    }
    ++move_index;
  }
  return finish(move_index);
}

}  // namespace detail

// Runs the annealer. When |V1| > |V2| the roles are swapped internally and
// the resulting map inverted, yielding a partial alignment of the source
// graph; the reported score is the swapped run's objective.
inline Alignment anneal(const ProcessGraph& g1, const ProcessGraph& g2,
                        const SimilarityMatrix& k, const AnnealParams& params,
                        AnnealTrace* trace = nullptr) {
  params.validate();
  if (g2.node_count() == 0) throw Error("anneal: target graph is empty");
  if (k.rows() != g1.node_count() || k.cols() != g2.node_count())
    throw Error("anneal: similarity matrix dimensions do not match the graphs");
  if (g1.node_count() == 0) {
    Alignment out;
    out.matcher = "anneal";
    return out;
  }

  if (g1.node_count() <= g2.node_count())
    return detail::anneal_core(g1, g2, k, params, trace);

  Alignment swapped = detail::anneal_core(g2, g1, k.transposed(), params, trace);
  Alignment out;
  out.matcher = swapped.matcher;
  out.score = swapped.score;
  out.pairs.reserve(swapped.pairs.size());
  for (const auto& [t, s] : swapped.pairs) out.pairs.emplace_back(s, t);
  std::sort(out.pairs.begin(), out.pairs.end(),
            [&](const auto& a, const auto& b) {
              return g1.node_index(a.first) < g1.node_index(b.first);
            });
  return out;
}

}  // namespace plantmatch
