// simplify.hpp - pipe-removal passes and multi-edge combination.
//
// Three reductions over the pipe nodes of a process graph:
//   remove_degree1_pipes        peel dead-end pipes until none remain
//   simplify_straight_pipelines collapse pipes with exactly one in- and one
//                               out-edge into a direct edge
//   remove_all_pipes            eliminate every pipe node, connecting the
//                               non-pipe endpoints of pipe-interior paths
// plus combine_multi_edges, which folds parallel edges into one edge carrying
// the union of their flow groups. Non-pipe nodes are never removed or
// retyped by any of these passes.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "plantmatch/graph.hpp"

namespace plantmatch {

namespace detail {

// Mutable scratch representation used by the simplification passes.
// ProcessGraph itself is append-only, so passes edit a WorkGraph and convert
// back when done. Node order is preserved; created edges are appended.
class WorkGraph {
 public:
  explicit WorkGraph(const ProcessGraph& g) {
    nodes_.reserve(g.node_count());
    for (const auto& n : g.nodes()) nodes_.push_back({n.id, n.type, true});
    out_.resize(g.node_count());
    in_.resize(g.node_count());
    edges_.reserve(g.edge_count());
    for (const auto& e : g.edges()) {
      used_edge_ids_.insert(e.id);
      push_edge(e.id, e.source, e.target, e.flows);
    }
  }

  std::size_t node_slots() const { return nodes_.size(); }
  bool node_alive(std::uint32_t i) const { return nodes_[i].alive; }
  NodeType node_type(std::uint32_t i) const { return nodes_[i].type; }

  const std::vector<std::uint32_t>& out_edges(std::uint32_t i) const { return out_[i]; }
  const std::vector<std::uint32_t>& in_edges(std::uint32_t i) const { return in_[i]; }
  std::size_t degree(std::uint32_t i) const { return out_[i].size() + in_[i].size(); }

  std::uint32_t edge_source(std::uint32_t e) const { return edges_[e].source; }
  std::uint32_t edge_target(std::uint32_t e) const { return edges_[e].target; }
  FlowGroupSet edge_flows(std::uint32_t e) const { return edges_[e].flows; }

  std::uint32_t add_generated_edge(std::uint32_t source, std::uint32_t target,
                                   FlowGroupSet flows) {
    return push_edge(fresh_edge_id(), source, target, flows);
  }

  void remove_edge(std::uint32_t e) {
    if (!edges_[e].alive) return;
    edges_[e].alive = false;
    erase_ref(out_[edges_[e].source], e);
    erase_ref(in_[edges_[e].target], e);
  }

  // Removes the node together with all incident edges.
  void remove_node(std::uint32_t i) {
    nodes_[i].alive = false;
    auto outs = out_[i];
    for (auto e : outs) remove_edge(e);
    auto ins = in_[i];
    for (auto e : ins) remove_edge(e);
  }

  ProcessGraph to_graph() const {
    ProcessGraph g;
    std::vector<std::uint32_t> remap(nodes_.size(), 0);
    for (std::uint32_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].alive) remap[i] = g.add_node(nodes_[i].id, nodes_[i].type);
    for (const auto& e : edges_)
      if (e.alive) g.add_edge(e.id, remap[e.source], remap[e.target], e.flows);
    return g;
  }

 private:
  struct WNode {
    std::string id;
    NodeType type;
    bool alive;
  };
  struct WEdge {
    std::string id;
    std::uint32_t source;
    std::uint32_t target;
    FlowGroupSet flows;
    bool alive;
  };

  std::uint32_t push_edge(std::string id, std::uint32_t s, std::uint32_t t, FlowGroupSet f) {
    const auto e = static_cast<std::uint32_t>(edges_.size());
    edges_.push_back({std::move(id), s, t, f, true});
    out_[s].push_back(e);
    in_[t].push_back(e);
    return e;
  }

  std::string fresh_edge_id() {
    std::string id;
    do {
      id = "_g" + std::to_string(++gen_counter_);
    } while (!used_edge_ids_.insert(id).second);
    return id;
  }

  static void erase_ref(std::vector<std::uint32_t>& v, std::uint32_t e) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == e) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        return;
      }
    }
  }

  std::vector<WNode> nodes_;
  std::vector<WEdge> edges_;
  std::vector<std::vector<std::uint32_t>> out_, in_;
  std::unordered_set<std::string> used_edge_ids_;
  std::uint64_t gen_counter_ = 0;
};

}  // namespace detail

// Peels pipe nodes of total degree <= 1, sweep by sweep, until the graph
// stops changing. Incident edges are removed with the node.
inline ProcessGraph remove_degree1_pipes(const ProcessGraph& g) {
  detail::WorkGraph w(g);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::uint32_t> doomed;
    for (std::uint32_t i = 0; i < w.node_slots(); ++i)
      if (w.node_alive(i) && w.node_type(i) == NodeType::Pipe && w.degree(i) <= 1)
        doomed.push_back(i);
    for (auto i : doomed) w.remove_node(i);
    changed = !doomed.empty();
  }
  return w.to_graph();
}

// Replaces every pipe with exactly one incoming and one outgoing edge by a
// direct edge carrying the union of the two flow sets. Chains collapse fully
// because the scan repeats until no such pipe remains. May create
// multi-edges; see combine_multi_edges.
inline ProcessGraph simplify_straight_pipelines(const ProcessGraph& g) {
  detail::WorkGraph w(g);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t i = 0; i < w.node_slots(); ++i) {
      if (!w.node_alive(i) || w.node_type(i) != NodeType::Pipe) continue;
      if (w.in_edges(i).size() != 1 || w.out_edges(i).size() != 1) continue;
      const std::uint32_t e_in = w.in_edges(i)[0];
      const std::uint32_t e_out = w.out_edges(i)[0];
      if (e_in == e_out) {
        // A pipe whose only connection is a self-loop reduces to nothing.
        w.remove_node(i);
        changed = true;
        continue;
      }
      const std::uint32_t upstream = w.edge_source(e_in);
      const std::uint32_t downstream = w.edge_target(e_out);
      const FlowGroupSet flows = w.edge_flows(e_in).united(w.edge_flows(e_out));
      w.remove_node(i);
      w.add_generated_edge(upstream, downstream, flows);
      changed = true;
    }
  }
  return w.to_graph();
}

// Eliminates every pipe node. For a pipe with in-edges I and out-edges O
// (self-loops set aside), each pair (a, b) in I x O becomes an edge
// a.source -> b.target whose flows are the union of a, b and any self-loop
// flows on the pipe. A pipe missing either side is deleted without creating
// edges, so pure pipe cycles vanish. The result contains an edge u -> w
// exactly when the input had a directed path u -> ... -> w through pipe
// interiors.
inline ProcessGraph remove_all_pipes(const ProcessGraph& g) {
  detail::WorkGraph w(g);
  // A single indexed pass suffices: created edges never attach to an
  // already-eliminated pipe, and elimination never creates pipe nodes.
  for (std::uint32_t i = 0; i < w.node_slots(); ++i) {
    if (!w.node_alive(i) || w.node_type(i) != NodeType::Pipe) continue;
    std::vector<std::uint32_t> ins, outs;
    FlowGroupSet loop_flows;
    for (auto e : w.in_edges(i)) {
      if (w.edge_source(e) == i)
        loop_flows = loop_flows.united(w.edge_flows(e));
      else
        ins.push_back(e);
    }
    for (auto e : w.out_edges(i))
      if (w.edge_target(e) != i) outs.push_back(e);
    if (!ins.empty() && !outs.empty()) {
      for (auto a : ins) {
        for (auto b : outs) {
          const FlowGroupSet flows =
              w.edge_flows(a).united(loop_flows).united(w.edge_flows(b));
          w.add_generated_edge(w.edge_source(a), w.edge_target(b), flows);
        }
      }
    }
    w.remove_node(i);
  }
  return w.to_graph();
}

// Folds parallel edges (same source and target) into a single edge carrying
// the union of their flow groups. Combined edges get fresh ids; unique edges
// are kept verbatim. Idempotent.
inline ProcessGraph combine_multi_edges(const ProcessGraph& g) {
  struct Group {
    FlowGroupSet flows;
    std::size_t count = 0;
    std::uint32_t first_edge = 0;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, Group> groups;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    auto key = std::make_pair(ed.source, ed.target);
    auto [it, inserted] = groups.emplace(key, Group{});
    if (inserted) {
      it->second.first_edge = e;
      order.push_back(key);
    }
    it->second.flows = it->second.flows.united(ed.flows);
    ++it->second.count;
  }

  std::unordered_set<std::string> used_ids;
  for (const auto& e : g.edges()) used_ids.insert(e.id);

  ProcessGraph out;
  for (const auto& n : g.nodes()) out.add_node(n.id, n.type);
  std::uint64_t counter = 0;
  for (const auto& key : order) {
    const Group& grp = groups.at(key);
    if (grp.count == 1) {
      const Edge& ed = g.edge(grp.first_edge);
      out.add_edge(ed.id, ed.source, ed.target, ed.flows);
    } else {
      std::string id;
      do {
        id = "_m" + std::to_string(++counter);
      } while (!used_ids.insert(id).second);
      out.add_edge(std::move(id), key.first, key.second, grp.flows);
    }
  }
  return out;
}

// The two simplification profiles used throughout the experiments, plus the
// identity. Simp1 keeps pipe nodes that branch; Simp2 removes all pipes.
enum class SimplifyProfile { None, Simp1, Simp2 };

constexpr std::string_view to_string(SimplifyProfile p) {
  switch (p) {
    case SimplifyProfile::None: return "none";
    case SimplifyProfile::Simp1: return "simp1";
    case SimplifyProfile::Simp2: return "simp2";
  }
  return "none";
}

inline SimplifyProfile parse_simplify_profile(std::string_view s) {
  const std::string key = detail::normalize_token(s);
  if (key == "none") return SimplifyProfile::None;
  if (key == "simp1" || key == "simplification1") return SimplifyProfile::Simp1;
  if (key == "simp2" || key == "simplification2") return SimplifyProfile::Simp2;
  throw Error("unknown simplification profile '" + std::string(s) + "'");
}

inline ProcessGraph apply_profile(const ProcessGraph& g, SimplifyProfile profile) {
  switch (profile) {
    case SimplifyProfile::None:
      return g;
    case SimplifyProfile::Simp1:
      return combine_multi_edges(simplify_straight_pipelines(remove_degree1_pipes(g)));
    case SimplifyProfile::Simp2:
      return combine_multi_edges(remove_all_pipes(g));
  }
  throw Error("unreachable profile");
}

}  // namespace plantmatch
