// synthetic.hpp - plant-like graph generator and ground-truth perturbation.
//
// generate_plant builds a deterministic multi-section plant: one section
// pattern is drawn from the seed and stamped once per section, so sections
// are isomorphic, the way repeated process areas are in real plants. Sections
// share a water-supply header and a collection tank. Components are joined
// through short pipe runs, with dead-end pipe stubs and labeled flows, which
// gives the simplification passes realistic work.
//
// perturb produces a modified copy plus the surviving node correspondences.
// All ids in the copy are freshly generated and the node order is shuffled,
// so matchers cannot lean on identifiers.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plantmatch/evaluate.hpp"
#include "plantmatch/graph.hpp"
#include "plantmatch/rng.hpp"

namespace plantmatch {

struct PerturbParams {
  double p_rewire = 0.0;           // fraction of edges with one endpoint moved
  double p_hide_type = 0.0;        // fraction of node types replaced by Unknown
  double p_series_parallel = 0.0;  // chance a component is duplicated or dropped
  std::uint64_t seed = 0;

  void validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(p_rewire) || !in01(p_hide_type) || !in01(p_series_parallel))
      throw Error("perturb: probabilities must lie in [0,1]");
  }
};

namespace detail {

// One drawn section layout, stamped once per section so sections come out
// isomorphic, as repeated process areas do in real plants.
struct SectionPattern {
  std::vector<NodeType> component_types;
  std::vector<FlowGroupSet> link_flows;  // flow on the main line i -> i+1
  std::vector<int> run_lengths;          // pipes between consecutive components
  std::vector<int> stub_lengths;         // dead-end pipe chain per slot, 0 = none
  std::vector<FlowGroupSet> stub_flows;
  std::vector<int> recirc_target;        // earlier vessel slot, -1 = none
  std::vector<bool> water_fed;           // dilution water from the header
  std::vector<std::size_t> anchor_slots; // mixing tanks usable as anchors
};

inline SectionPattern draw_section_pattern(std::size_t section_size, Rng& rng) {
  static constexpr NodeType kMovers[] = {NodeType::Pump, NodeType::Pump, NodeType::Fan};
  static constexpr NodeType kProcessors[] = {
      NodeType::Refiner, NodeType::Screen,        NodeType::Cleaner,
      NodeType::Filter,  NodeType::Cylinder,      NodeType::HeatExchanger,
      NodeType::Unknown, NodeType::AirCompressor,
  };
  static constexpr NodeType kVessels[] = {NodeType::LargeTank, NodeType::SmallTank,
                                          NodeType::UnknownSizeTank};
  static constexpr FlowGroupSet kStubFlows[] = {
      FlowGroupSet{},  // unknown
      FlowGroupSet{FlowGroup::Water},
      FlowGroupSet{FlowGroup::Effluent},
      FlowGroupSet{FlowGroup::Gas},
  };

  SectionPattern p;
  p.component_types.resize(section_size);

  // two mixing tanks per section give the anchor measure in-section reach
  std::size_t a1 = section_size / 3;
  std::size_t a2 = (2 * section_size) / 3;
  if (a1 == 0) a1 = 1;
  if (a2 <= a1) a2 = a1;
  p.anchor_slots.push_back(a1);
  if (a2 != a1) p.anchor_slots.push_back(a2);

  // mover -> processor -> vessel rotation with drawn picks; vessels at the
  // section feed and the anchor slots
  std::size_t phase = 0;
  for (std::size_t i = 0; i < section_size; ++i) {
    if (i == 0 || i == a1 || i == a2) {
      p.component_types[i] = NodeType::LargeTank;
      phase = 0;
      continue;
    }
    switch (phase % 3) {
      case 0: p.component_types[i] = kMovers[rng.below(std::size(kMovers))]; break;
      case 1: p.component_types[i] = kProcessors[rng.below(std::size(kProcessors))]; break;
      default: p.component_types[i] = kVessels[rng.below(std::size(kVessels))]; break;
    }
    ++phase;
  }

  // mainline flows: pulp family with occasional broke/white-water segments
  p.link_flows.resize(section_size == 0 ? 0 : section_size - 1);
  for (auto& f : p.link_flows) {
    const double roll = rng.unit();
    if (roll < 0.50) f = FlowGroupSet{FlowGroup::Pulp};
    else if (roll < 0.65) f = FlowGroupSet{FlowGroup::Pulp, FlowGroup::Water};
    else if (roll < 0.77) f = FlowGroupSet{FlowGroup::Broke};
    else if (roll < 0.87) f = FlowGroupSet{FlowGroup::WhiteWater};
    else if (roll < 0.95) f = FlowGroupSet{FlowGroup::Pulp, FlowGroup::Broke};
    else f = FlowGroupSet{};  // flow unknown in the source data
  }

  p.run_lengths.resize(p.link_flows.size());
  for (auto& r : p.run_lengths) r = rng.bernoulli(0.7) ? 1 : 2;

  p.stub_lengths.assign(section_size, 0);
  p.stub_flows.assign(section_size, FlowGroupSet{});
  for (std::size_t i = 0; i < section_size; ++i) {
    if (rng.bernoulli(0.35)) {
      p.stub_lengths[i] = 1 + static_cast<int>(rng.below(3));
      p.stub_flows[i] = kStubFlows[rng.below(std::size(kStubFlows))];
    }
  }

  // occasional recirculation back to the nearest earlier vessel
  p.recirc_target.assign(section_size, -1);
  for (std::size_t i = 2; i < section_size; ++i) {
    if (!rng.bernoulli(0.15)) continue;
    for (std::size_t back = i; back-- > 0;) {
      if (is_tank(p.component_types[back])) {
        p.recirc_target[i] = static_cast<int>(back);
        break;
      }
    }
  }

  // dilution water into some vessels; the section feed tank is always fed so
  // every section stays attached to the water header
  p.water_fed.assign(section_size, false);
  p.water_fed[0] = true;
  for (std::size_t i = 1; i < section_size; ++i)
    p.water_fed[i] = is_tank(p.component_types[i]) && rng.bernoulli(0.4);

  return p;
}

}  // namespace detail

// Deterministic plant-like graph: `sections` isomorphic copies of one drawn
// section, joined by shared water/steam headers and a collection tank.
// Sections run mover -> processor -> vessel motifs over labeled flows, with
// dead-end instrument stubs, occasional recirculation lines, and steam and
// condensate connections on heat exchangers. The mixing tanks (ids with a
// "_mix" suffix) are the natural anchor choices.
inline ProcessGraph generate_plant(int sections, int section_size, std::uint64_t seed) {
  if (sections < 1) throw Error("generate_plant: sections must be >= 1");
  if (section_size < 3) throw Error("generate_plant: section_size must be >= 3");

  Rng rng(seed);
  const auto pattern = detail::draw_section_pattern(static_cast<std::size_t>(section_size), rng);

  ProcessGraph g;
  std::uint64_t edge_counter = 0;
  auto connect = [&](std::uint32_t a, std::uint32_t b, FlowGroupSet flows) {
    g.add_edge("e" + std::to_string(++edge_counter), a, b, flows);
  };

  const FlowGroupSet water{FlowGroup::Water};
  const FlowGroupSet steam{FlowGroup::Steam};
  const FlowGroupSet condensate{FlowGroup::Condensate};

  const auto water_tank = g.add_node("hdr_water_tank", NodeType::LargeTank);
  const auto water_pump = g.add_node("hdr_water_pump", NodeType::Pump);
  const auto water_main = g.add_node("hdr_water_main", NodeType::Pipe);
  const auto steam_source = g.add_node("hdr_steam_source", NodeType::Unknown);
  const auto steam_main = g.add_node("hdr_steam_main", NodeType::Pipe);
  const auto condensate_tank = g.add_node("hdr_condensate_tank", NodeType::SmallTank);
  const auto collect_tank = g.add_node("hdr_collect_tank", NodeType::LargeTank);
  connect(water_tank, water_pump, water);
  connect(water_pump, water_main, water);
  connect(steam_source, steam_main, steam);

  for (int s = 1; s <= sections; ++s) {
    const std::string prefix = "s" + std::to_string(s) + "_";
    const auto pipe_node = [&](const std::string& name) {
      return g.add_node(prefix + name, NodeType::Pipe);
    };

    std::vector<std::uint32_t> comps;
    comps.reserve(pattern.component_types.size());
    for (std::size_t i = 0; i < pattern.component_types.size(); ++i) {
      std::string id = prefix + "c" + std::to_string(i);
      if (std::find(pattern.anchor_slots.begin(), pattern.anchor_slots.end(), i) !=
          pattern.anchor_slots.end())
        id += "_mix";
      comps.push_back(g.add_node(std::move(id), pattern.component_types[i]));
    }

    // main line through short pipe runs with the drawn flow labels
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
      const FlowGroupSet flow = pattern.link_flows[i];
      std::uint32_t prev = comps[i];
      for (int j = 0; j < pattern.run_lengths[i]; ++j) {
        const auto pipe = pipe_node("p" + std::to_string(i) + "_" + std::to_string(j));
        connect(prev, pipe, flow);
        prev = pipe;
      }
      connect(prev, comps[i + 1], flow);
    }

    for (std::size_t i = 0; i < comps.size(); ++i) {
      // dead-end stubs (drains, vents, instrument taps)
      std::uint32_t prev = comps[i];
      for (int j = 0; j < pattern.stub_lengths[i]; ++j) {
        const auto pipe = pipe_node("stub" + std::to_string(i) + "_" + std::to_string(j));
        connect(prev, pipe, pattern.stub_flows[i]);
        prev = pipe;
      }
      // recirculation back to an earlier vessel
      if (pattern.recirc_target[i] >= 0) {
        const auto pipe = pipe_node("recirc" + std::to_string(i));
        const FlowGroupSet flow =
            i > 0 ? pattern.link_flows[i - 1] : FlowGroupSet{FlowGroup::Pulp};
        connect(comps[i], pipe, flow);
        connect(pipe, comps[static_cast<std::size_t>(pattern.recirc_target[i])], flow);
      }
      // dilution water
      if (pattern.water_fed[i]) {
        const auto feed = pipe_node("wfeed" + std::to_string(i));
        connect(water_main, feed, water);
        connect(feed, comps[i], water);
      }
      // steam users return condensate to the shared header
      if (pattern.component_types[i] == NodeType::HeatExchanger) {
        const auto steam_feed = pipe_node("sfeed" + std::to_string(i));
        connect(steam_main, steam_feed, steam);
        connect(steam_feed, comps[i], steam);
        const auto cond_return = pipe_node("cret" + std::to_string(i));
        connect(comps[i], cond_return, condensate);
        connect(cond_return, condensate_tank, condensate);
      }
    }

    // section output into the shared collection tank
    const auto out_pipe = pipe_node("out");
    connect(comps.back(), out_pipe,
            pattern.link_flows.empty() ? FlowGroupSet{FlowGroup::Pulp}
                                       : pattern.link_flows.back());
    connect(out_pipe, collect_tank, FlowGroupSet{FlowGroup::Pulp});
  }
  return g;
}

struct PerturbResult {
  ProcessGraph graph;
  TruthSet truth;  // original node id -> new node id, for surviving nodes
};

inline PerturbResult perturb(const ProcessGraph& g, const PerturbParams& params) {
  params.validate();
  Rng rng(params.seed);

  struct WNode {
    std::int64_t orig;  // index into g, or -1 for inserted twins
    NodeType type;
    bool alive = true;
  };
  struct WEdge {
    std::uint32_t source;
    std::uint32_t target;
    FlowGroupSet flows;
    bool alive = true;
  };
  std::vector<WNode> nodes;
  std::vector<WEdge> edges;
  std::vector<std::vector<std::uint32_t>> out_list, in_list;

  auto add_node = [&](std::int64_t orig, NodeType type) {
    nodes.push_back({orig, type, true});
    out_list.emplace_back();
    in_list.emplace_back();
    return static_cast<std::uint32_t>(nodes.size() - 1);
  };
  auto add_edge = [&](std::uint32_t s, std::uint32_t t, FlowGroupSet f) {
    const auto e = static_cast<std::uint32_t>(edges.size());
    edges.push_back({s, t, f, true});
    out_list[s].push_back(e);
    in_list[t].push_back(e);
    return e;
  };
  auto erase_ref = [](std::vector<std::uint32_t>& v, std::uint32_t e) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == e) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        return;
      }
    }
  };
  auto remove_edge = [&](std::uint32_t e) {
    if (!edges[e].alive) return;
    edges[e].alive = false;
    erase_ref(out_list[edges[e].source], e);
    erase_ref(in_list[edges[e].target], e);
  };
  auto remove_node = [&](std::uint32_t v) {
    nodes[v].alive = false;
    auto outs = out_list[v];
    for (auto e : outs) remove_edge(e);
    auto ins = in_list[v];
    for (auto e : ins) remove_edge(e);
  };

  for (std::uint32_t i = 0; i < g.node_count(); ++i)
    add_node(static_cast<std::int64_t>(i), g.node(i).type);
  for (const auto& e : g.edges()) add_edge(e.source, e.target, e.flows);

  // Series/parallel mutations on the original non-pipe components: a
  // duplicated component is an outlier with no truth entry; a dropped one is
  // stitched over so the line stays connected.
  const auto original_count = static_cast<std::uint32_t>(g.node_count());
  for (std::uint32_t v = 0; v < original_count; ++v) {
    if (!nodes[v].alive || nodes[v].type == NodeType::Pipe) continue;
    if (!rng.bernoulli(params.p_series_parallel)) continue;
    if (rng.bernoulli(0.5)) {
      // parallel twin
      const auto twin = add_node(-1, nodes[v].type);
      bool self_loop_copied = false;
      const auto ins = in_list[v];
      for (auto e : ins) {
        if (edges[e].source == v) {
          if (!self_loop_copied) add_edge(twin, twin, edges[e].flows);
          self_loop_copied = true;
        } else {
          add_edge(edges[e].source, twin, edges[e].flows);
        }
      }
      const auto outs = out_list[v];
      for (auto e : outs)
        if (edges[e].target != v) add_edge(twin, edges[e].target, edges[e].flows);
    } else {
      // series drop: bridge every in/out combination, then remove
      std::vector<std::uint32_t> ins, outs;
      for (auto e : in_list[v])
        if (edges[e].source != v) ins.push_back(e);
      for (auto e : out_list[v])
        if (edges[e].target != v) outs.push_back(e);
      for (auto a : ins)
        for (auto b : outs)
          add_edge(edges[a].source, edges[b].target,
                   edges[a].flows.united(edges[b].flows));
      remove_node(v);
    }
  }

  // Endpoint rewiring over the surviving edges.
  std::vector<std::uint32_t> alive_nodes;
  for (std::uint32_t v = 0; v < nodes.size(); ++v)
    if (nodes[v].alive) alive_nodes.push_back(v);
  const auto edge_count_now = static_cast<std::uint32_t>(edges.size());
  for (std::uint32_t e = 0; e < edge_count_now; ++e) {
    if (!edges[e].alive || alive_nodes.empty()) continue;
    if (!rng.bernoulli(params.p_rewire)) continue;
    const std::uint32_t pick = alive_nodes[rng.below(alive_nodes.size())];
    const WEdge old = edges[e];
    remove_edge(e);
    if (rng.bernoulli(0.5))
      add_edge(pick, old.target, old.flows);
    else
      add_edge(old.source, pick, old.flows);
  }

  // Type hiding.
  for (auto& n : nodes)
    if (n.alive && rng.bernoulli(params.p_hide_type)) n.type = NodeType::Unknown;

  // Emit with fresh ids in shuffled order.
  std::vector<std::uint32_t> order;
  for (std::uint32_t v = 0; v < nodes.size(); ++v)
    if (nodes[v].alive) order.push_back(v);
  rng.shuffle(order);

  PerturbResult result;
  std::vector<std::uint32_t> remap(nodes.size(), 0);
  std::uint64_t node_counter = 0;
  for (auto v : order) {
    std::string id = "t" + std::to_string(++node_counter);
    if (nodes[v].orig >= 0)
      result.truth.emplace(g.node(static_cast<std::uint32_t>(nodes[v].orig)).id, id);
    remap[v] = result.graph.add_node(std::move(id), nodes[v].type);
  }

  std::vector<std::uint32_t> edge_order;
  for (std::uint32_t e = 0; e < edges.size(); ++e)
    if (edges[e].alive) edge_order.push_back(e);
  rng.shuffle(edge_order);
  std::uint64_t edge_counter = 0;
  for (auto e : edge_order)
    result.graph.add_edge("te" + std::to_string(++edge_counter), remap[edges[e].source],
                          remap[edges[e].target], edges[e].flows);
  return result;
}

}  // namespace plantmatch
