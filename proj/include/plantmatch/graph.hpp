// graph.hpp - directed labeled multigraph model for process plants.
//
// Nodes are plant components with a type from a closed vocabulary; edges are
// flows between components, labeled with a set of flow groups. The graph is
// built once and treated as immutable afterwards; every transformation in
// this library returns a new graph.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace plantmatch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Node types

enum class NodeType : std::uint8_t {
  Pipe,
  Pump,
  Filter,
  Refiner,
  Screen,
  Cleaner,
  Cylinder,
  AirCompressor,
  HeatExchanger,
  Fan,
  LargeTank,
  SmallTank,
  UnknownSizeTank,
  Unknown,
};

inline constexpr std::size_t kNodeTypeCount = 14;

constexpr bool is_tank(NodeType t) {
  return t == NodeType::LargeTank || t == NodeType::SmallTank ||
         t == NodeType::UnknownSizeTank;
}

constexpr std::string_view to_string(NodeType t) {
  switch (t) {
    case NodeType::Pipe: return "Pipe";
    case NodeType::Pump: return "Pump";
    case NodeType::Filter: return "Filter";
    case NodeType::Refiner: return "Refiner";
    case NodeType::Screen: return "Screen";
    case NodeType::Cleaner: return "Cleaner";
    case NodeType::Cylinder: return "Cylinder";
    case NodeType::AirCompressor: return "AirCompressor";
    case NodeType::HeatExchanger: return "HeatExchanger";
    case NodeType::Fan: return "Fan";
    case NodeType::LargeTank: return "LargeTank";
    case NodeType::SmallTank: return "SmallTank";
    case NodeType::UnknownSizeTank: return "UnknownSizeTank";
    case NodeType::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace detail {

// Lowercases and strips everything that is not a letter or digit, so that
// "Air compressor", "air_compressor" and "AirCompressor" all compare equal.
inline std::string normalize_token(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace detail

// Unrecognized spellings map to Unknown; source data routinely contains
// components that cannot be identified.
inline NodeType parse_node_type(std::string_view s) {
  const std::string key = detail::normalize_token(s);
  static const std::unordered_map<std::string, NodeType> table = {
      {"pipe", NodeType::Pipe},
      {"pump", NodeType::Pump},
      {"filter", NodeType::Filter},
      {"refiner", NodeType::Refiner},
      {"screen", NodeType::Screen},
      {"cleaner", NodeType::Cleaner},
      {"cylinder", NodeType::Cylinder},
      {"aircompressor", NodeType::AirCompressor},
      {"heatexchanger", NodeType::HeatExchanger},
      {"heatexchangercondenser", NodeType::HeatExchanger},
      {"fan", NodeType::Fan},
      {"largetank", NodeType::LargeTank},
      {"smalltank", NodeType::SmallTank},
      {"unknownsizetank", NodeType::UnknownSizeTank},
      {"tankofunknownsize", NodeType::UnknownSizeTank},
      {"unknown", NodeType::Unknown},
  };
  auto it = table.find(key);
  return it == table.end() ? NodeType::Unknown : it->second;
}

// ---------------------------------------------------------------------------
// Flow groups

enum class FlowGroup : std::uint8_t {
  Additives,
  Broke,
  Chemicals,
  Condensate,
  Effluent,
  Gas,
  Pulp,
  SludgesAndPigments,
  Steam,
  Vapor,
  Water,
  WhiteWater,
};

inline constexpr std::size_t kFlowGroupCount = 12;

constexpr std::string_view to_string(FlowGroup g) {
  switch (g) {
    case FlowGroup::Additives: return "Additives";
    case FlowGroup::Broke: return "Broke";
    case FlowGroup::Chemicals: return "Chemicals";
    case FlowGroup::Condensate: return "Condensate";
    case FlowGroup::Effluent: return "Effluent";
    case FlowGroup::Gas: return "Gas";
    case FlowGroup::Pulp: return "Pulp";
    case FlowGroup::SludgesAndPigments: return "SludgesAndPigments";
    case FlowGroup::Steam: return "Steam";
    case FlowGroup::Vapor: return "Vapor";
    case FlowGroup::Water: return "Water";
    case FlowGroup::WhiteWater: return "WhiteWater";
  }
  return "";
}

inline std::optional<FlowGroup> parse_flow_group(std::string_view s) {
  const std::string key = detail::normalize_token(s);
  static const std::unordered_map<std::string, FlowGroup> table = {
      {"additives", FlowGroup::Additives},
      {"broke", FlowGroup::Broke},
      {"chemicals", FlowGroup::Chemicals},
      {"condensate", FlowGroup::Condensate},
      {"effluent", FlowGroup::Effluent},
      {"gas", FlowGroup::Gas},
      {"pulp", FlowGroup::Pulp},
      {"sludgesandpigments", FlowGroup::SludgesAndPigments},
      {"steam", FlowGroup::Steam},
      {"vapor", FlowGroup::Vapor},
      {"water", FlowGroup::Water},
      {"whitewater", FlowGroup::WhiteWater},
  };
  auto it = table.find(key);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// Set of flow groups carried by one edge. The empty set is the canonical
// representation of an unknown flow.
class FlowGroupSet {
 public:
  constexpr FlowGroupSet() = default;
  constexpr FlowGroupSet(std::initializer_list<FlowGroup> groups) {
    for (FlowGroup g : groups) insert(g);
  }

  // Parses a semicolon-separated list such as "Pulp;Water". An empty string
  // yields the unknown flow. Tokens outside the vocabulary are dropped.
  static FlowGroupSet parse(std::string_view s) {
    FlowGroupSet out;
    std::size_t start = 0;
    while (start <= s.size()) {
      std::size_t end = s.find(';', start);
      if (end == std::string_view::npos) end = s.size();
      if (auto g = parse_flow_group(s.substr(start, end - start))) out.insert(*g);
      start = end + 1;
    }
    return out;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < kFlowGroupCount; ++i) {
      if (bits_ & (1u << i)) {
        if (!out.empty()) out.push_back(';');
        out += plantmatch::to_string(static_cast<FlowGroup>(i));
      }
    }
    return out;
  }

  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(FlowGroup g) const {
    return bits_ & (1u << static_cast<unsigned>(g));
  }
  constexpr void insert(FlowGroup g) { bits_ |= (1u << static_cast<unsigned>(g)); }
  constexpr FlowGroupSet united(FlowGroupSet o) const {
    FlowGroupSet r;
    r.bits_ = static_cast<std::uint16_t>(bits_ | o.bits_);
    return r;
  }
  constexpr bool intersects(FlowGroupSet o) const { return (bits_ & o.bits_) != 0; }
  constexpr std::size_t size() const {
    std::size_t n = 0;
    for (std::uint16_t b = bits_; b; b &= static_cast<std::uint16_t>(b - 1)) ++n;
    return n;
  }
  constexpr std::uint16_t bits() const { return bits_; }

  friend constexpr bool operator==(FlowGroupSet a, FlowGroupSet b) {
    return a.bits_ == b.bits_;
  }

 private:
  std::uint16_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Graph structure

struct Node {
  std::string id;
  NodeType type = NodeType::Unknown;
};

// Endpoints are stored as node indices within the owning graph; the node id
// is reachable through ProcessGraph::node().
struct Edge {
  std::string id;
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  FlowGroupSet flows;
};

// Input rows as they appear in the node/edge tables.
struct NodeRow {
  std::string id;
  std::string type;
};

struct EdgeRow {
  std::string id;
  std::string source;
  std::string target;
  std::string flows;  // semicolon-separated, empty = unknown
};

// Directed labeled multigraph. Multi-edges and self-loops are permitted.
// Adjacency indexes are maintained on insertion and stay consistent with the
// edge list by construction.
class ProcessGraph {
 public:
  ProcessGraph() = default;

  std::uint32_t add_node(std::string id, NodeType type) {
    if (id.empty()) throw Error("node id must be nonempty");
    auto [it, inserted] = node_index_.emplace(id, static_cast<std::uint32_t>(nodes_.size()));
    if (!inserted) throw Error("duplicate node id '" + id + "'");
    nodes_.push_back(Node{std::move(id), type});
    out_edges_.emplace_back();
    in_edges_.emplace_back();
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::uint32_t add_edge(std::string id, std::uint32_t source, std::uint32_t target,
                         FlowGroupSet flows) {
    if (source >= nodes_.size() || target >= nodes_.size())
      throw Error("edge '" + id + "' references a node index out of range");
    auto [it, inserted] = edge_index_.emplace(id, static_cast<std::uint32_t>(edges_.size()));
    if (!inserted) throw Error("duplicate edge id '" + id + "'");
    const auto e = static_cast<std::uint32_t>(edges_.size());
    edges_.push_back(Edge{std::move(id), source, target, flows});
    out_edges_[source].push_back(e);
    in_edges_[target].push_back(e);
    return e;
  }

  std::uint32_t add_edge_by_id(std::string id, std::string_view source_id,
                               std::string_view target_id, FlowGroupSet flows) {
    auto s = find_node(source_id);
    if (!s) throw Error("edge '" + id + "' references unknown node '" + std::string(source_id) + "'");
    auto t = find_node(target_id);
    if (!t) throw Error("edge '" + id + "' references unknown node '" + std::string(target_id) + "'");
    return add_edge(std::move(id), *s, *t, flows);
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  const Edge& edge(std::uint32_t e) const { return edges_[e]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::optional<std::uint32_t> find_node(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t node_index(std::string_view id) const {
    auto i = find_node(id);
    if (!i) throw Error("unknown node id '" + std::string(id) + "'");
    return *i;
  }

  bool has_edge_id(std::string_view id) const {
    return edge_index_.count(std::string(id)) > 0;
  }

  const std::vector<std::uint32_t>& out_edges(std::uint32_t i) const { return out_edges_[i]; }
  const std::vector<std::uint32_t>& in_edges(std::uint32_t i) const { return in_edges_[i]; }

  // Total degree; a self-loop counts once in and once out.
  std::size_t degree(std::uint32_t i) const {
    return out_edges_[i].size() + in_edges_[i].size();
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::uint32_t> node_index_;
  std::unordered_map<std::string, std::uint32_t> edge_index_;
  std::vector<std::vector<std::uint32_t>> out_edges_;
  std::vector<std::vector<std::uint32_t>> in_edges_;
};

// ---------------------------------------------------------------------------
// Loading and serialization

inline ProcessGraph load_graph(const std::vector<NodeRow>& node_rows,
                               const std::vector<EdgeRow>& edge_rows) {
  ProcessGraph g;
  for (const auto& r : node_rows) g.add_node(r.id, parse_node_type(r.type));
  for (const auto& r : edge_rows)
    g.add_edge_by_id(r.id, r.source, r.target, FlowGroupSet::parse(r.flows));
  return g;
}

inline std::vector<NodeRow> node_rows(const ProcessGraph& g) {
  std::vector<NodeRow> rows;
  rows.reserve(g.node_count());
  for (const auto& n : g.nodes())
    rows.push_back(NodeRow{n.id, std::string(to_string(n.type))});
  return rows;
}

inline std::vector<EdgeRow> edge_rows(const ProcessGraph& g) {
  std::vector<EdgeRow> rows;
  rows.reserve(g.edge_count());
  for (const auto& e : g.edges())
    rows.push_back(EdgeRow{e.id, g.node(e.source).id, g.node(e.target).id,
                           e.flows.to_string()});
  return rows;
}

// ---------------------------------------------------------------------------
// Duplicate-node cleaning

// alias id -> canonical id. Chains are rejected: a canonical id must not
// itself appear as an alias.
using AliasMap = std::unordered_map<std::string, std::string>;

inline ProcessGraph merge_duplicate_nodes(const ProcessGraph& g, const AliasMap& aliases) {
  for (const auto& [alias, canon] : aliases) {
    if (alias == canon) throw Error("alias '" + alias + "' maps to itself");
    if (aliases.count(canon))
      throw Error("alias chain: '" + canon + "' is both a canonical id and an alias");
  }

  // canonical id -> aliases present in g, in node order for determinism.
  std::unordered_map<std::string, std::vector<std::uint32_t>> groups;
  std::unordered_map<std::uint32_t, std::string> alias_nodes;  // node idx -> canonical id
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    auto it = aliases.find(g.node(i).id);
    if (it == aliases.end()) continue;
    groups[it->second].push_back(i);
    alias_nodes.emplace(i, it->second);
  }

  // Resolve the merged type of every group and pick a representative node
  // position when the canonical id is not itself a node of g.
  struct Merged {
    NodeType type = NodeType::Unknown;
    bool canonical_present = false;
    std::uint32_t representative = 0;  // first alias node, when canonical absent
  };
  std::unordered_map<std::string, Merged> merged;
  for (auto& [canon, members] : groups) {
    Merged m;
    auto canon_idx = g.find_node(canon);
    m.canonical_present = canon_idx.has_value();
    m.representative = members.front();
    NodeType known = NodeType::Unknown;
    auto absorb = [&](NodeType t, const std::string& owner) {
      if (t == NodeType::Unknown) return;
      if (known != NodeType::Unknown && known != t)
        throw Error("conflicting node types while merging into '" + canon + "': " +
                    std::string(to_string(known)) + " vs " + std::string(to_string(t)) +
                    " (from '" + owner + "')");
      known = t;
    };
    if (canon_idx) absorb(g.node(*canon_idx).type, canon);
    for (auto i : members) absorb(g.node(i).type, g.node(i).id);
    m.type = known;
    merged.emplace(canon, m);
  }

  // Rebuild nodes in the original order, dropping alias nodes. When the
  // canonical id is absent from g, the first alias slot becomes the
  // canonical node so the ordering stays stable.
  ProcessGraph out;
  std::vector<std::uint32_t> remap(g.node_count());
  std::vector<bool> emitted_for(g.node_count(), false);
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    const Node& n = g.node(i);
    auto alias_it = alias_nodes.find(i);
    if (alias_it == alias_nodes.end()) {
      NodeType t = n.type;
      auto mit = merged.find(n.id);
      if (mit != merged.end()) t = mit->second.type;  // canonical node of a group
      remap[i] = out.add_node(n.id, t);
    } else {
      const Merged& m = merged.at(alias_it->second);
      if (!m.canonical_present && m.representative == i) {
        remap[i] = out.add_node(alias_it->second, m.type);
        emitted_for[i] = true;
      }
      // other alias slots resolved below once all nodes exist
    }
  }
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    auto alias_it = alias_nodes.find(i);
    if (alias_it == alias_nodes.end() || emitted_for[i]) continue;
    remap[i] = out.node_index(alias_it->second);
  }

  for (const auto& e : g.edges())
    out.add_edge(e.id, remap[e.source], remap[e.target], e.flows);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t distinct_node_types = 0;
  std::size_t distinct_flow_groups = 0;  // unknown counts as one kind when present
  std::vector<std::string> isolated_nodes;
  std::vector<std::string> dangling_endpoints;
  std::vector<std::string> duplicate_node_ids;
  std::vector<std::string> duplicate_edge_ids;
  bool adjacency_consistent = true;

  bool clean() const {
    return dangling_endpoints.empty() && duplicate_node_ids.empty() &&
           duplicate_edge_ids.empty() && adjacency_consistent;
  }

  std::string summary() const {
    std::ostringstream os;
    os << "nodes: " << node_count << "\n"
       << "edges: " << edge_count << "\n"
       << "distinct node types: " << distinct_node_types << "\n"
       << "distinct edge flow kinds: " << distinct_flow_groups << "\n";
    if (!isolated_nodes.empty()) os << "isolated nodes: " << isolated_nodes.size() << "\n";
    if (!dangling_endpoints.empty())
      os << "dangling endpoints: " << dangling_endpoints.size() << "\n";
    if (!adjacency_consistent) os << "adjacency indexes inconsistent\n";
    return os.str();
  }
};

inline ValidationReport validate(const ProcessGraph& g) {
  ValidationReport r;
  r.node_count = g.node_count();
  r.edge_count = g.edge_count();

  bool type_seen[kNodeTypeCount] = {};
  for (const auto& n : g.nodes()) type_seen[static_cast<std::size_t>(n.type)] = true;
  for (bool b : type_seen) r.distinct_node_types += b ? 1 : 0;

  std::uint16_t flow_bits = 0;
  bool unknown_flow_seen = false;
  for (const auto& e : g.edges()) {
    flow_bits |= e.flows.bits();
    if (e.flows.empty()) unknown_flow_seen = true;
  }
  for (std::uint16_t b = flow_bits; b; b &= static_cast<std::uint16_t>(b - 1))
    ++r.distinct_flow_groups;
  if (unknown_flow_seen) ++r.distinct_flow_groups;

  for (std::uint32_t i = 0; i < g.node_count(); ++i)
    if (g.degree(i) == 0) r.isolated_nodes.push_back(g.node(i).id);

  std::unordered_set<std::string> seen;
  for (const auto& n : g.nodes())
    if (!seen.insert(n.id).second) r.duplicate_node_ids.push_back(n.id);
  seen.clear();
  for (const auto& e : g.edges())
    if (!seen.insert(e.id).second) r.duplicate_edge_ids.push_back(e.id);

  // Rebuild adjacency from the edge list and compare against the indexes.
  std::vector<std::vector<std::uint32_t>> out_check(g.node_count()), in_check(g.node_count());
  for (std::uint32_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (ed.source >= g.node_count() || ed.target >= g.node_count()) {
      r.dangling_endpoints.push_back(ed.id);
      continue;
    }
    out_check[ed.source].push_back(e);
    in_check[ed.target].push_back(e);
  }
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    if (out_check[i] != g.out_edges(i) || in_check[i] != g.in_edges(i)) {
      r.adjacency_consistent = false;
      break;
    }
  }
  return r;
}

}  // namespace plantmatch
