// plantmatch - command-line pipeline for matching two process-plant graphs.
//
// Subcommands: simplify, similarity, match, evaluate, pipeline, grid.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 matcher failure.
//
// Site 1 on the command line is always the source graph: the neighborhood
// measure divides by source-node degrees and recall counts source-side truth
// pairs, so the two positions are not interchangeable.

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "plantmatch/plantmatch.hpp"

namespace {

using namespace plantmatch;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitMatcher = 3;

struct UsageError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct MatcherError : Error {
  using Error::Error;
};

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

// ---------------------------------------------------------------------------
// Option bundles

struct SiteOptions {
  std::string nodes;
  std::string edges;
  std::string aliases;
};

void add_site_options(CLI::App* cmd, const std::string& role, SiteOptions& out,
                      bool required = true) {
  auto* nodes = cmd->add_option("--" + role + "-nodes", out.nodes, role + " nodes.csv");
  auto* edges = cmd->add_option("--" + role + "-edges", out.edges, role + " edges.csv");
  if (required) {
    nodes->required();
    edges->required();
  }
  cmd->add_option("--" + role + "-aliases", out.aliases,
                  role + " aliases.csv for duplicate-node cleaning");
}

struct SimilarityOptions {
  std::string measure = "type";
  std::string anchors;
  double weight_a = 0.5;
  double sigma1 = 5.0;
  double sigma2 = 1.0;
};

void add_similarity_options(CLI::App* cmd, SimilarityOptions& out) {
  cmd->add_option("--similarity", out.measure,
                  "similarity measure: type, neighbor, anchor, combined")
      ->default_val("type");
  cmd->add_option("--anchors", out.anchors,
                  "anchors.csv (required for anchor/combined similarity)");
  cmd->add_option("--weight-a", out.weight_a,
                  "neighbor-vs-anchor weight a for the combined measure")
      ->default_val(0.5);
  cmd->add_option("--sigma1", out.sigma1, "anchor influence decay")->default_val(5.0);
  cmd->add_option("--sigma2", out.sigma2, "anchor vector comparison width")
      ->default_val(1.0);
}

struct MatcherOptions {
  std::string matcher = "dspfp1";
  std::uint64_t seed = 0;
  // dspfp
  double alpha = 1.0;
  double lambda = 0.5;
  double eps = 1e-5;
  int max_iter = 100;
  // flooding
  double t_rel = 1.0;
  bool no_type_filter = false;
  // annealing
  double w_wec = 0.5;
  double w_sim = 0.5;
  double budget_seconds = 300.0;
  bool ignore_flow_labels = false;
  bool deterministic = false;
  std::uint64_t moves = 200000;
};

void add_matcher_options(CLI::App* cmd, MatcherOptions& out) {
  cmd->add_option("--matcher", out.matcher,
                  "matching algorithm: dspfp1, dspfpM, simflood, anneal")
      ->default_val("dspfp1");
  cmd->add_option("--seed", out.seed, "random seed")->default_val(0);
  cmd->add_option("--alpha", out.alpha, "dspfp step size")->default_val(1.0);
  cmd->add_option("--lambda", out.lambda, "dspfp node-similarity weight")->default_val(0.5);
  cmd->add_option("--eps", out.eps, "convergence limit for dspfp/simflood")
      ->default_val(1e-5);
  cmd->add_option("--max-iter", out.max_iter, "iteration cap for dspfp/simflood")
      ->default_val(100);
  cmd->add_option("--t-rel", out.t_rel, "simflood selectThreshold relative limit")
      ->default_val(1.0);
  cmd->add_flag("--no-type-filter", out.no_type_filter,
                "keep simflood matches between different known node types");
  cmd->add_option("--w-wec", out.w_wec, "annealer WEC weight")->default_val(0.5);
  cmd->add_option("--w-sim", out.w_sim, "annealer node-similarity weight")->default_val(0.5);
  cmd->add_option("--budget-seconds", out.budget_seconds, "annealer wall-clock budget")
      ->default_val(300.0);
  cmd->add_flag("--ignore-flow-labels", out.ignore_flow_labels,
                "count an edge as conserved regardless of flow compatibility");
  cmd->add_flag("--deterministic", out.deterministic,
                "replace the annealer wall-clock budget with a fixed move count");
  cmd->add_option("--moves", out.moves, "move count used with --deterministic")
      ->default_val(200000);
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces

ProcessGraph load_site(const SiteOptions& site) {
  try {
    auto g = csv::load_graph_csv(site.nodes, site.edges);
    if (!site.aliases.empty())
      g = merge_duplicate_nodes(g, csv::read_aliases_csv(site.aliases));
    return g;
  } catch (const Error& e) {
    throw DataError(e.what());
  }
}

AnchorSet load_anchors(const std::string& path) {
  try {
    AnchorSet anchors;
    anchors.pairs = csv::read_pairs_csv(path);
    return anchors;
  } catch (const Error& e) {
    throw DataError(e.what());
  }
}

TruthSet load_truth(const std::string& path) {
  try {
    const auto pairs = csv::read_pairs_csv(path);
    return TruthSet(pairs.begin(), pairs.end());
  } catch (const Error& e) {
    throw DataError(e.what());
  }
}

SimilarityConfig make_similarity_config(const SimilarityOptions& opts,
                                        const AnchorSet& anchors) {
  SimilarityConfig cfg;
  cfg.measure = parse_similarity_measure(opts.measure);
  cfg.a = opts.weight_a;
  cfg.sigma1 = opts.sigma1;
  cfg.sigma2 = opts.sigma2;
  cfg.anchors = anchors;
  return cfg;
}

void check_similarity_config(const SimilarityOptions& opts) {
  const auto measure = parse_similarity_measure(opts.measure);  // throws on bad name
  const bool needs_anchors = measure == SimilarityMeasure::Anchor ||
                             measure == SimilarityMeasure::Combined;
  if (needs_anchors && opts.anchors.empty())
    throw UsageError("similarity measure '" + opts.measure + "' requires --anchors");
  if (!(opts.weight_a >= 0.0 && opts.weight_a <= 1.0))
    throw UsageError("--weight-a must lie in [0,1]");
  if (opts.sigma1 <= 0.0 || opts.sigma2 <= 0.0)
    throw UsageError("--sigma1 and --sigma2 must be positive");
}

void check_matcher_config(const MatcherOptions& opts) {
  const std::string m = opts.matcher;
  if (m != "dspfp1" && m != "dspfpM" && m != "simflood" && m != "anneal")
    throw UsageError("unknown matcher '" + m + "'");
  if (m == "anneal") {
    if (std::abs(opts.w_wec + opts.w_sim - 1.0) > 1e-9)
      throw UsageError("--w-wec and --w-sim must sum to 1");
    if (!opts.deterministic && opts.budget_seconds <= 0.0)
      throw UsageError("--budget-seconds must be positive");
    if (opts.deterministic && opts.moves == 0)
      throw UsageError("--moves must be positive with --deterministic");
  }
}

struct MatchOutcome {
  std::vector<csv::MatchRow> rows;        // one row per retained match
  std::optional<double> objective;        // alignment matchers only
  std::string matcher;
  std::size_t rows_before_filter = 0;
};

MatchOutcome run_matcher(const ProcessGraph& g1, const ProcessGraph& g2,
                         const SimilarityMatrix& k, const MatcherOptions& opts,
                         std::optional<double> filter_limit) {
  MatchOutcome out;
  out.matcher = opts.matcher;
  std::vector<std::pair<std::string, std::string>> pairs;
  try {
    if (opts.matcher == "dspfp1" || opts.matcher == "dspfpM") {
      DspfpParams p;
      p.alpha = opts.alpha;
      p.lambda = opts.lambda;
      p.eps = opts.eps;
      p.max_iter = opts.max_iter;
      p.mode = opts.matcher == "dspfp1" ? DspfpParams::Mode::OneToOne
                                        : DspfpParams::Mode::ManyToOne;
      p.validate();
      const auto alignment = dspfp(g1, g2, k, p);
      pairs = alignment.pairs;
      out.objective = alignment.score;
    } else if (opts.matcher == "simflood") {
      FloodParams p;
      p.eps = opts.eps;
      p.max_iter = opts.max_iter;
      p.t_rel = opts.t_rel;
      p.apply_type_filter = !opts.no_type_filter;
      p.validate();
      const auto matches = similarity_flooding(g1, g2, k, p);
      pairs.assign(matches.begin(), matches.end());
      // deterministic output order: by source then target node order
      std::sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
        const auto ka = std::make_pair(g1.node_index(a.first), g2.node_index(a.second));
        const auto kb = std::make_pair(g1.node_index(b.first), g2.node_index(b.second));
        return ka < kb;
      });
    } else {
      AnnealParams p;
      p.w_wec = opts.w_wec;
      p.w_sim = opts.w_sim;
      p.budget_seconds = opts.budget_seconds;
      p.seed = opts.seed;
      p.respect_flow_labels = !opts.ignore_flow_labels;
      if (opts.deterministic) p.max_moves = opts.moves;
      const auto alignment = anneal(g1, g2, k, p);
      pairs = alignment.pairs;
      out.objective = alignment.score;
    }
  } catch (const Error& e) {
    throw MatcherError(e.what());
  }

  out.rows_before_filter = pairs.size();
  for (const auto& [s, t] : pairs) {
    const double similarity = k(g1.node_index(s), g2.node_index(t));
    if (filter_limit && similarity < *filter_limit) continue;
    out.rows.push_back(csv::MatchRow{s, t, similarity, out.matcher});
  }
  return out;
}

// Truth pairs whose nodes were simplified away cannot be produced by any
// matcher run on the simplified graphs; they are dropped from the evaluation
// with a note in the summary.
struct UsableTruth {
  TruthSet truth;
  std::size_t dropped = 0;
};

UsableTruth restrict_truth(const TruthSet& truth, const ProcessGraph& g1,
                           const ProcessGraph& g2) {
  UsableTruth out;
  for (const auto& [s, t] : truth) {
    if (g1.find_node(s) && g2.find_node(t))
      out.truth.emplace(s, t);
    else
      ++out.dropped;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand payloads

struct SimplifyCmd {
  SiteOptions site;
  std::string profile = "none";
  std::string out_nodes;
  std::string out_edges;
};

int run_simplify(const SimplifyCmd& cmd) {
  const auto profile = parse_simplify_profile(cmd.profile);
  const auto g = load_site(cmd.site);
  const auto simplified = apply_profile(g, profile);
  try {
    csv::write_graph_csv(simplified, cmd.out_nodes, cmd.out_edges);
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  std::cout << "profile: " << to_string(profile) << "\n"
            << "nodes: " << g.node_count() << " -> " << simplified.node_count() << "\n"
            << "edges: " << g.edge_count() << " -> " << simplified.edge_count() << "\n";
  return kExitOk;
}

struct SimilarityCmd {
  SiteOptions source, target;
  std::string profile = "none";
  SimilarityOptions similarity;
  std::string out;
};

int run_similarity(const SimilarityCmd& cmd) {
  check_similarity_config(cmd.similarity);
  const auto profile = parse_simplify_profile(cmd.profile);
  const auto g1 = apply_profile(load_site(cmd.source), profile);
  const auto g2 = apply_profile(load_site(cmd.target), profile);
  AnchorSet anchors;
  if (!cmd.similarity.anchors.empty()) anchors = load_anchors(cmd.similarity.anchors);
  try {
    const auto k = similarity_matrix(g1, g2, make_similarity_config(cmd.similarity, anchors));
    csv::write_matrix_csv(cmd.out, k);
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  std::cout << "similarity matrix: " << g1.node_count() << " x " << g2.node_count()
            << " -> " << cmd.out << "\n";
  return kExitOk;
}

// Reorders a matrix loaded from disk into the graphs' node order.
SimilarityMatrix align_matrix_to_graphs(const SimilarityMatrix& m, const ProcessGraph& g1,
                                        const ProcessGraph& g2) {
  if (m.rows() != g1.node_count() || m.cols() != g2.node_count())
    throw DataError("similarity matrix is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + " but the graphs have " +
                    std::to_string(g1.node_count()) + " and " +
                    std::to_string(g2.node_count()) + " nodes");
  std::vector<std::size_t> row_of(g1.node_count()), col_of(g2.node_count());
  {
    std::unordered_map<std::string, std::size_t> row_index, col_index;
    for (std::size_t i = 0; i < m.rows(); ++i) row_index.emplace(m.row_ids()[i], i);
    for (std::size_t j = 0; j < m.cols(); ++j) col_index.emplace(m.col_ids()[j], j);
    for (std::uint32_t u = 0; u < g1.node_count(); ++u) {
      auto it = row_index.find(g1.node(u).id);
      if (it == row_index.end())
        throw DataError("matrix has no row for source node '" + g1.node(u).id + "'");
      row_of[u] = it->second;
    }
    for (std::uint32_t v = 0; v < g2.node_count(); ++v) {
      auto it = col_index.find(g2.node(v).id);
      if (it == col_index.end())
        throw DataError("matrix has no column for target node '" + g2.node(v).id + "'");
      col_of[v] = it->second;
    }
  }
  std::vector<std::string> row_ids, col_ids;
  for (const auto& n : g1.nodes()) row_ids.push_back(n.id);
  for (const auto& n : g2.nodes()) col_ids.push_back(n.id);
  SimilarityMatrix out(std::move(row_ids), std::move(col_ids));
  for (std::uint32_t u = 0; u < g1.node_count(); ++u)
    for (std::uint32_t v = 0; v < g2.node_count(); ++v)
      out.at(u, v) = m(row_of[u], col_of[v]);
  return out;
}

struct MatchCmd {
  SiteOptions source, target;
  std::string profile = "none";
  std::string matrix;
  MatcherOptions matcher;
  std::optional<double> filter_limit;
  std::string truth;
  std::string out = "matches.csv";
};

int run_match(const MatchCmd& cmd) {
  check_matcher_config(cmd.matcher);
  const auto profile = parse_simplify_profile(cmd.profile);
  const auto g1 = apply_profile(load_site(cmd.source), profile);
  const auto g2 = apply_profile(load_site(cmd.target), profile);
  if (g1.node_count() == 0 || g2.node_count() == 0)
    throw DataError("a graph is empty after simplification; nothing to match");

  SimilarityMatrix k;
  try {
    k = align_matrix_to_graphs(csv::read_matrix_csv(cmd.matrix), g1, g2);
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(e.what());
  }

  const auto outcome = run_matcher(g1, g2, k, cmd.matcher, cmd.filter_limit);
  try {
    csv::write_matches_csv(cmd.out, outcome.rows);
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  std::cout << "matcher: " << outcome.matcher << "\n";
  if (outcome.objective) std::cout << "objective: " << format_double(*outcome.objective) << "\n";
  std::cout << "matches written: " << outcome.rows.size() << " -> " << cmd.out << "\n";
  if (!cmd.truth.empty()) {
    const auto usable = restrict_truth(load_truth(cmd.truth), g1, g2);
    MatchSet predicted;
    for (const auto& r : outcome.rows) predicted.emplace(r.source, r.target);
    if (usable.dropped > 0)
      std::cout << "truth pairs outside the simplified graphs: " << usable.dropped << "\n";
    if (usable.truth.empty())
      std::cout << "recall: n/a (no usable truth pairs)\n";
    else
      std::cout << "recall: " << format_double(recall(predicted, usable.truth)) << "\n";
  }
  return kExitOk;
}

struct PipelineCmd {
  SiteOptions source, target;
  std::string profile = "none";
  SimilarityOptions similarity;
  MatcherOptions matcher;
  std::optional<double> filter_limit;
  std::string truth;
  std::string out = "matches.csv";
};

int run_pipeline(const PipelineCmd& cmd) {
  // config validation happens before any file is touched
  check_similarity_config(cmd.similarity);
  check_matcher_config(cmd.matcher);
  const auto profile = parse_simplify_profile(cmd.profile);

  const auto raw1 = load_site(cmd.source);
  const auto raw2 = load_site(cmd.target);
  const auto g1 = apply_profile(raw1, profile);
  const auto g2 = apply_profile(raw2, profile);
  std::cout << "simplification: " << to_string(profile) << "\n"
            << "source: nodes " << raw1.node_count() << " -> " << g1.node_count()
            << ", edges " << raw1.edge_count() << " -> " << g1.edge_count() << "\n"
            << "target: nodes " << raw2.node_count() << " -> " << g2.node_count()
            << ", edges " << raw2.edge_count() << " -> " << g2.edge_count() << "\n";
  if (g1.node_count() == 0 || g2.node_count() == 0)
    throw DataError("a graph is empty after simplification; matcher skipped");

  AnchorSet anchors;
  if (!cmd.similarity.anchors.empty()) anchors = load_anchors(cmd.similarity.anchors);
  SimilarityMatrix k;
  try {
    k = similarity_matrix(g1, g2, make_similarity_config(cmd.similarity, anchors));
  } catch (const Error& e) {
    throw DataError(e.what());
  }

  const auto outcome = run_matcher(g1, g2, k, cmd.matcher, cmd.filter_limit);
  try {
    csv::write_matches_csv(cmd.out, outcome.rows);
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  std::cout << "matcher: " << outcome.matcher << "\n";
  if (outcome.objective) std::cout << "objective: " << format_double(*outcome.objective) << "\n";
  if (cmd.filter_limit)
    std::cout << "filter limit " << format_double(*cmd.filter_limit) << ": "
              << outcome.rows.size() << " of " << outcome.rows_before_filter
              << " matches kept\n";
  std::cout << "matches written: " << outcome.rows.size() << " -> " << cmd.out << "\n";

  if (!cmd.truth.empty()) {
    const auto usable = restrict_truth(load_truth(cmd.truth), g1, g2);
    MatchSet predicted;
    for (const auto& r : outcome.rows) predicted.emplace(r.source, r.target);
    if (usable.dropped > 0)
      std::cout << "truth pairs outside the simplified graphs: " << usable.dropped << "\n";
    if (usable.truth.empty())
      std::cout << "recall: n/a (no usable truth pairs)\n";
    else
      std::cout << "recall: " << format_double(recall(predicted, usable.truth)) << "\n";
  }
  return kExitOk;
}

struct EvaluateCmd {
  std::string matches;
  std::string truth;
  std::vector<double> limits;
  std::string out;
};

int run_evaluate(const EvaluateCmd& cmd) {
  std::vector<csv::MatchRow> rows;
  TruthSet truth;
  try {
    rows = csv::read_matches_csv(cmd.matches);
    truth = load_truth(cmd.truth);
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  if (truth.empty()) throw DataError("truth set is empty");

  if (cmd.limits.empty()) {
    MatchSet predicted;
    for (const auto& r : rows) predicted.emplace(r.source, r.target);
    std::cout << "matches: " << rows.size() << "\n"
              << "recall: " << format_double(recall(predicted, truth)) << "\n";
    return kExitOk;
  }

  std::vector<ScoredMatch> scored;
  scored.reserve(rows.size());
  for (const auto& r : rows) scored.push_back({{r.source, r.target}, r.similarity});
  std::vector<FilterSweepRow> sweep;
  try {
    sweep = sweep_filter(scored, truth, cmd.limits);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::ostringstream table;
  table << "limit,retained,recall\n";
  for (const auto& r : sweep)
    table << format_double(r.limit) << ',' << r.retained << ',' << format_double(r.recall)
          << '\n';
  if (cmd.out.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream f(cmd.out);
    if (!f) throw DataError("cannot write '" + cmd.out + "'");
    f << table.str();
    std::cout << "sweep written: " << sweep.size() << " rows -> " << cmd.out << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Experiment grid

struct GridCmd {
  std::string config;
  std::string out;
  int workers = 0;  // 0: PLANTMATCH_WORKERS or hardware concurrency
};

struct GridCell {
  std::string simplify;
  std::string similarity;
  std::string matcher;
  int repeat = 0;
  std::uint64_t seed = 0;
};

struct GridRowResult {
  GridCell cell;
  std::optional<double> recall;
  std::optional<double> objective;
  double wall_seconds = 0.0;
  std::string status = "ok";
};

int run_grid(const GridCmd& cmd) {
  json cfg;
  {
    std::ifstream f(cmd.config);
    if (!f) throw DataError("cannot open '" + cmd.config + "'");
    try {
      f >> cfg;
    } catch (const json::exception& e) {
      throw DataError("bad grid config: " + std::string(e.what()));
    }
  }

  auto site_from = [&](const char* key) {
    if (!cfg.contains(key)) throw UsageError(std::string("grid config lacks '") + key + "'");
    SiteOptions site;
    site.nodes = cfg[key].value("nodes", "");
    site.edges = cfg[key].value("edges", "");
    site.aliases = cfg[key].value("aliases", "");
    if (site.nodes.empty() || site.edges.empty())
      throw UsageError(std::string("grid config '") + key + "' needs nodes and edges");
    return site;
  };
  const SiteOptions source = site_from("source");
  const SiteOptions target = site_from("target");
  const std::string anchors_path = cfg.value("anchors", "");
  const std::string truth_path = cfg.value("truth", "");
  const auto simplifies = cfg.value("simplify", std::vector<std::string>{"none"});
  const auto similarities = cfg.value("similarity", std::vector<std::string>{"type"});
  const auto matchers = cfg.value("matcher", std::vector<std::string>{"dspfp1"});
  const int repeats = cfg.value("repeats", 1);
  const std::uint64_t base_seed = cfg.value("seed", 0);
  const double budget_seconds = cfg.value("budget_seconds", 300.0);
  const std::uint64_t deterministic_moves = cfg.value("deterministic_moves", 0);
  const double weight_a = cfg.value("weight_a", 0.5);
  std::optional<double> filter_limit;
  if (cfg.contains("filter_limit") && !cfg["filter_limit"].is_null())
    filter_limit = cfg["filter_limit"].get<double>();
  if (repeats < 1) throw UsageError("grid config: repeats must be >= 1");

  // config validation of every cell before any work starts
  for (const auto& s : simplifies) parse_simplify_profile(s);
  for (const auto& m : matchers)
    if (m != "dspfp1" && m != "dspfpM" && m != "simflood" && m != "anneal")
      throw UsageError("grid config: unknown matcher '" + m + "'");
  for (const auto& s : similarities) {
    const auto measure = parse_similarity_measure(s);
    if ((measure == SimilarityMeasure::Anchor || measure == SimilarityMeasure::Combined) &&
        anchors_path.empty())
      throw UsageError("grid config: similarity '" + s + "' requires anchors");
  }

  const auto raw1 = load_site(source);
  const auto raw2 = load_site(target);
  AnchorSet anchors;
  if (!anchors_path.empty()) anchors = load_anchors(anchors_path);
  TruthSet truth;
  if (!truth_path.empty()) truth = load_truth(truth_path);

  std::vector<GridCell> cells;
  std::size_t cell_index = 0;
  for (const auto& sp : simplifies)
    for (const auto& sim : similarities)
      for (const auto& m : matchers)
        for (int r = 0; r < repeats; ++r) {
          GridCell cell;
          cell.simplify = sp;
          cell.similarity = sim;
          cell.matcher = m;
          cell.repeat = r;
          cell.seed = mix_seed(base_seed, cell_index++);
          cells.push_back(cell);
        }

  int workers = cmd.workers;
  if (workers <= 0) {
    if (const char* env = std::getenv("PLANTMATCH_WORKERS")) workers = std::atoi(env);
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = std::min<int>(workers, static_cast<int>(cells.size()));

  std::vector<GridRowResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const GridCell& cell = cells[i];
      GridRowResult row;
      row.cell = cell;
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto profile = parse_simplify_profile(cell.simplify);
        const auto g1 = apply_profile(raw1, profile);
        const auto g2 = apply_profile(raw2, profile);
        if (g1.node_count() == 0 || g2.node_count() == 0)
          throw Error("graph empty after simplification");

        SimilarityOptions sim_opts;
        sim_opts.measure = cell.similarity;
        sim_opts.weight_a = weight_a;
        const auto k = similarity_matrix(g1, g2, make_similarity_config(sim_opts, anchors));

        MatcherOptions m_opts;
        m_opts.matcher = cell.matcher;
        m_opts.seed = cell.seed;
        m_opts.budget_seconds = budget_seconds;
        if (deterministic_moves > 0) {
          m_opts.deterministic = true;
          m_opts.moves = deterministic_moves;
        }
        const auto outcome = run_matcher(g1, g2, k, m_opts, filter_limit);
        row.objective = outcome.objective;
        if (!truth.empty()) {
          const auto usable = restrict_truth(truth, g1, g2);
          MatchSet predicted;
          for (const auto& r : outcome.rows) predicted.emplace(r.source, r.target);
          if (!usable.truth.empty()) row.recall = recall(predicted, usable.truth);
        }
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      results[i] = std::move(row);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream out(cmd.out);
  if (!out) throw DataError("cannot write '" + cmd.out + "'");
  out << "simplify,similarity,matcher,repeat,seed,recall,objective,wall_seconds,status\n";
  for (const auto& r : results) {
    out << r.cell.simplify << ',' << r.cell.similarity << ',' << r.cell.matcher << ','
        << r.cell.repeat << ',' << r.cell.seed << ','
        << (r.recall ? format_double(*r.recall) : "") << ','
        << (r.objective ? format_double(*r.objective) : "") << ','
        << format_double(r.wall_seconds) << ',' << csv::detail::quote_if_needed(r.status)
        << '\n';
  }
  std::cout << "grid cells: " << results.size() << " -> " << cmd.out << "\n";
  std::size_t failed = 0;
  for (const auto& r : results)
    if (r.status != "ok") ++failed;
  if (failed > 0) std::cout << "cells with errors: " << failed << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "plantmatch - find corresponding components between two process-plant "
      "graphs.\nSite 1 is always the source graph; similarity and recall are "
      "computed from its side."};
  app.require_subcommand(1);

  SimplifyCmd simplify_cmd;
  auto* simplify_app = app.add_subcommand("simplify", "simplify one graph and write it back");
  add_site_options(simplify_app, "source", simplify_cmd.site);
  simplify_app->add_option("--profile", simplify_cmd.profile, "none, simp1 or simp2")
      ->default_val("none");
  simplify_app->add_option("--out-nodes", simplify_cmd.out_nodes)->required();
  simplify_app->add_option("--out-edges", simplify_cmd.out_edges)->required();

  SimilarityCmd similarity_cmd;
  auto* similarity_app =
      app.add_subcommand("similarity", "compute the source x target similarity matrix");
  add_site_options(similarity_app, "source", similarity_cmd.source);
  add_site_options(similarity_app, "target", similarity_cmd.target);
  similarity_app->add_option("--simplify", similarity_cmd.profile, "none, simp1 or simp2")
      ->default_val("none");
  add_similarity_options(similarity_app, similarity_cmd.similarity);
  similarity_app->add_option("--out", similarity_cmd.out, "matrix CSV path")->required();

  MatchCmd match_cmd;
  auto* match_app =
      app.add_subcommand("match", "run a matcher on simplified graphs and a matrix file");
  add_site_options(match_app, "source", match_cmd.source);
  add_site_options(match_app, "target", match_cmd.target);
  match_app->add_option("--simplify", match_cmd.profile, "none, simp1 or simp2")
      ->default_val("none");
  match_app->add_option("--matrix", match_cmd.matrix, "similarity matrix CSV")->required();
  add_matcher_options(match_app, match_cmd.matcher);
  double match_filter = -1.0;
  auto* match_filter_opt = match_app->add_option(
      "--filter-limit", match_filter, "drop matches with similarity below this limit");
  match_app->add_option("--truth", match_cmd.truth, "truth.csv for recall reporting");
  match_app->add_option("--out", match_cmd.out, "matches CSV path")->default_val("matches.csv");

  PipelineCmd pipeline_cmd;
  auto* pipeline_app = app.add_subcommand(
      "pipeline", "load, clean, simplify, score, match, filter and evaluate in one run");
  add_site_options(pipeline_app, "source", pipeline_cmd.source);
  add_site_options(pipeline_app, "target", pipeline_cmd.target);
  pipeline_app->add_option("--simplify", pipeline_cmd.profile, "none, simp1 or simp2")
      ->default_val("none");
  add_similarity_options(pipeline_app, pipeline_cmd.similarity);
  add_matcher_options(pipeline_app, pipeline_cmd.matcher);
  double pipeline_filter = -1.0;
  auto* pipeline_filter_opt = pipeline_app->add_option(
      "--filter-limit", pipeline_filter, "drop matches with similarity below this limit");
  pipeline_app->add_option("--truth", pipeline_cmd.truth, "truth.csv for recall reporting");
  pipeline_app->add_option("--out", pipeline_cmd.out, "matches CSV path")
      ->default_val("matches.csv");

  EvaluateCmd evaluate_cmd;
  auto* evaluate_app =
      app.add_subcommand("evaluate", "score a matches file against handpicked truth");
  evaluate_app->add_option("--matches", evaluate_cmd.matches, "matches.csv")->required();
  evaluate_app->add_option("--truth", evaluate_cmd.truth, "truth.csv")->required();
  evaluate_app->add_option("--limits", evaluate_cmd.limits,
                           "ascending filter limits for a sweep table");
  evaluate_app->add_option("--out", evaluate_cmd.out, "write the sweep table here");

  GridCmd grid_cmd;
  auto* grid_app = app.add_subcommand("grid", "run an experiment grid from a JSON config");
  grid_app->add_option("--config", grid_cmd.config, "grid JSON config")->required();
  grid_app->add_option("--out", grid_cmd.out, "long-format results CSV")->required();
  grid_app->add_option("--workers", grid_cmd.workers,
                       "worker count (default: PLANTMATCH_WORKERS or hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  if (match_filter_opt->count() > 0) match_cmd.filter_limit = match_filter;
  if (pipeline_filter_opt->count() > 0) pipeline_cmd.filter_limit = pipeline_filter;

  try {
    if (simplify_app->parsed()) return run_simplify(simplify_cmd);
    if (similarity_app->parsed()) return run_similarity(similarity_cmd);
    if (match_app->parsed()) return run_match(match_cmd);
    if (pipeline_app->parsed()) return run_pipeline(pipeline_cmd);
    if (evaluate_app->parsed()) return run_evaluate(evaluate_cmd);
    if (grid_app->parsed()) return run_grid(grid_cmd);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MatcherError& e) {
    std::cerr << "matcher error: " << e.what() << "\n";
    return kExitMatcher;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
