// csv.hpp - readers and writers for the flat-file formats.
//
// All files are UTF-8, comma-separated, one header row:
//   nodes.csv    node_id,node_type
//   edges.csv    edge_id,source,target,flow_groups   (semicolon-separated list)
//   aliases.csv  canonical_id,alias_id
//   anchors.csv  source_node_id,target_node_id       (row order = anchor order)
//   truth.csv    source_node_id,target_node_id
//   matches.csv  source_node_id,target_node_id,similarity,matcher
#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plantmatch/graph.hpp"
#include "plantmatch/similarity.hpp"

namespace plantmatch::csv {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

// Splits one CSV line. Double-quoted fields may contain commas and escaped
// quotes (""), newlines inside fields are not supported.
inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace detail

// Reads a whole CSV file; verifies the header matches the expected column
// names (case-insensitive) and that every row has the right field count.
inline std::vector<std::vector<std::string>> read_table(
    const std::string& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("'" + path + "' is empty (missing header row)");
  auto header = detail::split_line(line);
  if (header.size() != expected_header.size())
    throw Error("'" + path + "': expected " + std::to_string(expected_header.size()) +
                " columns, found " + std::to_string(header.size()));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (plantmatch::detail::normalize_token(header[i]) !=
        plantmatch::detail::normalize_token(expected_header[i]))
      throw Error("'" + path + "': expected header column '" + expected_header[i] +
                  "', found '" + header[i] + "'");
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_line(line);
    if (fields.size() != expected_header.size())
      throw Error("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                  std::to_string(expected_header.size()) + " fields, found " +
                  std::to_string(fields.size()));
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline std::vector<NodeRow> read_node_rows(const std::string& path) {
  std::vector<NodeRow> rows;
  for (auto& r : read_table(path, {"node_id", "node_type"}))
    rows.push_back(NodeRow{std::move(r[0]), std::move(r[1])});
  return rows;
}

inline std::vector<EdgeRow> read_edge_rows(const std::string& path) {
  std::vector<EdgeRow> rows;
  for (auto& r : read_table(path, {"edge_id", "source", "target", "flow_groups"}))
    rows.push_back(EdgeRow{std::move(r[0]), std::move(r[1]), std::move(r[2]), std::move(r[3])});
  return rows;
}

inline ProcessGraph load_graph_csv(const std::string& nodes_path, const std::string& edges_path) {
  return load_graph(read_node_rows(nodes_path), read_edge_rows(edges_path));
}

inline void write_graph_csv(const ProcessGraph& g, const std::string& nodes_path,
                            const std::string& edges_path) {
  std::ofstream nout(nodes_path);
  if (!nout) throw Error("cannot write '" + nodes_path + "'");
  nout << "node_id,node_type\n";
  for (const auto& r : node_rows(g))
    nout << detail::quote_if_needed(r.id) << ',' << r.type << '\n';

  std::ofstream eout(edges_path);
  if (!eout) throw Error("cannot write '" + edges_path + "'");
  eout << "edge_id,source,target,flow_groups\n";
  for (const auto& r : edge_rows(g))
    eout << detail::quote_if_needed(r.id) << ',' << detail::quote_if_needed(r.source) << ','
         << detail::quote_if_needed(r.target) << ',' << r.flows << '\n';
}

// aliases.csv rows are (canonical_id, alias_id); the returned map is keyed by
// alias. An alias listed under two different canonicals is contradictory.
inline AliasMap read_aliases_csv(const std::string& path) {
  AliasMap out;
  for (auto& r : read_table(path, {"canonical_id", "alias_id"})) {
    const std::string& canon = r[0];
    const std::string& alias = r[1];
    auto [it, inserted] = out.emplace(alias, canon);
    if (!inserted && it->second != canon)
      throw Error("'" + path + "': alias '" + alias + "' maps to both '" + it->second +
                  "' and '" + canon + "'");
  }
  return out;
}

// Shared shape of anchors.csv and truth.csv.
inline std::vector<std::pair<std::string, std::string>> read_pairs_csv(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& r : read_table(path, {"source_node_id", "target_node_id"}))
    out.emplace_back(std::move(r[0]), std::move(r[1]));
  return out;
}

inline void write_pairs_csv(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "source_node_id,target_node_id\n";
  for (const auto& [s, t] : pairs)
    out << detail::quote_if_needed(s) << ',' << detail::quote_if_needed(t) << '\n';
}

struct MatchRow {
  std::string source;
  std::string target;
  double similarity = 0.0;
  std::string matcher;
};

inline void write_matches_csv(const std::string& path, const std::vector<MatchRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "source_node_id,target_node_id,similarity,matcher\n";
  for (const auto& r : rows)
    out << detail::quote_if_needed(r.source) << ',' << detail::quote_if_needed(r.target) << ','
        << detail::format_double(r.similarity) << ',' << r.matcher << '\n';
}

// Similarity matrix export: header row of target ids, first column of source
// ids.
inline void write_matrix_csv(const std::string& path, const SimilarityMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "source_id";
  for (const auto& id : m.col_ids()) out << ',' << detail::quote_if_needed(id);
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << detail::quote_if_needed(m.row_ids()[i]);
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << detail::format_double(m(i, j));
    out << '\n';
  }
}

inline SimilarityMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("'" + path + "' is empty (missing header row)");
  auto header = detail::split_line(line);
  if (header.empty() || plantmatch::detail::normalize_token(header[0]) != "sourceid")
    throw Error("'" + path + "': expected first header column 'source_id'");
  std::vector<std::string> col_ids(header.begin() + 1, header.end());

  std::vector<std::string> row_ids;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_line(line);
    if (fields.size() != col_ids.size() + 1)
      throw Error("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                  std::to_string(col_ids.size() + 1) + " fields, found " +
                  std::to_string(fields.size()));
    row_ids.push_back(fields[0]);
    std::vector<double> vals;
    vals.reserve(col_ids.size());
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        vals.push_back(std::stod(fields[j]));
      } catch (const std::exception&) {
        throw Error("'" + path + "' line " + std::to_string(line_no) + ": bad value '" +
                    fields[j] + "'");
      }
    }
    rows.push_back(std::move(vals));
  }
  SimilarityMatrix m(std::move(row_ids), col_ids);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < col_ids.size(); ++j) m.at(i, j) = rows[i][j];
  return m;
}

inline std::vector<MatchRow> read_matches_csv(const std::string& path) {
  std::vector<MatchRow> rows;
  for (auto& r :
       read_table(path, {"source_node_id", "target_node_id", "similarity", "matcher"})) {
    MatchRow m;
    m.source = std::move(r[0]);
    m.target = std::move(r[1]);
    try {
      m.similarity = std::stod(r[2]);
    } catch (const std::exception&) {
      throw Error("'" + path + "': bad similarity value '" + r[2] + "'");
    }
    m.matcher = std::move(r[3]);
    rows.push_back(std::move(m));
  }
  return rows;
}

}  // namespace plantmatch::csv
