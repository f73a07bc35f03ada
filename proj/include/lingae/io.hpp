#pragma once

// Plain-text formats: edge lists, comma-separated feature rows, and the flat
// `key = value` configuration file with [section] headers.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "lingae/errors.hpp"
#include "lingae/graph.hpp"
#include "lingae/matrix.hpp"

namespace lingae {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edge lists and features

struct EdgeList {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::size_t max_id_plus_one = 0;
};

/// One whitespace-separated zero-indexed pair per line; `#` starts a comment.
inline EdgeList read_edge_list(std::istream& in, const std::string& source = "<stream>") {
  EdgeList out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(detail::strip_comment(line));
    if (body.empty()) continue;
    std::istringstream fields{std::string(body)};
    std::string a, b, extra;
    NodeId u = 0, v = 0;
    if (!(fields >> a >> b) || (fields >> extra) || !detail::parse_number(a, u) || !detail::parse_number(b, v))
      throw DataError(source + ":" + std::to_string(line_no) + ": expected two non-negative node ids");
    out.pairs.emplace_back(u, v);
    out.max_id_plus_one = std::max(out.max_id_plus_one, std::max(u, v) + 1);
  }
  return out;
}

inline EdgeList read_edge_list(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_edge_list(in, path.string());
}

/// One row per node, comma-separated reals.
inline DenseMatrix read_features(std::istream& in, const std::string& source = "<stream>") {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      const auto cell = body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      double v = 0.0;
      if (!detail::parse_number(cell, v))
        throw DataError(source + ":" + std::to_string(line_no) + ": malformed number '" + std::string(detail::trim(cell)) +
                        "'");
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols)
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) + " columns, got " +
                      std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw DataError(source + ": no feature rows");
  return DenseMatrix(rows, cols, std::move(values));
}

inline DenseMatrix read_features(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_features(in, path.string());
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

inline void write_features(std::ostream& out, const DenseMatrix& x) {
  char buf[32];
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x(i, j));
      if (j) out << ',';
      out.write(buf, end - buf);
    }
    out << '\n';
  }
}

inline constexpr const char* kEdgeFile = "edges.txt";
inline constexpr const char* kFeatureFile = "features.csv";

/// Reads <dir>/edges.txt and, when present, <dir>/features.csv. The node
/// count is the feature row count, else the largest id + 1.
inline Graph load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  const auto edges = read_edge_list(dir / kEdgeFile);
  std::optional<DenseMatrix> features;
  if (std::filesystem::exists(dir / kFeatureFile)) features = read_features(dir / kFeatureFile);
  std::size_t n = features ? features->rows() : edges.max_id_plus_one;
  if (edges.max_id_plus_one > n)
    throw DataError(dir.string() + ": edge list references node " + std::to_string(edges.max_id_plus_one - 1) +
                    " but features have " + std::to_string(n) + " rows");
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(edges.pairs), n, std::move(features));
}

inline void save_dataset(const std::filesystem::path& dir, const Graph& g) {
  std::filesystem::create_directories(dir);
  std::ofstream edges(dir / kEdgeFile);
  if (!edges) throw DataError("cannot write " + (dir / kEdgeFile).string());
  write_edge_list(edges, g);
  if (g.features) {
    std::ofstream feats(dir / kFeatureFile);
    if (!feats) throw DataError("cannot write " + (dir / kFeatureFile).string());
    write_features(feats, *g.features);
  }
}

// ---------------------------------------------------------------------------
// Config

/// Flat `key = value` entries grouped by `[section]`. Keys before the first
/// header belong to section "".
class Config {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  static Config parse(std::istream& in, const std::string& source = "<config>") {
    Config c;
    c.source_ = source;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = detail::trim(detail::strip_comment(line));
      if (body.empty()) continue;
      if (body.front() == '[') {
        if (body.back() != ']' || body.size() < 3)
          throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed section header");
        section = std::string(detail::trim(body.substr(1, body.size() - 2)));
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
      const auto key = std::string(detail::trim(body.substr(0, eq)));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
      auto& slot = c.sections_[section];
      if (slot.contains(key))
        throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
      slot[key] = {std::string(detail::trim(body.substr(eq + 1))), line_no};
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse(in, path.string());
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.contains(key);
  }

  std::optional<std::string> get_string(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto e = s->second.find(key);
    if (e == s->second.end()) return std::nullopt;
    return e->second.value;
  }

  template <class T>
  std::optional<T> get(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    if constexpr (std::is_same_v<T, bool>) {
      if (e->value == "true" || e->value == "on" || e->value == "1") return true;
      if (e->value == "false" || e->value == "off" || e->value == "0") return false;
      throw error(*e, key, "a boolean");
    } else {
      T v{};
      if (!detail::parse_number(e->value, v)) throw error(*e, key, "a number");
      return v;
    }
  }

  template <class T>
  std::optional<std::vector<T>> get_list(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<T> out;
    std::string_view rest = e->value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto cell = detail::trim(rest.substr(0, comma));
      if constexpr (std::is_same_v<T, std::string>) {
        if (cell.empty()) throw error(*e, key, "a comma-separated list");
        out.emplace_back(cell);
      } else {
        T v{};
        if (!detail::parse_number(cell, v)) throw error(*e, key, "a comma-separated list of numbers");
        out.push_back(v);
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  /// Rejects keys outside `allowed` in the given section.
  void expect_keys(const std::string& section, const std::vector<std::string>& allowed) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, entry] : s->second)
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ConfigError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "' in [" + section +
                          "]");
  }

 private:
  const Entry* find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }

  ConfigError error(const Entry& e, const std::string& key, const char* expected) const {
    return ConfigError(source_ + ":" + std::to_string(e.line) + ": '" + key + "' must be " + expected + ", got '" +
                       e.value + "'");
  }

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace lingae
