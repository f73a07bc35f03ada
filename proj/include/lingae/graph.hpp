#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "lingae/errors.hpp"
#include "lingae/matrix.hpp"

namespace lingae {

using NodeId = std::size_t;

/// Undirected edge, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge make(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Unweighted undirected graph. The adjacency is binary, symmetric and
/// carries a self-loop on every node. `features` is empty for a featureless
/// graph.
struct Graph {
  std::size_t n = 0;
  SparseMatrix adjacency;
  std::optional<DenseMatrix> features;

  bool featureless() const noexcept { return !features.has_value(); }

  bool has_edge(NodeId a, NodeId b) const { return adjacency.contains(a, b); }

  std::size_t degree(NodeId i) const { return adjacency.row_columns(i).size(); }

  /// Non-loop undirected edges in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j : adjacency.row_columns(i))
        if (j > i) out.push_back({i, j});
    return out;
  }

  std::size_t edge_count() const { return (adjacency.nnz() - n) / 2; }
};

/// Ã = D^{-1/2} A D^{-1/2}.
struct DiffusionMatrix {
  SparseMatrix matrix;
};

enum class Task { LinkPrediction, NodePrediction };

/// Deterministic 70/10/20 partition. Edge lists are filled for the link
/// task, node lists for the node task.
struct SplitPlan {
  Task task = Task::LinkPrediction;
  std::uint64_t seed = 0;
  std::vector<Edge> train_edges, val_edges, test_edges;
  std::vector<NodeId> train_nodes, val_nodes, test_nodes;
};

inline Graph from_edge_list(std::span<const std::pair<NodeId, NodeId>> pairs, std::size_t n,
                            std::optional<DenseMatrix> features = std::nullopt) {
  if (features && features->rows() != n)
    throw ContractViolation("from_edge_list: feature rows (" + std::to_string(features->rows()) +
                            ") != node count (" + std::to_string(n) + ")");
  std::vector<Triplet> t;
  t.reserve(2 * pairs.size() + n);
  for (auto [a, b] : pairs) {
    if (a >= n || b >= n)
      throw ContractViolation("from_edge_list: node id out of range [0," + std::to_string(n) + ")");
    if (a == b) continue;
    t.push_back({a, b, 1.0});
    t.push_back({b, a, 1.0});
  }
  for (NodeId i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  SparseMatrix summed = SparseMatrix::from_triplets(n, n, std::move(t));
  // collapse duplicates back to binary
  std::vector<Triplet> binary;
  binary.reserve(summed.nnz());
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j : summed.row_columns(i)) binary.push_back({i, j, 1.0});
  return Graph{n, SparseMatrix::from_triplets(n, n, std::move(binary)), std::move(features)};
}

inline Graph from_edge_list(const std::vector<Edge>& edges, std::size_t n,
                            std::optional<DenseMatrix> features = std::nullopt) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(edges.size());
  for (const auto& e : edges) pairs.emplace_back(e.u, e.v);
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), n, std::move(features));
}

/// Feature matrix used by the featureless model.
inline DenseMatrix identity_features(const Graph& g) { return DenseMatrix::identity(g.n); }

inline DiffusionMatrix diffusion(const Graph& g) {
  const SparseMatrix& a = g.adjacency;
  std::vector<double> inv_sqrt_degree(g.n);
  for (NodeId i = 0; i < g.n; ++i) {
    double d = 0.0;
    for (double v : a.row_values(i)) d += v;
    if (d <= 0.0) throw ContractViolation("diffusion: node without self-loop");
    inv_sqrt_degree[i] = 1.0 / std::sqrt(d);
  }
  std::vector<Triplet> t;
  t.reserve(a.nnz());
  for (NodeId i = 0; i < g.n; ++i) {
    auto cols = a.row_columns(i);
    auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      t.push_back({i, cols[k], vals[k] * inv_sqrt_degree[i] * inv_sqrt_degree[cols[k]]});
  }
  return {SparseMatrix::from_triplets(g.n, g.n, std::move(t))};
}

/// Subgraph induced by `nodes`, relabelled 0..k-1 in the given order.
inline Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<std::size_t> local(g.n, SIZE_MAX);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= g.n) throw ContractViolation("induced_subgraph: node id out of range");
    local[nodes[k]] = k;
  }
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (NodeId j : g.adjacency.row_columns(nodes[k]))
      if (local[j] != SIZE_MAX && local[j] > k) pairs.emplace_back(k, local[j]);
  std::optional<DenseMatrix> feats;
  if (g.features) feats = select_rows(*g.features, nodes);
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), nodes.size(), std::move(feats));
}

namespace detail {

struct SplitCounts {
  std::size_t train, val, test;
};

// 20% and 10% rounded to nearest, remainder to train.
inline SplitCounts split_counts(std::size_t total) {
  const auto test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(total)));
  const auto val = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(total)));
  return {total - test - val, val, test};
}

}  // namespace detail

/// Holds out 10% / 20% of the undirected non-loop edges as val / test.
inline std::pair<Graph, SplitPlan> split_edges(const Graph& g, std::uint64_t seed) {
  std::vector<Edge> all = g.edges();
  if (all.size() < 10)
    throw DataError("split_edges: need at least 10 edges, graph has " + std::to_string(all.size()));
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  const auto c = detail::split_counts(all.size());
  SplitPlan plan;
  plan.task = Task::LinkPrediction;
  plan.seed = seed;
  plan.train_edges.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(c.train));
  plan.val_edges.assign(all.begin() + static_cast<std::ptrdiff_t>(c.train),
                        all.begin() + static_cast<std::ptrdiff_t>(c.train + c.val));
  plan.test_edges.assign(all.begin() + static_cast<std::ptrdiff_t>(c.train + c.val), all.end());
  for (auto* v : {&plan.train_edges, &plan.val_edges, &plan.test_edges}) std::sort(v->begin(), v->end());
  Graph train = from_edge_list(plan.train_edges, g.n, g.features);
  return {std::move(train), std::move(plan)};
}

/// Holds out 10% / 20% of the nodes; the training graph is the subgraph
/// induced by the remaining 70%, relabelled in increasing id order. A
/// featureless graph stays featureless, so its training model sees the k×k
/// identity.
inline std::pair<Graph, SplitPlan> split_nodes(const Graph& g, std::uint64_t seed) {
  if (g.n < 10) throw DataError("split_nodes: need at least 10 nodes, graph has " + std::to_string(g.n));
  std::vector<NodeId> ids(g.n);
  for (NodeId i = 0; i < g.n; ++i) ids[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto c = detail::split_counts(g.n);
  SplitPlan plan;
  plan.task = Task::NodePrediction;
  plan.seed = seed;
  plan.train_nodes.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(c.train));
  plan.val_nodes.assign(ids.begin() + static_cast<std::ptrdiff_t>(c.train),
                        ids.begin() + static_cast<std::ptrdiff_t>(c.train + c.val));
  plan.test_nodes.assign(ids.begin() + static_cast<std::ptrdiff_t>(c.train + c.val), ids.end());
  for (auto* v : {&plan.train_nodes, &plan.val_nodes, &plan.test_nodes}) std::sort(v->begin(), v->end());
  Graph train = induced_subgraph(g, plan.train_nodes);
  return {std::move(train), std::move(plan)};
}

/// Scales each nonzero column to unit l1 norm; zero columns stay zero.
inline DenseMatrix l1_normalize_columns(DenseMatrix x) {
  std::vector<double> norms(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) norms[j] += std::abs(x(i, j));
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (norms[j] > 0.0) x(i, j) /= norms[j];
  return x;
}

}  // namespace lingae
