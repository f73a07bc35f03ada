#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lingae/errors.hpp"
#include "lingae/graph.hpp"
#include "lingae/model.hpp"

namespace lingae {

/// Balanced positive / negative node pairs for AUC.
struct EvalSet {
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
  std::uint64_t seed = 0;
};

using PairFilter = std::function<bool(NodeId, NodeId)>;

/// `count` distinct non-loop non-edges of g drawn uniformly without
/// replacement from the pairs accepted by `filter` (all pairs when empty).
inline std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, std::uint64_t seed,
                                          const PairFilter& filter = {}) {
  const std::size_t n = g.n;
  const std::size_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  std::size_t pool = 0;
  if (!filter) {
    pool = all_pairs - g.edge_count();
  } else {
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (filter(i, j) && !g.has_edge(i, j)) ++pool;
  }
  if (pool < count)
    throw DataError("sample_non_edges: requested " + std::to_string(count) + " negatives but only " +
                    std::to_string(pool) + " non-edges exist");
  std::mt19937_64 rng(seed);
  std::vector<Edge> out;
  out.reserve(count);
  auto eligible = [&](NodeId i, NodeId j) { return !g.has_edge(i, j) && (!filter || filter(i, j)); };
  if (2 * count > pool) {
    // Dense request: enumerate and take a uniform prefix.
    std::vector<Edge> candidates;
    candidates.reserve(pool);
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (eligible(i, j)) candidates.push_back({i, j});
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(count);
    return candidates;
  }
  std::set<Edge> seen;
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  while (out.size() < count) {
    const NodeId a = pick(rng);
    const NodeId b = pick(rng);
    if (a == b) continue;
    const Edge e = Edge::make(a, b);
    if (!eligible(e.u, e.v) || !seen.insert(e).second) continue;
    out.push_back(e);
  }
  return out;
}

inline EvalSet sample_negatives(const Graph& g, std::vector<Edge> positives, std::uint64_t seed) {
  EvalSet s;
  s.negatives = sample_non_edges(g, positives.size(), seed);
  s.positives = std::move(positives);
  s.seed = seed;
  return s;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// σ(z_i · z_j) per pair.
inline std::vector<double> score_edges(const Embedding& emb, std::span<const Edge> edges) {
  std::vector<double> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u >= emb.z.rows() || e.v >= emb.z.rows()) throw ContractViolation("score_edges: node id out of range");
    auto a = emb.z.row(e.u);
    auto b = emb.z.row(e.v);
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
    out.push_back(sigmoid(s));
  }
  return out;
}

/// Rank-sum AUC with midranks for ties: P(pos > neg) + ½·P(pos = neg).
inline double auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw ContractViolation("auc: score lists must be nonempty");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos.size() + neg.size());
  for (double s : pos) items.push_back({s, true});
  for (double s : neg) items.push_back({s, false});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].score == items[i].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (items[k].positive) rank_sum += midrank;
    i = j;
  }
  const auto np = static_cast<double>(pos.size());
  const auto nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// 1 where σ(logit) >= 0.5, i.e. logit >= 0.
inline DenseMatrix binarize(const DenseMatrix& logits) {
  DenseMatrix out(logits.rows(), logits.cols());
  for (std::size_t k = 0; k < logits.size(); ++k) out.data()[k] = logits.data()[k] >= 0.0 ? 1.0 : 0.0;
  return out;
}

struct AucPair {
  double train = 0.0;
  double test = 0.0;
};

inline double auc_of(const Embedding& emb, const EvalSet& set) {
  const auto p = score_edges(emb, set.positives);
  const auto q = score_edges(emb, set.negatives);
  return auc(p, q);
}

namespace detail {
inline constexpr std::uint64_t kTrainNegativeSalt = 0x5851F42D4C957F2DULL;
inline constexpr std::uint64_t kTestNegativeSalt = 0x14057B7EF767814FULL;
}  // namespace detail

/// Link task: train AUC on the training edges, test AUC on the held-out
/// test edges; negatives are non-edges of the full graph.
inline AucPair link_task_eval(const Graph& full, const Embedding& train_embedding, const SplitPlan& plan) {
  if (plan.task != Task::LinkPrediction) throw ContractViolation("link_task_eval: plan is not a link split");
  if (plan.test_edges.empty() || plan.train_edges.empty()) throw DataError("link_task_eval: empty edge split");
  EvalSet train_set{plan.train_edges, sample_non_edges(full, plan.train_edges.size(), plan.seed ^ detail::kTrainNegativeSalt),
                    plan.seed};
  EvalSet test_set{plan.test_edges, sample_non_edges(full, plan.test_edges.size(), plan.seed ^ detail::kTestNegativeSalt),
                   plan.seed};
  return {auc_of(train_embedding, train_set), auc_of(train_embedding, test_set)};
}

/// Node-task test pairs touch at least one test node and no validation node.
inline PairFilter node_test_filter(const SplitPlan& plan, std::size_t n) {
  std::vector<char> role(n, 't');  // t = train, h = held-out test, v = validation
  for (NodeId v : plan.test_nodes) role[v] = 'h';
  for (NodeId v : plan.val_nodes) role[v] = 'v';
  return [role = std::move(role)](NodeId a, NodeId b) {
    if (role[a] == 'v' || role[b] == 'v') return false;
    return role[a] == 'h' || role[b] == 'h';
  };
}

inline std::vector<Edge> node_test_positives(const Graph& full, const SplitPlan& plan) {
  const auto filter = node_test_filter(plan, full.n);
  std::vector<Edge> out;
  for (const auto& e : full.edges())
    if (filter(e.u, e.v)) out.push_back(e);
  return out;
}

/// Places the k×h first-layer weights of a featureless model trained on the
/// induced subgraph at their original node ids in an n×h matrix. Rows of
/// held-out nodes stay zero: the n×n identity assigns them no trained weight.
inline EncoderParams lift_featureless(const EncoderParams& trained, std::span<const NodeId> train_nodes, std::size_t n) {
  if (trained.w0.rows() != train_nodes.size())
    throw ContractViolation("lift_featureless: weight rows != training node count");
  EncoderParams lifted{trained.variant, DenseMatrix(n, trained.w0.cols()), trained.w1};
  for (std::size_t k = 0; k < train_nodes.size(); ++k)
    std::copy(trained.w0.row(k).begin(), trained.w0.row(k).end(), lifted.w0.row(train_nodes[k]).begin());
  return lifted;
}

/// Which pairs the node task scores at test time.
enum class NodeScoring {
  Incident,  // pairs touching a held-out test node and no validation node
  AllPairs,  // every edge of the full graph against any non-edge
};

/// Node task: the trained weights encode the full graph and are scored on
/// the pairs selected by `scoring`. Train AUC uses the induced training
/// subgraph and its own embedding.
inline AucPair node_task_eval(const Graph& full, const TrainResult& trained, const SplitPlan& plan, bool use_features,
                              NodeScoring scoring = NodeScoring::Incident) {
  if (plan.task != Task::NodePrediction) throw ContractViolation("node_task_eval: plan is not a node split");
  auto positives = scoring == NodeScoring::Incident ? node_test_positives(full, plan) : full.edges();
  if (positives.empty()) throw DataError("node_task_eval: no edges incident to held-out nodes");

  const Graph train_graph = induced_subgraph(full, plan.train_nodes);
  const auto train_pos = train_graph.edges();
  if (train_pos.empty()) throw DataError("node_task_eval: training subgraph has no edges");
  EvalSet train_set{train_pos, sample_non_edges(train_graph, train_pos.size(), plan.seed ^ detail::kTrainNegativeSalt),
                    plan.seed};

  const DiffusionMatrix diff = diffusion(full);
  Embedding full_embedding;
  if (use_features && full.features) {
    full_embedding = encode(trained.params, diff, propagate(diff, *full.features));
  } else {
    full_embedding = encode(lift_featureless(trained.params, plan.train_nodes, full.n), diff, propagate_identity(diff));
  }
  const PairFilter filter = scoring == NodeScoring::Incident ? node_test_filter(plan, full.n) : PairFilter{};
  auto negatives = sample_non_edges(full, positives.size(), plan.seed ^ detail::kTestNegativeSalt, filter);
  EvalSet test_set{std::move(positives), std::move(negatives), plan.seed};
  return {auc_of(trained.embedding, train_set), auc_of(full_embedding, test_set)};
}

}  // namespace lingae
