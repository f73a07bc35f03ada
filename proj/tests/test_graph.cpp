#include <set>

#include "test_support.hpp"

using namespace lingae;
using namespace lingae::testing;

namespace {
Graph from_pairs(std::vector<std::pair<NodeId, NodeId>> pairs, std::size_t n) {
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), n);
}

void expect_graph_invariants(const Graph& g) {
  const auto a = g.adjacency.to_dense();
  for (std::size_t i = 0; i < g.n; ++i) {
    EXPECT_EQ(a(i, i), 1.0);
    for (std::size_t j = 0; j < g.n; ++j) {
      EXPECT_EQ(a(i, j), a(j, i));
      EXPECT_TRUE(a(i, j) == 0.0 || a(i, j) == 1.0);
    }
  }
}
}  // namespace

TEST(FromEdgeList, EmptyGivesIdentity) {
  EXPECT_EQ(from_pairs({}, 3).adjacency.to_dense(), DenseMatrix::identity(3));
}

TEST(FromEdgeList, SingleEdgeAndDeduplication) {
  const DenseMatrix full{{1, 1}, {1, 1}};
  EXPECT_EQ(from_pairs({{0, 1}}, 2).adjacency.to_dense(), full);
  EXPECT_EQ(from_pairs({{0, 1}, {1, 0}, {0, 1}}, 2).adjacency.to_dense(), full);
}

TEST(FromEdgeList, Errors) {
  EXPECT_THROW(from_pairs({{0, 3}}, 3), ContractViolation);
  EXPECT_THROW(from_edge_list(std::span<const std::pair<NodeId, NodeId>>{}, 3, DenseMatrix(2, 2)), ContractViolation);
}

TEST(FromEdgeList, IdempotentUnderReingestion) {
  const auto g = random_graph(20, 0.2, 1);
  const auto again = from_edge_list(g.edges(), g.n);
  EXPECT_EQ(again.adjacency, g.adjacency);
}

TEST(IdentityFeatures, Shapes) {
  EXPECT_EQ(identity_features(from_pairs({}, 1)), DenseMatrix{{1}});
  const auto x = identity_features(from_pairs({{0, 1}}, 3));
  EXPECT_EQ(x, DenseMatrix::identity(3));
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (double v : x.row(i)) s += v;
    EXPECT_EQ(s, 1.0);
  }
}

TEST(Diffusion, HandExamples) {
  const auto two = diffusion(from_pairs({{0, 1}}, 2)).matrix.to_dense();
  EXPECT_NEAR(max_abs(two - DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}), 0.0, 1e-15);
  EXPECT_EQ(diffusion(from_pairs({}, 1)).matrix.to_dense(), DenseMatrix{{1}});
  const auto path = diffusion(from_pairs({{0, 1}, {1, 2}}, 3)).matrix;
  EXPECT_NEAR(path.at(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(path.at(1, 1), 1.0 / 3.0, 1e-15);
}

TEST(Diffusion, MatchesDenseFormulaSymmetricSpectralRadius) {
  const auto g = random_graph(25, 0.15, 2);
  const auto a = g.adjacency.to_dense();
  const auto d = diffusion(g).matrix.to_dense();
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      const double expected = a(i, j) / std::sqrt(double(g.degree(i)) * double(g.degree(j)));
      EXPECT_NEAR(d(i, j), expected, 1e-12);
      EXPECT_NEAR(d(i, j), d(j, i), 1e-12);
      if (a(i, j) != 0.0) {
        EXPECT_GT(d(i, j), 0.0);
        EXPECT_LE(d(i, j), 1.0);
      }
    }
  // power iteration on |x|: spectral radius <= 1
  DenseMatrix v(g.n, 1, 1.0);
  double rho = 0.0;
  for (int it = 0; it < 200; ++it) {
    v = matmul(d, v);
    rho = frobenius_norm(v);
    v = (1.0 / rho) * v;
  }
  EXPECT_LE(rho, 1.0 + 1e-9);
}

TEST(SplitEdges, TenEdgeArithmetic) {
  std::vector<std::pair<NodeId, NodeId>> p;
  for (NodeId i = 0; i < 10; ++i) p.emplace_back(i, i + 1);
  const auto g = from_pairs(p, 11);
  auto [train, plan] = split_edges(g, 3);
  EXPECT_EQ(plan.train_edges.size(), 7u);
  EXPECT_EQ(plan.val_edges.size(), 1u);
  EXPECT_EQ(plan.test_edges.size(), 2u);
  EXPECT_EQ(train.edge_count(), 7u);
  expect_graph_invariants(train);
}

TEST(SplitEdges, PartitionAndDeterminism) {
  const auto g = random_graph(40, 0.13, 4);
  ASSERT_GE(g.edge_count(), 90u);
  auto [train, plan] = split_edges(g, 9);
  std::set<Edge> all(plan.train_edges.begin(), plan.train_edges.end());
  for (const auto* part : {&plan.val_edges, &plan.test_edges})
    for (const auto& e : *part) EXPECT_TRUE(all.insert(e).second) << "edge in two parts";
  const auto original = g.edges();
  EXPECT_EQ(std::vector<Edge>(all.begin(), all.end()), original);
  const auto m = static_cast<double>(original.size());
  EXPECT_LE(std::abs(double(plan.test_edges.size()) - 0.2 * m), 1.0);
  EXPECT_LE(std::abs(double(plan.val_edges.size()) - 0.1 * m), 1.0);
  auto [train2, plan2] = split_edges(g, 9);
  EXPECT_EQ(plan2.test_edges, plan.test_edges);
  EXPECT_EQ(train2.adjacency, train.adjacency);
}

TEST(SplitEdges, TooFewEdges) {
  EXPECT_THROW(split_edges(from_pairs({{0, 1}}, 3), 0), DataError);
}

TEST(SplitNodes, InducedSubgraphAndFeatures) {
  auto g = random_graph(10, 0.4, 5);
  g.features = random_matrix(10, 3, 6);
  auto [train, plan] = split_nodes(g, 1);
  EXPECT_EQ(train.n, 7u);
  EXPECT_EQ(plan.val_nodes.size(), 1u);
  EXPECT_EQ(plan.test_nodes.size(), 2u);
  expect_graph_invariants(train);
  for (std::size_t a = 0; a < 7; ++a) {
    for (std::size_t b = 0; b < 7; ++b)
      EXPECT_EQ(train.adjacency.at(a, b), g.adjacency.at(plan.train_nodes[a], plan.train_nodes[b]));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ((*train.features)(a, c), (*g.features)(plan.train_nodes[a], c));
  }
}

TEST(SplitNodes, FeaturelessTrainsOnSmallIdentity) {
  const auto g = random_graph(10, 0.4, 7);
  auto [train, plan] = split_nodes(g, 1);
  EXPECT_TRUE(train.featureless());
  EXPECT_EQ(identity_features(train), DenseMatrix::identity(7));
  EXPECT_THROW(split_nodes(random_graph(9, 0.5, 1), 0), DataError);
}

TEST(L1Normalize, Examples) {
  const auto x = l1_normalize_columns(DenseMatrix{{2, 0, -1}, {2, 0, 3}});
  EXPECT_EQ(x, (DenseMatrix{{0.5, 0, -0.25}, {0.5, 0, 0.75}}));
}
