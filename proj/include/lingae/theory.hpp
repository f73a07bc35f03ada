#pragma once

// Executable checks of the representational-power results:
//
//   * any per-node function f(A, X) equals A·W_A for W_A = A⁻¹f when A is
//     full rank, so a linear map of the adjacency reproduces it exactly;
//   * every relu GAE embedding lies in the featureless linear solution space
//     {Ã·W} whenever Ã is full rank, at no cost in training loss;
//   * features with the same span induce the same linear solution space;
//   * features are recoverable (X = ÃXW) iff image(ÃX) = image(X), and a
//     misaligned X blocks recovery of the exact factor Y of Ã = YYᵀ.
//
// "There exists W" is always checked as a least-squares residual below a
// tolerance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lingae/alignment.hpp"
#include "lingae/decompositions.hpp"
#include "lingae/errors.hpp"
#include "lingae/graph.hpp"
#include "lingae/model.hpp"
#include "lingae/synth.hpp"

namespace lingae {

struct TheoremReport {
  std::string statement;
  std::string instance;
  double residual = 0.0;
  double tolerance = 0.0;
  bool hypothesis_met = true;
  bool holds = false;
  std::optional<double> loss_linear;
  std::optional<double> loss_relu;
};

inline constexpr double kExistenceTolerance = 1e-8;

inline std::string describe_instance(std::size_t n, std::size_t g, std::uint64_t seed) {
  std::ostringstream s;
  s << "n=" << n << " g=" << g << " seed=" << seed;
  return s.str();
}

/// W_A solving A·W = probe_outputs. Throws HypothesisViolated when A is not
/// full rank at the default relative tolerance.
inline std::pair<DenseMatrix, TheoremReport> theorem1_linearize(const Graph& g, const DenseMatrix& probe_outputs,
                                                                double tol = kExistenceTolerance) {
  if (probe_outputs.rows() != g.n) throw ContractViolation("theorem1_linearize: probe rows != node count");
  const DenseMatrix a = g.adjacency.to_dense();
  const std::size_t rank = numeric_rank(a);
  if (rank < g.n)
    throw HypothesisViolated("theorem1_linearize: adjacency has rank " + std::to_string(rank) + " < n = " +
                             std::to_string(g.n));
  auto fit = least_squares(a, probe_outputs);
  TheoremReport r;
  r.statement = "theorem1";
  r.residual = max_abs(matmul(a, fit.solution) - probe_outputs);
  r.tolerance = tol;
  r.holds = r.residual < tol;
  return {std::move(fit.solution), std::move(r)};
}

/// Fits Ã·W = z_relu. Containment is certified when Ã is full rank and the
/// ∞-norm residual is below tol; the loss at the fitted embedding must then
/// not exceed the relu loss by more than tol.
inline TheoremReport prop1_containment(const SparseMatrix& adjacency, const DiffusionMatrix& diff,
                                       const Embedding& z_relu, double lambda, double tol = 1e-6) {
  const DenseMatrix a = diff.matrix.to_dense();
  if (z_relu.z.rows() != a.rows()) throw ContractViolation("prop1_containment: embedding rows != node count");
  TheoremReport r;
  r.statement = "prop1";
  r.tolerance = tol;
  r.hypothesis_met = numeric_rank(a) == a.rows();
  const auto fit = least_squares(a, z_relu.z);
  const Embedding fitted{matmul(a, fit.solution)};
  r.residual = max_abs(fitted.z - z_relu.z);
  r.loss_linear = loss(adjacency, fitted, lambda);
  r.loss_relu = loss(adjacency, z_relu, lambda);
  r.holds = r.hypothesis_met && r.residual < tol && *r.loss_linear <= *r.loss_relu + tol;
  return r;
}

/// Fitting targets in span(ÃU) and span(ÃF) leaves identical residuals when
/// span(U) = span(F). The report residual is the gap between the two.
inline TheoremReport prop2_equivalence(const DiffusionMatrix& diff, const DenseMatrix& u, const DenseMatrix& f,
                                       const DenseMatrix& targets, double tol = kExistenceTolerance) {
  if (!span_equal(u, f, tol)) throw ContractViolation("prop2_equivalence: span(U) != span(F)");
  const double ru = least_squares(spmm(diff.matrix, u), targets).residual_norm;
  const double rf = least_squares(spmm(diff.matrix, f), targets).residual_norm;
  TheoremReport r;
  r.statement = "prop2";
  r.residual = std::abs(ru - rf);
  r.tolerance = tol;
  r.holds = r.residual < tol;
  return r;
}

/// Relative residual of the best ÃX·W ≈ X. `holds` means the features are
/// recoverable.
inline TheoremReport prop3_recoverability(const DiffusionMatrix& diff, const DenseMatrix& x,
                                          double tol = kExistenceTolerance) {
  const DenseMatrix ax = spmm(diff.matrix, x);
  TheoremReport r;
  r.statement = "prop3";
  r.residual = detail::relative_projection_residual(ax, x);
  r.tolerance = tol;
  r.holds = r.residual < tol;
  return r;
}

struct Prop4Report {
  TheoremReport report;
  bool psd = false;
  std::size_t diffusion_rank = 0;
  double recovery_residual = 0.0;          // min ‖ÃXW − X‖ / ‖X‖
  std::optional<double> y_fit_residual;    // min ‖ÃXW − Y‖ / ‖Y‖, PSD only
  bool statement1_obstruction = false;     // no W with X = ÃXW
  bool statement2_obstruction = false;     // no W with Y = ÃXW
  bool factor_product_singular = false;    // rank(YᵀX) < g
  ImageConditions conditions;
};

/// Builds the real factor Y = Q·√Λ of a PSD Ã and checks that
///   1. recovery of X fails exactly when image(ÃX) != image(X);
///   2. Y = ÃXW is unsolvable exactly when YᵀX is singular, and in
///      particular whenever image(ÃX) meets image(X)^⊥ nontrivially.
/// Indefinite Ã is reported with hypothesis_met = false and statement 2
/// skipped.
inline Prop4Report prop4_obstruction(const DiffusionMatrix& diff, const DenseMatrix& x, double tol = kExistenceTolerance) {
  const DenseMatrix a = diff.matrix.to_dense();
  if (x.rows() != a.rows()) throw ContractViolation("prop4_obstruction: feature rows != node count");
  Prop4Report p;
  p.report.statement = "prop4";
  p.report.tolerance = tol;
  p.conditions = image_conditions(diff, x, tol);

  const DenseMatrix ax = spmm(diff.matrix, x);
  p.recovery_residual = detail::relative_projection_residual(ax, x);
  p.statement1_obstruction = p.recovery_residual > tol;

  const auto eig = symmetric_eigen(a);
  const double top = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  p.psd = eig.values.back() >= -1e-10 * top;
  std::vector<std::size_t> positive;
  for (std::size_t k = 0; k < eig.values.size(); ++k)
    if (eig.values[k] > 1e-10 * top) positive.push_back(k);
  p.diffusion_rank = positive.size();

  // statement 1: recovery fails iff the images differ; ÃX leaving span(X) is
  // one sufficient way for them to differ
  bool consistent = p.statement1_obstruction == !p.conditions.prop3_holds;
  if (p.conditions.prop4_obstruction) consistent = consistent && p.statement1_obstruction;
  p.report.residual = p.recovery_residual;

  if (!p.psd) {
    p.report.hypothesis_met = false;
    p.report.holds = consistent;
    return p;
  }
  DenseMatrix y(a.rows(), positive.size());
  for (std::size_t c = 0; c < positive.size(); ++c) {
    const double s = std::sqrt(eig.values[positive[c]]);
    for (std::size_t i = 0; i < a.rows(); ++i) y(i, c) = eig.vectors(i, positive[c]) * s;
  }
  p.report.hypothesis_met = p.diffusion_rank == x.cols();
  p.y_fit_residual = detail::relative_projection_residual(ax, y);
  p.statement2_obstruction = *p.y_fit_residual > tol;
  const DenseMatrix ytx = matmul_tn(y, x);
  p.factor_product_singular = ytx.rows() != ytx.cols() || numeric_rank(ytx, 1e-8) < x.cols();
  p.report.residual = *p.y_fit_residual;

  if (p.report.hypothesis_met) {
    consistent = consistent && (p.statement2_obstruction == p.factor_product_singular);
    if (p.conditions.orthogonal_overlap) consistent = consistent && p.statement2_obstruction;
  }
  p.report.holds = consistent;
  return p;
}

// ---------------------------------------------------------------------------
// Randomised instance families shared by `verify` and the test suites.

namespace instances {

inline Graph random_graph(std::size_t n, double edge_probability, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(edge_probability);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) pairs.emplace_back(i, j);
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), n);
}

inline DenseMatrix gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

/// Random graph on n nodes whose adjacency is full rank.
inline Graph full_rank_graph(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> p(0.1, 0.5);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Graph g = random_graph(n, p(rng), rng);
    if (numeric_rank(g.adjacency.to_dense()) == n) return g;
  }
  throw DataError("full_rank_graph: no full-rank sample in 1000 attempts");
}

/// Random graph on n−1 nodes plus a twin of node `twin_of` (same closed
/// neighbourhood), so A and Ã are singular with e_t − e_twin in the kernel.
inline Graph graph_with_twin(std::size_t n, std::mt19937_64& rng, NodeId* twin_of = nullptr) {
  std::uniform_real_distribution<double> p(0.2, 0.5);
  Graph base = random_graph(n - 1, p(rng), rng);
  std::uniform_int_distribution<NodeId> pick(0, n - 2);
  const NodeId t = pick(rng);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : base.edges()) pairs.emplace_back(e.u, e.v);
  for (NodeId j : base.adjacency.row_columns(t))
    if (j != t) pairs.emplace_back(j, n - 1);
  pairs.emplace_back(t, n - 1);
  if (twin_of) *twin_of = t;
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), n);
}

/// Disjoint union of `blocks` cliques with 1..max_size nodes each (at least
/// one with two or more). Its Ã is block-diagonal J/k: PSD with rank =
/// number of cliques.
inline Graph clique_union(std::size_t blocks, std::size_t max_size, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(1, max_size);
  std::vector<std::size_t> sizes(blocks);
  for (auto& s : sizes) s = size(rng);
  if (*std::max_element(sizes.begin(), sizes.end()) < 2) sizes[0] = 2;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  NodeId start = 0;
  for (std::size_t s : sizes) {
    for (NodeId i = start; i < start + s; ++i)
      for (NodeId j = i + 1; j < start + s; ++j) pairs.emplace_back(i, j);
    start += s;
  }
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), start);
}

/// Unit kernel vector of a clique-union Ã: difference of two members of the
/// first clique with at least two nodes.
inline std::vector<double> clique_kernel_vector(const Graph& g) {
  for (NodeId i = 0; i < g.n; ++i) {
    auto cols = g.adjacency.row_columns(i);
    for (NodeId j : cols)
      if (j > i) {
        std::vector<double> k(g.n, 0.0);
        k[i] = 1.0 / std::sqrt(2.0);
        k[j] = -1.0 / std::sqrt(2.0);
        return k;
      }
  }
  throw ContractViolation("clique_kernel_vector: graph has no edge");
}

/// Well-conditioned random invertible g×g matrix.
inline DenseMatrix invertible(std::size_t g, std::mt19937_64& rng) {
  for (;;) {
    DenseMatrix r = gaussian(g, g, rng);
    for (std::size_t i = 0; i < g; ++i) r(i, i) += 2.0 * (r(i, i) >= 0.0 ? 1.0 : -1.0);
    const auto s = singular_values(r);
    if (s.back() > 1e-2 * s.front()) return r;
  }
}

}  // namespace instances

// ---------------------------------------------------------------------------
// Suites. Each produces one report per instance.

struct SuiteOptions {
  std::uint64_t seed = 0;
  std::size_t instances = 10;
  std::size_t prop1_epochs = 200;
  bool rank_deficient_theorem1 = false;  // feed Theorem-1 graphs with a twin node
};

/// Nonlinear probe functions f(a_i, x_i); the kind rotates with the instance.
inline DenseMatrix theorem1_probe(const Graph& g, std::size_t kind, std::uint64_t seed, std::mt19937_64& rng) {
  const std::size_t d = 3;
  const DenseMatrix x = instances::gaussian(g.n, 4, rng);
  switch (kind % 3) {
    case 0: {
      DenseMatrix m = matmul(hstack(g.adjacency.to_dense(), x), instances::gaussian(g.n + 4, d, rng));
      for (double& v : m.data()) v = std::sin(v);
      return m;
    }
    case 1: {
      DenseMatrix m = matmul(x, instances::gaussian(4, d, rng));
      for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t c = 0; c < d; ++c)
          m(i, c) = std::tanh(m(i, c)) * std::exp(-0.1 * static_cast<double>(g.degree(i))) + m(i, c) * m(i, c);
      return m;
    }
    default: {
      Graph featured = g;
      featured.features = x;
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.embedding_dim = d;
      cfg.hidden_dim = 4;
      cfg.epochs = 50;
      return train(featured, cfg, Variant::Relu, true).embedding.z;
    }
  }
}

inline std::vector<TheoremReport> theorem1_suite(const SuiteOptions& opt) {
  std::vector<TheoremReport> out;
  for (std::size_t k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed * 1000003ULL + k;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(5, 30);
    const std::size_t n = size(rng);
    const Graph g = opt.rank_deficient_theorem1 ? instances::graph_with_twin(n, rng) : instances::full_rank_graph(n, rng);
    const DenseMatrix probe = theorem1_probe(g, k, seed, rng);
    TheoremReport report;
    try {
      report = theorem1_linearize(g, probe).second;
    } catch (const HypothesisViolated&) {
      report.statement = "theorem1";
      report.tolerance = kExistenceTolerance;
      report.residual = std::numeric_limits<double>::quiet_NaN();
      report.hypothesis_met = false;
    }
    report.instance = describe_instance(n, probe.cols(), seed) + " probe=" + std::to_string(k % 3);
    out.push_back(std::move(report));
  }
  return out;
}

/// 50-node synthetic graph whose Ã is full rank.
inline Graph prop1_graph(std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    SynthConfig sc;
    sc.n = 50;
    sc.g = 16;
    sc.density_low = 0.05;
    sc.density_high = 0.10;
    sc.seed = seed + 7919 * attempt;
    Graph g = generate(sc);
    if (numeric_rank(diffusion(g).matrix.to_dense()) == g.n) return g;
  }
  throw DataError("prop1_graph: no full-rank diffusion matrix found");
}

inline std::vector<TheoremReport> prop1_suite(const SuiteOptions& opt) {
  std::vector<TheoremReport> out;
  for (std::size_t k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed * 1000003ULL + k;
    const Graph g = prop1_graph(seed);
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.embedding_dim = 8;
    cfg.hidden_dim = 16;
    cfg.epochs = opt.prop1_epochs;
    const auto trained = train(g, cfg, Variant::Relu, true);
    auto report = prop1_containment(g.adjacency, diffusion(g), trained.embedding, cfg.embed_norm_coeff);
    report.instance = describe_instance(g.n, g.features->cols(), seed);
    out.push_back(std::move(report));
  }
  return out;
}

inline std::vector<TheoremReport> prop2_suite(const SuiteOptions& opt) {
  std::vector<TheoremReport> out;
  for (std::size_t k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed * 1000003ULL + k;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(8, 30), dim(2, 5);
    const std::size_t n = size(rng), g = dim(rng);
    const Graph graph = instances::random_graph(n, 0.3, rng);
    const DenseMatrix u = instances::gaussian(n, g, rng);
    const DenseMatrix f = matmul(u, instances::invertible(g, rng));
    const DenseMatrix targets = instances::gaussian(n, 3, rng);
    auto report = prop2_equivalence(diffusion(graph), u, f, targets);
    report.instance = describe_instance(n, g, seed);
    out.push_back(std::move(report));
  }
  return out;
}

/// Per instance: X built from eigenvectors of Ã with nonzero eigenvalues must
/// be recoverable, and on a twin graph X with a kernel component must not
/// (relative residual > 0.1). `holds` requires both.
inline std::vector<TheoremReport> prop3_suite(const SuiteOptions& opt) {
  std::vector<TheoremReport> out;
  for (std::size_t k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed * 1000003ULL + k;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(6, 25);
    const std::size_t n = size(rng);
    NodeId twin = 0;
    const Graph graph = instances::graph_with_twin(n, rng, &twin);
    const DiffusionMatrix diff = diffusion(graph);
    const auto eig = symmetric_eigen(diff.matrix.to_dense());
    std::vector<std::size_t> nonzero;
    for (std::size_t c = 0; c < n; ++c)
      if (std::abs(eig.values[c]) > 1e-6) nonzero.push_back(c);
    std::shuffle(nonzero.begin(), nonzero.end(), rng);
    const std::size_t g = std::min<std::size_t>(3, nonzero.size());
    DenseMatrix aligned(n, g);
    for (std::size_t c = 0; c < g; ++c) aligned.set_column(c, eig.vectors.column(nonzero[c]));
    auto report = prop3_recoverability(diff, aligned);

    DenseMatrix misaligned = aligned;
    for (std::size_t i = 0; i < n; ++i) misaligned(i, 0) += (i == twin ? 1.0 : 0.0) - (i == n - 1 ? 1.0 : 0.0);
    const auto blocked = prop3_recoverability(diff, misaligned);

    report.instance = describe_instance(n, g, seed) + " kernel_residual=" + std::to_string(blocked.residual);
    report.holds = report.holds && blocked.residual > 0.1;
    out.push_back(std::move(report));
  }
  return out;
}

/// Per instance a PSD clique-union graph with g = number of cliques. The
/// aligned control X = Y·R must show no obstruction; the misaligned X (one
/// kernel column plus random columns) must show both obstructions and fail
/// the image condition.
inline std::vector<TheoremReport> prop4_suite(const SuiteOptions& opt) {
  std::vector<TheoremReport> out;
  for (std::size_t k = 0; k < opt.instances; ++k) {
    const std::uint64_t seed = opt.seed * 1000003ULL + k;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> blocks(2, 5);
    const std::size_t g = blocks(rng);
    const Graph graph = instances::clique_union(g, 4, rng);
    const DiffusionMatrix diff = diffusion(graph);

    // Y from the PSD eigendecomposition; here every nonzero eigenvalue is 1.
    const auto eig = symmetric_eigen(diff.matrix.to_dense());
    DenseMatrix y(graph.n, g);
    for (std::size_t c = 0; c < g; ++c) y.set_column(c, eig.vectors.column(c));
    const DenseMatrix aligned_x = matmul(y, instances::invertible(g, rng));
    const auto aligned = prop4_obstruction(diff, aligned_x);

    DenseMatrix misaligned_x = instances::gaussian(graph.n, g, rng);
    misaligned_x.set_column(0, instances::clique_kernel_vector(graph));
    const auto misaligned = prop4_obstruction(diff, misaligned_x);

    TheoremReport r = misaligned.report;
    r.instance = describe_instance(graph.n, g, seed);
    r.hypothesis_met = aligned.report.hypothesis_met && misaligned.report.hypothesis_met;
    const bool aligned_ok = aligned.report.holds && !aligned.statement1_obstruction && !aligned.statement2_obstruction &&
                            !aligned.conditions.prop4_obstruction;
    const bool misaligned_ok = misaligned.report.holds && misaligned.statement1_obstruction &&
                               misaligned.statement2_obstruction && !misaligned.conditions.prop3_holds;
    r.holds = r.hypothesis_met && aligned_ok && misaligned_ok;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lingae
