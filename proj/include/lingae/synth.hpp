#pragma once

// Synthetic graphs with maximally aligned features: Gaussian points on the
// unit sphere, connected wherever their inner product exceeds a threshold
// chosen to hit a target edge density.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "lingae/errors.hpp"
#include "lingae/graph.hpp"
#include "lingae/matrix.hpp"

namespace lingae {

struct SynthConfig {
  std::size_t n = 1000;
  std::size_t g = 64;
  double density_low = 0.01;
  double density_high = 0.02;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(density_low > 0.0 && density_low < density_high && density_high < 1.0))
      throw ContractViolation("SynthConfig: need 0 < density_low < density_high < 1");
    if (!(n > g) || g == 0) throw ContractViolation("SynthConfig: need n > g >= 1");
  }
};

/// Threshold τ such that the off-diagonal density of 1[gram > τ] lies in
/// [low, high]. Searches the sorted off-diagonal values, so the result is an
/// exact quantile rather than an iterative guess.
inline double threshold_for_density(const DenseMatrix& gram, double low, double high) {
  if (!(low < high)) throw ContractViolation("threshold_for_density: need low < high");
  if (gram.rows() != gram.cols() || gram.rows() < 2)
    throw ContractViolation("threshold_for_density: need a square matrix with n >= 2");
  const std::size_t n = gram.rows();
  std::vector<double> off;
  off.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) off.push_back(gram(i, j));
  std::sort(off.begin(), off.end(), std::greater<>());
  const auto pairs = static_cast<double>(off.size());
  // Keeping the top k values gives density k / pairs; k must fall on a value
  // boundary so ties do not straddle the threshold.
  const auto k_low = static_cast<std::size_t>(std::ceil(low * pairs));
  const auto k_high = static_cast<std::size_t>(std::floor(high * pairs));
  const auto k_mid = std::clamp(static_cast<std::size_t>(std::llround(0.5 * (low + high) * pairs)), k_low, k_high);
  auto boundary = [&](std::size_t k) { return k == off.size() || (k > 0 && off[k - 1] > off[k]); };
  auto tau_for = [&](std::size_t k) {
    if (k == off.size()) return off.back() - 1.0;
    return 0.5 * (off[k - 1] + off[k]);
  };
  for (std::size_t step = 0; k_low <= k_high && step <= k_high - k_low; ++step) {
    for (std::size_t k : {k_mid + step, k_mid - std::min(step, k_mid)}) {
      if (k < k_low || k > k_high || k == 0) continue;
      if (boundary(k)) return tau_for(k);
    }
  }
  throw DataError("threshold_for_density: no threshold yields a density in [" + std::to_string(low) + ", " +
                  std::to_string(high) + "]");
}

/// Off-diagonal density of the adjacency (self-loops excluded).
inline double off_diagonal_density(const Graph& g) {
  if (g.n < 2) return 0.0;
  return static_cast<double>(2 * g.edge_count()) / (static_cast<double>(g.n) * static_cast<double>(g.n - 1));
}

inline Graph generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix x(cfg.n, cfg.g);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    auto r = x.row(i);
    double norm = 0.0;
    for (double& v : r) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : r) v /= norm;
  }
  const DenseMatrix gram = matmul_nt(x, x);
  const double tau = threshold_for_density(gram, cfg.density_low, cfg.density_high);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < cfg.n; ++i)
    for (std::size_t j = i + 1; j < cfg.n; ++j)
      if (gram(i, j) > tau) pairs.emplace_back(i, j);
  return from_edge_list(std::span<const std::pair<NodeId, NodeId>>(pairs), cfg.n, std::move(x));
}

}  // namespace lingae
