#pragma once

// Graph auto-encoders with a linear or a two-layer relu GCN encoder and a
// dot-product decoder, trained full-batch with Adam on a weighted
// cross-entropy reconstruction loss.
//
//   relu:   Z = Ã · relu(Ã X W0) · W1
//   linear: Z = Ã X W0 W1
//   loss:   mean_ij CE_w(σ(z_i·z_j), a_ij) + λ · mean_i ‖z_i‖²

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lingae/errors.hpp"
#include "lingae/graph.hpp"
#include "lingae/matrix.hpp"

namespace lingae {

enum class Variant { Linear, Relu };

inline const char* to_string(Variant v) { return v == Variant::Linear ? "linear" : "relu"; }

struct EncoderParams {
  Variant variant = Variant::Linear;
  DenseMatrix w0;  // g×h
  DenseMatrix w1;  // h×d
};

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double embed_norm_coeff = 1e-3;  // λ
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 16;
  std::size_t hidden_dim = 32;

  void validate() const {
    if (epochs < 1) throw ContractViolation("TrainConfig: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ContractViolation("TrainConfig: learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw ContractViolation("TrainConfig: betas must lie in [0,1)");
    if (!(epsilon > 0.0)) throw ContractViolation("TrainConfig: epsilon must be > 0");
    if (!(embed_norm_coeff >= 0.0)) throw ContractViolation("TrainConfig: embed_norm_coeff must be >= 0");
    if (embedding_dim < 1 || hidden_dim < 1) throw ContractViolation("TrainConfig: dimensions must be >= 1");
  }
};

/// Hidden width used when none is given: 32 for d = 16, 16 for d = 4, 2d otherwise.
inline std::size_t default_hidden_dim(std::size_t embedding_dim) {
  if (embedding_dim == 16) return 32;
  if (embedding_dim == 4) return 16;
  return 2 * embedding_dim;
}

struct Embedding {
  DenseMatrix z;  // n×d
};

/// Uniform in ±√(6/(rows+cols)).
inline DenseMatrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw ContractViolation("glorot_init: rows and cols must be >= 1");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

/// The first propagation Ã·X, computed once per graph. Featureless inputs
/// and sparse feature matrices stay in CSR form.
class PropagatedInput {
 public:
  explicit PropagatedInput(DenseMatrix dense) : value_(std::move(dense)) {}
  explicit PropagatedInput(SparseMatrix sparse) : value_(std::move(sparse)) {}

  std::size_t rows() const {
    return std::visit([](const auto& m) { return m.rows(); }, value_);
  }
  std::size_t cols() const {
    return std::visit([](const auto& m) { return m.cols(); }, value_);
  }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(value_); }

  /// (ÃX)·w
  DenseMatrix times(const DenseMatrix& w) const {
    if (const auto* s = std::get_if<SparseMatrix>(&value_)) return spmm(*s, w);
    return matmul(std::get<DenseMatrix>(value_), w);
  }
  /// (ÃX)ᵀ·g
  DenseMatrix transpose_times(const DenseMatrix& g) const {
    if (const auto* s = std::get_if<SparseMatrix>(&value_)) return spmm_tn(*s, g);
    return matmul_tn(std::get<DenseMatrix>(value_), g);
  }

 private:
  std::variant<DenseMatrix, SparseMatrix> value_;
};

/// Ã·X, stored sparse when fewer than a quarter of its entries are nonzero.
inline PropagatedInput propagate(const DiffusionMatrix& diff, const DenseMatrix& x) {
  if (diff.matrix.cols() != x.rows()) throw ContractViolation("propagate: feature rows != node count");
  DenseMatrix ax = spmm(diff.matrix, x);
  const auto nonzero = static_cast<std::size_t>(
      std::count_if(ax.data().begin(), ax.data().end(), [](double v) { return v != 0.0; }));
  if (4 * nonzero < ax.size()) return PropagatedInput(SparseMatrix::from_dense(ax));
  return PropagatedInput(std::move(ax));
}

/// Ã·I = Ã for the featureless model.
inline PropagatedInput propagate_identity(const DiffusionMatrix& diff) { return PropagatedInput(diff.matrix); }

namespace detail {

struct ForwardCache {
  DenseMatrix first;   // (ÃX)W0: pre-activation (relu) or hidden product (linear)
  DenseMatrix second;  // Ã·relu(first) for relu; unused for linear
  DenseMatrix z;
};

inline ForwardCache forward(const EncoderParams& p, const DiffusionMatrix& diff, const PropagatedInput& in) {
  if (in.cols() != p.w0.rows() || p.w0.cols() != p.w1.rows() || in.rows() != diff.matrix.rows())
    throw ContractViolation("encode: parameter shapes do not match the input");
  ForwardCache c;
  c.first = in.times(p.w0);
  if (p.variant == Variant::Linear) {
    c.z = matmul(c.first, p.w1);
    return c;
  }
  DenseMatrix hidden = c.first;
  for (double& v : hidden.data()) v = v > 0.0 ? v : 0.0;
  c.second = spmm(diff.matrix, hidden);
  c.z = matmul(c.second, p.w1);
  return c;
}

inline double softplus_with(double s, double e) { return std::max(s, 0.0) + std::log1p(e); }

}  // namespace detail

inline Embedding encode(const EncoderParams& params, const DiffusionMatrix& diff, const PropagatedInput& input) {
  return {detail::forward(params, diff, input).z};
}

inline Embedding encode(const EncoderParams& params, const DiffusionMatrix& diff, const DenseMatrix& x) {
  return encode(params, diff, propagate(diff, x));
}

/// Logits ZZᵀ; the decoder applies σ downstream.
inline DenseMatrix decode_logits(const Embedding& e) { return matmul_nt(e.z, e.z); }

struct LossAndGradient {
  double loss = 0.0;
  DenseMatrix grad_z;
};

/// Loss and ∂loss/∂Z, streaming over node pairs without materialising the
/// n×n logit matrix. Positive pairs are weighted by (n² − nnz)/nnz.
inline LossAndGradient loss_and_gradient(const SparseMatrix& adjacency, const Embedding& emb, double lambda,
                                         bool want_gradient = true) {
  const DenseMatrix& z = emb.z;
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  if (adjacency.rows() != n || adjacency.cols() != n) throw ContractViolation("loss: adjacency/embedding size mismatch");
  if (lambda < 0.0) throw ContractViolation("loss: lambda must be >= 0");
  const double total = static_cast<double>(n) * static_cast<double>(n);
  const double nnz = static_cast<double>(adjacency.nnz());
  const double pos_weight = nnz > 0.0 ? (total - nnz) / nnz : 0.0;

  LossAndGradient out;
  if (want_gradient) out.grad_z = DenseMatrix(n, d);
  double diag_sum = 0.0, upper_sum = 0.0, norm_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto zi = z.row(i);
    auto cols = adjacency.row_columns(i);
    auto vals = adjacency.row_values(i);
    std::size_t k = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), i) - cols.begin());
    double row_sum = 0.0;
    for (std::size_t j = i; j < n; ++j) {
      auto zj = z.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += zi[c] * zj[c];
      double a = 0.0;
      if (k < cols.size() && cols[k] == j) a = vals[k++];
      const double e = std::exp(-std::abs(s));
      const double sig = s >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      const double l = pos_weight * a * detail::softplus_with(-s, e) + (1.0 - a) * detail::softplus_with(s, e);
      const double g = -pos_weight * a * (1.0 - sig) + (1.0 - a) * sig;
      if (j == i) {
        diag_sum += l;
        if (want_gradient) {
          auto gi = out.grad_z.row(i);
          for (std::size_t c = 0; c < d; ++c) gi[c] += 2.0 * g * zi[c];
        }
      } else {
        row_sum += l;
        if (want_gradient) {
          auto gi = out.grad_z.row(i);
          auto gj = out.grad_z.row(j);
          for (std::size_t c = 0; c < d; ++c) {
            gi[c] += 2.0 * g * zj[c];
            gj[c] += 2.0 * g * zi[c];
          }
        }
      }
    }
    upper_sum += row_sum;
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) sq += zi[c] * zi[c];
    norm_sum += sq;
  }
  out.loss = (diag_sum + 2.0 * upper_sum) / total + lambda * norm_sum / static_cast<double>(n);
  if (want_gradient) {
    const double inv_total = 1.0 / total;
    const double norm_scale = 2.0 * lambda / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto gi = out.grad_z.row(i);
      auto zi = z.row(i);
      for (std::size_t c = 0; c < d; ++c) gi[c] = gi[c] * inv_total + norm_scale * zi[c];
    }
  }
  return out;
}

inline double loss(const SparseMatrix& adjacency, const Embedding& z, double lambda) {
  return loss_and_gradient(adjacency, z, lambda, false).loss;
}

struct Gradients {
  DenseMatrix w0;
  DenseMatrix w1;
  double loss = 0.0;
};

/// Exact gradient of loss∘encode. The relu subgradient at 0 is 0.
inline Gradients gradients(const SparseMatrix& adjacency, const DiffusionMatrix& diff, const PropagatedInput& input,
                           const EncoderParams& params, double lambda) {
  auto cache = detail::forward(params, diff, input);
  auto lg = loss_and_gradient(adjacency, Embedding{cache.z}, lambda);
  Gradients g;
  g.loss = lg.loss;
  if (params.variant == Variant::Linear) {
    g.w1 = matmul_tn(cache.first, lg.grad_z);
    DenseMatrix d_first = matmul_nt(lg.grad_z, params.w1);
    g.w0 = input.transpose_times(d_first);
    return g;
  }
  g.w1 = matmul_tn(cache.second, lg.grad_z);
  DenseMatrix d_second = matmul_nt(lg.grad_z, params.w1);
  DenseMatrix d_hidden = spmm_tn(diff.matrix, d_second);
  for (std::size_t k = 0; k < d_hidden.size(); ++k)
    if (!(cache.first.data()[k] > 0.0)) d_hidden.data()[k] = 0.0;
  g.w0 = input.transpose_times(d_hidden);
  return g;
}

inline Gradients gradients(const SparseMatrix& adjacency, const DiffusionMatrix& diff, const DenseMatrix& x,
                           const EncoderParams& params, double lambda) {
  return gradients(adjacency, diff, propagate(diff, x), params, lambda);
}

struct AdamState {
  DenseMatrix m0, v0, m1, v1;
  std::size_t step = 0;

  static AdamState zeros_like(const EncoderParams& p) {
    return {DenseMatrix(p.w0.rows(), p.w0.cols()), DenseMatrix(p.w0.rows(), p.w0.cols()),
            DenseMatrix(p.w1.rows(), p.w1.cols()), DenseMatrix(p.w1.rows(), p.w1.cols()), 0};
  }
};

namespace detail {
inline void adam_update(DenseMatrix& w, const DenseMatrix& g, DenseMatrix& m, DenseMatrix& v, const TrainConfig& cfg,
                        double bias1, double bias2) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double gk = g.data()[k];
    double& mk = m.data()[k];
    double& vk = v.data()[k];
    mk = cfg.beta1 * mk + (1.0 - cfg.beta1) * gk;
    vk = cfg.beta2 * vk + (1.0 - cfg.beta2) * gk * gk;
    const double mhat = mk / bias1;
    const double vhat = vk / bias2;
    w.data()[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}
}  // namespace detail

/// One bias-corrected Adam update of both weight matrices.
inline void adam_step(EncoderParams& params, const Gradients& grads, AdamState& state, const TrainConfig& cfg) {
  if (grads.w0.rows() != params.w0.rows() || grads.w0.cols() != params.w0.cols() ||
      grads.w1.rows() != params.w1.rows() || grads.w1.cols() != params.w1.cols())
    throw ContractViolation("adam_step: gradient shapes do not match parameters");
  ++state.step;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  detail::adam_update(params.w0, grads.w0, state.m0, state.v0, cfg, bias1, bias2);
  detail::adam_update(params.w1, grads.w1, state.m1, state.v1, cfg, bias1, bias2);
}

inline EncoderParams init_params(Variant variant, std::size_t input_dim, const TrainConfig& cfg) {
  return {variant, glorot_init(input_dim, cfg.hidden_dim, cfg.seed),
          glorot_init(cfg.hidden_dim, cfg.embedding_dim, cfg.seed ^ 0x9E3779B97F4A7C15ULL)};
}

struct TrainResult {
  EncoderParams params;
  Embedding embedding;             // on the training graph, after the last update
  std::vector<double> loss_history;  // loss before each update, one per epoch
  double final_loss = 0.0;         // loss of the returned embedding
};

/// Full-batch training on a prepared input for exactly cfg.epochs Adam steps.
inline TrainResult train(const SparseMatrix& adjacency, const DiffusionMatrix& diff, const PropagatedInput& input,
                         Variant variant, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult r;
  r.params = init_params(variant, input.cols(), cfg);
  AdamState state = AdamState::zeros_like(r.params);
  r.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Gradients g = gradients(adjacency, diff, input, r.params, cfg.embed_norm_coeff);
    if (!std::isfinite(g.loss) || !g.w0.all_finite() || !g.w1.all_finite()) throw DivergenceError(epoch);
    r.loss_history.push_back(g.loss);
    adam_step(r.params, g, state, cfg);
  }
  r.embedding = encode(r.params, diff, input);
  r.final_loss = loss(adjacency, r.embedding, cfg.embed_norm_coeff);
  if (!std::isfinite(r.final_loss) || !r.embedding.z.all_finite()) throw DivergenceError(cfg.epochs);
  return r;
}

/// Trains on g. Without features (or on a featureless graph) the encoder sees
/// the n×n identity.
inline TrainResult train(const Graph& g, const TrainConfig& cfg, Variant variant, bool use_features) {
  const DiffusionMatrix diff = diffusion(g);
  const PropagatedInput input =
      (use_features && g.features) ? propagate(diff, *g.features) : propagate_identity(diff);
  return train(g.adjacency, diff, input, variant, cfg);
}

}  // namespace lingae
