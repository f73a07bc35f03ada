#pragma once

// How well node features agree with graph structure: the trace-of-arccos
// misalignment, the principal angles between span(ÃX) and span(X), the SVD
// feature perturbation that dials misalignment up, and the span / image
// conditions under which features can or cannot hurt a linear encoder.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "lingae/decompositions.hpp"
#include "lingae/errors.hpp"
#include "lingae/graph.hpp"
#include "lingae/matrix.hpp"

namespace lingae {

struct MisalignmentReport {
  /// tr(arccos(Ã X̃ X̃ᵀ)) with X̃ the column-l1-normalised features.
  double d_algn = 0.0;
  /// Sum of principal angles between span(ÃX) and span(X), in radians.
  double subspace_angle_sum = 0.0;
  std::optional<std::size_t> overlap_dim;
  /// Diagonal entries that fell outside [-1, 1] before arccos.
  std::size_t clamped_entries = 0;
};

/// Principal angles (ascending) between the column spaces of a and b;
/// min(rank a, rank b) of them.
inline std::vector<double> principal_angles(const DenseMatrix& a, const DenseMatrix& b,
                                            double rel_tol = kDefaultRankTolerance) {
  detail::require(a.rows() == b.rows(), "principal_angles: row counts differ");
  const DenseMatrix qa = orthonormal_basis(a, rel_tol);
  const DenseMatrix qb = orthonormal_basis(b, rel_tol);
  if (qa.cols() == 0 || qb.cols() == 0) return {};
  const auto cosines = singular_values(matmul_tn(qa, qb));
  std::vector<double> angles;
  angles.reserve(cosines.size());
  for (double c : cosines) angles.push_back(std::acos(std::clamp(c, -1.0, 1.0)));
  return angles;
}

/// Trace term only: the diagonal of ÃX̃X̃ᵀ costs O(nnz(Ã)·g).
inline double trace_arccos_misalignment(const DiffusionMatrix& diff, const DenseMatrix& x,
                                        std::size_t* clamped = nullptr) {
  detail::require(diff.matrix.rows() == x.rows(), "misalignment: feature rows != node count");
  const DenseMatrix xt = l1_normalize_columns(x);
  double total = 0.0;
  std::size_t clamp_count = 0;
  for (std::size_t i = 0; i < xt.rows(); ++i) {
    auto cols = diff.matrix.row_columns(i);
    auto vals = diff.matrix.row_values(i);
    auto xi = xt.row(i);
    double diag = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto xj = xt.row(cols[k]);
      double dot = 0.0;
      for (std::size_t c = 0; c < xi.size(); ++c) dot += xj[c] * xi[c];
      diag += vals[k] * dot;
    }
    if (diag > 1.0 || diag < -1.0) ++clamp_count;
    total += std::acos(std::clamp(diag, -1.0, 1.0));
  }
  if (clamped) *clamped = clamp_count;
  return total;
}

inline MisalignmentReport misalignment(const DiffusionMatrix& diff, const DenseMatrix& x) {
  MisalignmentReport r;
  r.d_algn = trace_arccos_misalignment(diff, x, &r.clamped_entries);
  const auto angles = principal_angles(spmm(diff.matrix, x), x);
  for (double a : angles) r.subspace_angle_sum += a;
  return r;
}

inline MisalignmentReport misalignment(const Graph& g) {
  if (g.featureless()) throw ContractViolation("misalignment: undefined for a featureless graph");
  return misalignment(diffusion(g), *g.features);
}

/// Keeps the leading `overlap` left singular directions of x and replaces the
/// remaining g − overlap with directions orthogonal to span(x). The result
/// has orthonormal columns and shares exactly `overlap` dimensions with x.
inline DenseMatrix perturb_features(const DenseMatrix& x, std::size_t overlap) {
  const std::size_t n = x.rows();
  const std::size_t g = x.cols();
  if (overlap > g) throw ContractViolation("perturb_features: overlap exceeds feature dimension");
  if (n < 2 * g - overlap) throw ContractViolation("perturb_features: need n >= 2g - overlap");
  const auto svd = thin_svd(x);
  DenseMatrix leading = column_block(svd.u, 0, overlap);
  if (overlap == g) return leading;
  return hstack(leading, orthogonal_complement(x, g - overlap));
}

namespace detail {
// ‖(I − P_target) source‖ per column, relative to the column norm.
inline std::vector<double> projection_residuals(const DenseMatrix& target, const DenseMatrix& source) {
  const auto fit = least_squares(target, source);
  const DenseMatrix r = matmul(target, fit.solution) - source;
  std::vector<double> out(source.cols());
  for (std::size_t j = 0; j < source.cols(); ++j) {
    double rn = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < source.rows(); ++i) {
      rn += r(i, j) * r(i, j);
      sn += source(i, j) * source(i, j);
    }
    out[j] = sn > 0.0 ? std::sqrt(rn / sn) : 0.0;
  }
  return out;
}

inline double relative_projection_residual(const DenseMatrix& target, const DenseMatrix& source) {
  const double norm = frobenius_norm(source);
  if (norm == 0.0) return 0.0;
  return least_squares(target, source).residual_norm / norm;
}
}  // namespace detail

/// span(u) == span(f): each projects onto the other with relative residual < tol.
inline bool span_equal(const DenseMatrix& u, const DenseMatrix& f, double tol = 1e-8) {
  detail::require(u.rows() == f.rows(), "span_equal: row counts differ");
  return detail::relative_projection_residual(u, f) < tol && detail::relative_projection_residual(f, u) < tol;
}

struct ImageConditions {
  /// image(ÃX) == image(X): features are recoverable.
  bool prop3_holds = false;
  /// Some column of ÃX leaves image(X) (relative residual > tol).
  bool prop4_obstruction = false;
  /// image(ÃX) ∩ image(X)^⊥ contains a nonzero vector.
  bool orthogonal_overlap = false;
};

inline ImageConditions image_conditions(const DiffusionMatrix& diff, const DenseMatrix& x, double tol = 1e-8) {
  detail::require(diff.matrix.cols() == x.rows(), "image_conditions: shape mismatch");
  const DenseMatrix ax = spmm(diff.matrix, x);
  ImageConditions c;
  c.prop3_holds = span_equal(ax, x, tol);
  const auto res = detail::projection_residuals(x, ax);
  c.prop4_obstruction = std::any_of(res.begin(), res.end(), [&](double r) { return r > tol; });
  const DenseMatrix q_ax = orthonormal_basis(ax);
  const DenseMatrix q_x = orthonormal_basis(x);
  if (q_ax.cols() > q_x.cols()) {
    c.orthogonal_overlap = true;
  } else if (q_ax.cols() > 0) {
    const auto s = singular_values(matmul_tn(q_x, q_ax));
    c.orthogonal_overlap = s.size() < q_ax.cols() || s.back() < tol;
  }
  return c;
}

}  // namespace lingae
