#pragma once

// Householder QR, one-sided Jacobi SVD, cyclic Jacobi symmetric
// eigendecomposition and the least-squares / rank helpers built on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "lingae/errors.hpp"
#include "lingae/matrix.hpp"

namespace lingae {

inline constexpr double kDefaultRankTolerance = 1e-10;

/// Householder QR of an m×n matrix with m >= n. Q is kept implicitly as a
/// sequence of reflectors so the full m×m orthogonal factor never has to be
/// formed.
class HouseholderQR {
 public:
  explicit HouseholderQR(const DenseMatrix& a) : m_(a.rows()), n_(a.cols()), work_(a) {
    detail::require(m_ >= n_, "HouseholderQR: needs rows >= cols");
    reflectors_.reserve(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      std::vector<double> v(m_ - k);
      double norm = 0.0;
      for (std::size_t i = k; i < m_; ++i) {
        v[i - k] = work_(i, k);
        norm += v[i - k] * v[i - k];
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) {
        reflectors_.push_back({});
        continue;
      }
      const double alpha = v[0] >= 0.0 ? -norm : norm;
      v[0] -= alpha;
      double vnorm = 0.0;
      for (double x : v) vnorm += x * x;
      vnorm = std::sqrt(vnorm);
      if (vnorm == 0.0) {
        reflectors_.push_back({});
        continue;
      }
      for (double& x : v) x /= vnorm;
      for (std::size_t j = k; j < n_; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < m_; ++i) dot += v[i - k] * work_(i, j);
        for (std::size_t i = k; i < m_; ++i) work_(i, j) -= 2.0 * dot * v[i - k];
      }
      reflectors_.push_back(std::move(v));
    }
  }

  /// Upper-triangular n×n factor.
  DenseMatrix r() const {
    DenseMatrix out(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) out(i, j) = work_(i, j);
    return out;
  }

  /// Q·[b; 0] for a block b with at most m rows (zero-padded to m).
  DenseMatrix apply_q(const DenseMatrix& b) const {
    detail::require(b.rows() <= m_, "HouseholderQR::apply_q: too many rows");
    DenseMatrix out(m_, b.cols());
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = b(i, j);
    for (std::size_t kk = n_; kk-- > 0;) {
      const auto& v = reflectors_[kk];
      if (v.empty()) continue;
      for (std::size_t j = 0; j < out.cols(); ++j) {
        double dot = 0.0;
        for (std::size_t i = kk; i < m_; ++i) dot += v[i - kk] * out(i, j);
        for (std::size_t i = kk; i < m_; ++i) out(i, j) -= 2.0 * dot * v[i - kk];
      }
    }
    return out;
  }

  /// Columns first..first+count-1 of the full m×m orthogonal factor.
  DenseMatrix q_columns(std::size_t first, std::size_t count) const {
    detail::require(first + count <= m_, "HouseholderQR::q_columns: range exceeds m");
    DenseMatrix unit(m_, count);
    for (std::size_t j = 0; j < count; ++j) unit(first + j, j) = 1.0;
    return apply_q(unit);
  }

 private:
  std::size_t m_;
  std::size_t n_;
  DenseMatrix work_;
  std::vector<std::vector<double>> reflectors_;
};

struct SvdResult {
  DenseMatrix u;                 // m×k, orthonormal columns
  std::vector<double> singular;  // k values, nonincreasing
  DenseMatrix v;                 // n×k, orthonormal columns
};

namespace detail {

inline constexpr std::size_t kMaxJacobiSweeps = 80;

// Replaces the columns of q (m×k) not flagged in `valid` with unit vectors
// orthogonal to every other column. Candidates come from the standard basis;
// the one with the largest residual after projection is taken each time.
inline void complete_orthonormal(DenseMatrix& q, const std::vector<bool>& valid) {
  const std::size_t m = q.rows();
  std::vector<bool> done = valid;
  auto residual = [&](std::size_t candidate) {
    std::vector<double> e(m, 0.0);
    e[candidate] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < q.cols(); ++c) {
        if (!done[c]) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += q(i, c) * e[i];
        for (std::size_t i = 0; i < m; ++i) e[i] -= dot * q(i, c);
      }
    }
    return e;
  };
  for (std::size_t j = 0; j < q.cols(); ++j) {
    if (done[j]) continue;
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t candidate = 0; candidate < m; ++candidate) {
      auto e = residual(candidate);
      double norm = 0.0;
      for (double x : e) norm += x * x;
      if (norm > best_norm) {
        best_norm = norm;
        best = std::move(e);
      }
      if (best_norm > 0.5) break;
    }
    best_norm = std::sqrt(best_norm);
    for (std::size_t i = 0; i < m; ++i) q(i, j) = best[i] / best_norm;
    done[j] = true;
  }
}

// One-sided Jacobi on a matrix with rows >= cols.
inline SvdResult jacobi_svd_tall(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  // column-major working copy
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cols[j][i] = a(i, j);
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  const double tol = 1e-15 * std::max<double>(1.0, std::sqrt(static_cast<double>(m)));
  double total = 0.0;
  for (const auto& c : cols)
    for (double x : c) total += x * x;
  // columns this small are numerically zero; rotating them only chases noise
  const double negligible = 1e-30 * total;
  bool converged = n < 2;
  std::size_t sweep = 0;
  for (; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& cp = cols[p];
        auto& cq = cols[q];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += cp[i] * cp[i];
          beta += cq[i] * cq[i];
          gamma += cp[i] * cq[i];
        }
        if (alpha <= negligible || beta <= negligible) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cp[i], y = cq[i];
          cp[i] = c * x - s * y;
          cq[i] = s * x + c * y;
        }
        auto& vp = v[p];
        auto& vq = v[q];
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
  }
  if (!converged) throw ConvergenceError("thin_svd: one-sided Jacobi did not converge", sweep);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (double x : cols[j]) s += x * x;
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
  const double smax = n ? sigma[order[0]] : 0.0;
  const double cutoff = smax * static_cast<double>(std::max(m, n)) * 1e-14;
  std::vector<bool> valid(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular[k] = sigma[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v[j][i];
    if (sigma[j] > cutoff && sigma[j] > 0.0) {
      valid[k] = true;
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = cols[j][i] / sigma[j];
    }
  }
  complete_orthonormal(out.u, valid);
  return out;
}

}  // namespace detail

/// Thin SVD m = U·diag(s)·Vᵀ with k = min(rows, cols) singular triplets.
inline SvdResult thin_svd(const DenseMatrix& m) {
  detail::require(!m.empty(), "thin_svd: empty matrix");
  if (m.rows() < m.cols()) {
    SvdResult t = thin_svd(transpose(m));
    return {std::move(t.v), std::move(t.singular), std::move(t.u)};
  }
  // Tall inputs are reduced to their triangular factor first; Jacobi then
  // only sweeps an n×n problem.
  if (m.rows() > 2 * m.cols()) {
    HouseholderQR qr(m);
    SvdResult inner = detail::jacobi_svd_tall(qr.r());
    return {qr.apply_q(inner.u), std::move(inner.singular), std::move(inner.v)};
  }
  return detail::jacobi_svd_tall(m);
}

inline std::vector<double> singular_values(const DenseMatrix& m) { return thin_svd(m).singular; }

/// Number of singular values above rel_tol × the largest one.
inline std::size_t numeric_rank(const DenseMatrix& m, double rel_tol = kDefaultRankTolerance) {
  detail::require(rel_tol > 0.0 && rel_tol < 1.0, "numeric_rank: rel_tol must lie in (0,1)");
  if (m.empty()) return 0;
  const auto s = singular_values(m);
  if (s.empty() || s.front() == 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [&](double x) { return x > rel_tol * s.front(); }));
}

/// Orthonormal basis of the column space, at numeric rank rel_tol.
inline DenseMatrix orthonormal_basis(const DenseMatrix& m, double rel_tol = kDefaultRankTolerance) {
  if (m.empty()) return DenseMatrix(m.rows(), 0);
  const auto svd = thin_svd(m);
  std::size_t r = 0;
  if (!svd.singular.empty() && svd.singular.front() > 0.0)
    while (r < svd.singular.size() && svd.singular[r] > rel_tol * svd.singular.front()) ++r;
  return column_block(svd.u, 0, r);
}

/// `count` orthonormal vectors orthogonal to the column space of m, taken
/// from the trailing columns of the full Householder Q.
inline DenseMatrix orthogonal_complement(const DenseMatrix& m, std::size_t count) {
  detail::require(m.rows() >= m.cols() + count, "orthogonal_complement: not enough rows");
  HouseholderQR qr(m);
  return qr.q_columns(m.rows() - count, count);
}

struct LeastSquaresResult {
  DenseMatrix solution;
  double residual_norm;  // ‖a·solution − b‖_F
};

/// Minimum-norm argmin‖a·W − b‖_F through the SVD pseudo-inverse.
inline LeastSquaresResult least_squares(const DenseMatrix& a, const DenseMatrix& b,
                                        double rel_tol = kDefaultRankTolerance) {
  detail::require(a.rows() == b.rows(), "least_squares: row counts differ");
  if (a.empty()) return {DenseMatrix(a.cols(), b.cols()), frobenius_norm(b)};
  const auto svd = thin_svd(a);
  DenseMatrix utb = matmul_tn(svd.u, b);  // k×p
  const double smax = svd.singular.empty() ? 0.0 : svd.singular.front();
  for (std::size_t k = 0; k < utb.rows(); ++k) {
    const double s = svd.singular[k];
    const double inv = (smax > 0.0 && s > rel_tol * smax) ? 1.0 / s : 0.0;
    for (double& x : utb.row(k)) x *= inv;
  }
  DenseMatrix w = matmul(svd.v, utb);
  const double res = frobenius_norm(matmul(a, w) - b);
  return {std::move(w), res};
}

struct EigenResult {
  std::vector<double> values;  // nonincreasing
  DenseMatrix vectors;         // columns are unit eigenvectors
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline EigenResult symmetric_eigen(const DenseMatrix& m) {
  detail::require(m.rows() == m.cols(), "symmetric_eigen: matrix must be square");
  const std::size_t n = m.rows();
  DenseMatrix a = m;
  DenseMatrix v = DenseMatrix::identity(n);
  double scale = 0.0;
  for (double x : a.data()) scale += x * x;
  scale = std::sqrt(scale);
  std::size_t sweep = 0;
  bool converged = n < 2 || scale == 0.0;
  for (; sweep < detail::kMaxJacobiSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) throw ConvergenceError("symmetric_eigen: Jacobi did not converge", sweep);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigenResult out{std::vector<double>(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace lingae
