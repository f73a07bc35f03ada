#pragma once

// Dense row-major and CSR sparse matrices plus the products the rest of the
// library is built from. Every product accumulates left to right in a fixed
// order so results are reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lingae/errors.hpp"

namespace lingae {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ContractViolation("DenseMatrix: entry count does not match shape");
  }
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ContractViolation("DenseMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_column(std::size_t j, std::span<const double> values) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row storage. Column indices are strictly increasing
/// within each row.
class SparseMatrix {
 public:
  SparseMatrix() : offsets_(1, 0) {}

  /// Duplicate coordinates are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    for (const auto& t : entries)
      if (t.row >= rows || t.col >= cols)
        throw ContractViolation("SparseMatrix: triplet index out of range");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    SparseMatrix s;
    s.rows_ = rows;
    s.cols_ = cols;
    s.offsets_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& t = entries[k];
      if (!s.columns_.empty() && k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
        s.values_.back() += t.value;
        continue;
      }
      s.columns_.push_back(t.col);
      s.values_.push_back(t.value);
      ++s.offsets_[t.row + 1];
    }
    for (std::size_t i = 0; i < rows; ++i) s.offsets_[i + 1] += s.offsets_[i];
    return s;
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  /// Keeps entries with |value| > drop_below.
  static SparseMatrix from_dense(const DenseMatrix& d, double drop_below = 0.0) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j)
        if (std::abs(d(i, j)) > drop_below) t.push_back({i, j, d(i, j)});
    return from_triplets(d.rows(), d.cols(), std::move(t));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  const std::vector<std::size_t>& column_indices() const noexcept { return columns_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const std::size_t> row_columns(std::size_t i) const {
    return {columns_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  double at(std::size_t i, std::size_t j) const {
    auto cols = row_columns(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
  }
  bool contains(std::size_t i, std::size_t j) const {
    auto cols = row_columns(i);
    return std::binary_search(cols.begin(), cols.end(), j);
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) d(i, columns_[k]) = values_[k];
    return d;
  }

  SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) t.push_back({columns_[k], i, values_[k]});
    return from_triplets(cols_, rows_, std::move(t));
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> columns_;
  std::vector<double> values_;
};

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw ContractViolation(what);
}
}  // namespace detail

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

/// aᵀ·b without forming the transpose.
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.rows() == b.rows(), "matmul_tn: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < arow.size(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto out = c.row(i);
      for (std::size_t j = 0; j < brow.size(); ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

/// a·bᵀ without forming the transpose.
inline DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.cols() == b.cols(), "matmul_nt: column counts differ");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < arow.size(); ++k) s += arow[k] * brow[k];
      c(i, j) = s;
    }
  }
  return c;
}

inline DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
  detail::require(s.cols() == d.rows(), "spmm: inner dimensions differ");
  DenseMatrix c(s.rows(), d.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto out = c.row(i);
    auto cols = s.row_columns(i);
    auto vals = s.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto drow = d.row(cols[k]);
      const double v = vals[k];
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += v * drow[j];
    }
  }
  return c;
}

/// sᵀ·d without forming the transpose.
inline DenseMatrix spmm_tn(const SparseMatrix& s, const DenseMatrix& d) {
  detail::require(s.rows() == d.rows(), "spmm_tn: row counts differ");
  DenseMatrix c(s.cols(), d.cols());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto drow = d.row(i);
    auto cols = s.row_columns(i);
    auto vals = s.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto out = c.row(cols[k]);
      const double v = vals[k];
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += v * drow[j];
    }
  }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "operator+: shape mismatch");
  for (std::size_t k = 0; k < a.size(); ++k) a.data()[k] += b.data()[k];
  return a;
}

inline DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "operator-: shape mismatch");
  for (std::size_t k = 0; k < a.size(); ++k) a.data()[k] -= b.data()[k];
  return a;
}

inline DenseMatrix operator*(double s, DenseMatrix a) {
  for (double& v : a.data()) v *= s;
  return a;
}

inline double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

/// Columns [first, first + count).
inline DenseMatrix column_block(const DenseMatrix& m, std::size_t first, std::size_t count) {
  detail::require(first + count <= m.cols(), "column_block: range exceeds column count");
  DenseMatrix out(m.rows(), count);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = m(i, first + j);
  return out;
}

inline DenseMatrix hstack(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require(a.rows() == b.rows(), "hstack: row counts differ");
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.row(i).begin(), a.row(i).end(), out.row(i).begin());
    std::copy(b.row(i).begin(), b.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

inline DenseMatrix select_rows(const DenseMatrix& m, std::span<const std::size_t> rows) {
  DenseMatrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    detail::require(rows[r] < m.rows(), "select_rows: index out of range");
    std::copy(m.row(rows[r]).begin(), m.row(rows[r]).end(), out.row(r).begin());
  }
  return out;
}

}  // namespace lingae
