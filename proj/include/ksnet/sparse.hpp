#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include "ksnet/errors.hpp"

namespace ksnet {

using DenseMatrix = std::vector<std::vector<double>>;

class DiagonalMatrix {
 public:
  DiagonalMatrix() = default;
  explicit DiagonalMatrix(std::vector<double> diag) : diag_(std::move(diag)) {}
  explicit DiagonalMatrix(std::size_t n, double value = 0.0) : diag_(n, value) {}

  std::size_t size() const noexcept { return diag_.size(); }
  double operator[](std::size_t i) const { return diag_[i]; }
  double& operator[](std::size_t i) { return diag_[i]; }
  const std::vector<double>& entries() const noexcept { return diag_; }

  std::vector<double> multiply(std::span<const double> x) const {
    if (x.size() != size()) throw DimensionMismatch("diagonal matrix times vector");
    std::vector<double> y(size());
    for (std::size_t i = 0; i < size(); ++i) y[i] = diag_[i] * x[i];
    return y;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(size(), std::vector<double>(size(), 0.0));
    for (std::size_t i = 0; i < size(); ++i) d[i][i] = diag_[i];
    return d;
  }

 private:
  std::vector<double> diag_;
};

/// Square matrix in compressed sparse row layout with sorted, unique column
/// indices in every row.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() : offsets_(1, 0) {}

  /// Sums duplicate (row, col) entries. Explicit zeros are kept so that the
  /// sparsity pattern only depends on the element connectivity.
  static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    SparseMatrix m;
    m.n_ = n;
    m.offsets_.assign(n + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
      const Triplet& t = triplets[k];
      if (t.row >= n || t.col >= n) throw DimensionMismatch("triplet index out of range");
      double sum = 0.0;
      std::size_t j = k;
      for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j)
        sum += triplets[j].value;
      m.cols_.push_back(t.col);
      m.values_.push_back(sum);
      ++m.offsets_[t.row + 1];
      k = j;
    }
    for (std::size_t i = 0; i < n; ++i) m.offsets_[i + 1] += m.offsets_[i];
    return m;
  }

  static SparseMatrix from_diagonal(const DiagonalMatrix& d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return from_triplets(d.size(), std::move(t));
  }

  static SparseMatrix from_dense(const DenseMatrix& a) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].size() != a.size()) throw DimensionMismatch("dense matrix is not square");
      for (std::size_t j = 0; j < a.size(); ++j)
        if (a[i][j] != 0.0) t.push_back({i, j, a[i][j]});
    }
    return from_triplets(a.size(), std::move(t));
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  double at(std::size_t i, std::size_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  std::vector<double> multiply(std::span<const double> x) const {
    if (x.size() != n_) throw DimensionMismatch("sparse matrix times vector");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
      y[i] = s;
    }
    return y;
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s[i] += values_[k];
    return s;
  }

  std::vector<double> column_sums() const {
    std::vector<double> s(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s[cols_[k]] += values_[k];
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v < 0 ? -v : v);
    return m;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) d[i][cols_[k]] = values_[k];
    return d;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) f(i, cols_[k], values_[k]);
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

}  // namespace ksnet
