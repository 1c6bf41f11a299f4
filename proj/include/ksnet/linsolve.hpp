#pragma once

// System-matrix composition, M-matrix structure checks, and a sparse direct
// solver (minimum-degree ordering, LU without pivoting).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ksnet/errors.hpp"
#include "ksnet/sparse.hpp"

namespace ksnet {

/// A summand `sign * matrix` of a composed system matrix.
struct Term {
  double sign;
  const SparseMatrix& matrix;
};

/// S = (1/tau) * mass + sum_k sign_k * part_k on the union of the patterns.
inline SparseMatrix compose(const DiagonalMatrix& mass, double tau, std::span<const Term> parts) {
  if (!(tau > 0.0)) throw ValidationError("time step must be positive");
  const std::size_t n = mass.size();
  std::vector<SparseMatrix::Triplet> t;
  std::size_t nnz = n;
  for (const Term& p : parts) {
    if (p.matrix.size() != n) throw DimensionMismatch("system matrix parts have different sizes");
    nnz += p.matrix.nonzeros();
  }
  t.reserve(nnz);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, mass[i] / tau});
  for (const Term& p : parts)
    p.matrix.for_each([&](std::size_t i, std::size_t j, double v) { t.push_back({i, j, p.sign * v}); });
  return SparseMatrix::from_triplets(n, std::move(t));
}

inline SparseMatrix compose(const DiagonalMatrix& mass, double tau, std::initializer_list<Term> parts) {
  return compose(mass, tau, std::span<const Term>(parts.begin(), parts.size()));
}

struct MMatrixReport {
  bool is_m_matrix = false;
  double min_diagonal = 0.0;
  double max_off_diagonal = 0.0;
  /// Smallest column sum; positive means strict column diagonal dominance
  /// given the sign pattern.
  double min_column_sum = 0.0;
};

/// Sufficient M-matrix test: positive diagonal, nonpositive off-diagonal and
/// strictly positive column sums.
inline MMatrixReport check_m_matrix(const SparseMatrix& s) {
  MMatrixReport r;
  const std::size_t n = s.size();
  std::vector<double> diag(n, 0.0);
  std::vector<double> colsum(n, 0.0);
  r.max_off_diagonal = -std::numeric_limits<double>::infinity();
  s.for_each([&](std::size_t i, std::size_t j, double v) {
    colsum[j] += v;
    if (i == j) diag[i] = v;
    else r.max_off_diagonal = std::max(r.max_off_diagonal, v);
  });
  if (n == 0) return r;
  r.min_diagonal = *std::min_element(diag.begin(), diag.end());
  r.min_column_sum = *std::min_element(colsum.begin(), colsum.end());
  if (r.max_off_diagonal == -std::numeric_limits<double>::infinity()) r.max_off_diagonal = 0.0;
  r.is_m_matrix = r.min_diagonal > 0.0 && r.max_off_diagonal <= 0.0 && r.min_column_sum > 0.0;
  return r;
}

/// Sparse LU factorization P A P^T = L U with a symmetric minimum-degree
/// permutation and diagonal pivots. Intended for the diagonally dominant
/// system matrices of the scheme; a pivot below 1e-14 * max|a_ij| raises
/// SingularMatrix.
///
/// The symbolic phase is cached: factorizing a matrix with the same pattern
/// again only repeats the numeric phase.
class SparseLU {
 public:
  static constexpr double kPivotTolerance = 1e-14;

  SparseLU() = default;
  explicit SparseLU(const SparseMatrix& a) { factorize(a); }

  void factorize(const SparseMatrix& a) {
    if (!same_pattern(a)) analyze(a);
    numeric(a);
  }

  std::size_t size() const noexcept { return n_; }

  /// Elimination order: position k eliminates original index order()[k].
  const std::vector<std::size_t>& order() const noexcept { return perm_; }

  /// Number of stored entries in L and U together (including the diagonal).
  std::size_t factor_nonzeros() const noexcept { return l_vals_.size() + u_vals_.size() + diag_.size(); }

  std::vector<double> solve(std::span<const double> b) const {
    if (b.size() != n_) throw DimensionMismatch("right-hand side has wrong length");
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n_; ++i) {
      double s = y[i];
      for (std::size_t k = l_off_[i]; k < l_off_[i + 1]; ++k) s -= l_vals_[k] * y[l_cols_[k]];
      y[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = u_off_[i]; k < u_off_[i + 1]; ++k) s -= u_vals_[k] * y[u_cols_[k]];
      y[i] = s / diag_[i];
    }
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
    return x;
  }

 private:
  bool same_pattern(const SparseMatrix& a) const {
    if (a.size() != n_ || a.nonzeros() != pattern_cols_.size() || pattern_off_.size() != n_ + 1) return false;
    for (std::size_t i = 0, k = 0; i < n_; ++i) {
      auto cols = a.row_cols(i);
      if (pattern_off_[i + 1] - pattern_off_[i] != cols.size()) return false;
      for (std::size_t c : cols)
        if (pattern_cols_[k++] != c) return false;
    }
    return true;
  }

  void analyze(const SparseMatrix& a) {
    n_ = a.size();
    pattern_off_.assign(1, 0);
    pattern_cols_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t c : a.row_cols(i)) pattern_cols_.push_back(c);
      pattern_off_.push_back(pattern_cols_.size());
    }

    // symmetrized adjacency without the diagonal
    std::vector<std::set<std::size_t>> adj(n_);
    a.for_each([&](std::size_t i, std::size_t j, double) {
      if (i != j) {
        adj[i].insert(j);
        adj[j].insert(i);
      }
    });

    std::set<std::pair<std::size_t, std::size_t>> queue;
    for (std::size_t i = 0; i < n_; ++i) queue.insert({adj[i].size(), i});

    perm_.clear();
    perm_.reserve(n_);
    std::vector<std::vector<std::size_t>> higher(n_);  // neighbours at elimination, original indices
    while (!queue.empty()) {
      const std::size_t v = queue.begin()->second;
      queue.erase(queue.begin());
      perm_.push_back(v);
      std::vector<std::size_t> nbrs(adj[v].begin(), adj[v].end());
      for (std::size_t w : nbrs) {
        queue.erase({adj[w].size(), w});
        adj[w].erase(v);
      }
      for (std::size_t p = 0; p < nbrs.size(); ++p)
        for (std::size_t q = p + 1; q < nbrs.size(); ++q) {
          adj[nbrs[p]].insert(nbrs[q]);
          adj[nbrs[q]].insert(nbrs[p]);
        }
      for (std::size_t w : nbrs) queue.insert({adj[w].size(), w});
      higher[v] = std::move(nbrs);
      adj[v].clear();
    }

    inv_.assign(n_, 0);
    for (std::size_t k = 0; k < n_; ++k) inv_[perm_[k]] = k;

    // U rows hold the (permuted) higher neighbours, L rows the transposed structure.
    u_off_.assign(1, 0);
    u_cols_.clear();
    std::vector<std::vector<std::size_t>> l_rows(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      std::vector<std::size_t> row;
      row.reserve(higher[perm_[k]].size());
      for (std::size_t w : higher[perm_[k]]) row.push_back(inv_[w]);
      std::sort(row.begin(), row.end());
      for (std::size_t j : row) {
        u_cols_.push_back(j);
        l_rows[j].push_back(k);
      }
      u_off_.push_back(u_cols_.size());
    }
    l_off_.assign(1, 0);
    l_cols_.clear();
    for (std::size_t i = 0; i < n_; ++i) {
      l_cols_.insert(l_cols_.end(), l_rows[i].begin(), l_rows[i].end());
      l_off_.push_back(l_cols_.size());
    }
    l_vals_.assign(l_cols_.size(), 0.0);
    u_vals_.assign(u_cols_.size(), 0.0);
    diag_.assign(n_, 0.0);
    work_.assign(n_, 0.0);
  }

  void numeric(const SparseMatrix& a) {
    const double tol = kPivotTolerance * a.max_abs();
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t row = perm_[i];
      auto cols = a.row_cols(row);
      auto vals = a.row_values(row);
      for (std::size_t k = 0; k < cols.size(); ++k) work_[inv_[cols[k]]] += vals[k];

      for (std::size_t p = l_off_[i]; p < l_off_[i + 1]; ++p) {
        const std::size_t k = l_cols_[p];
        const double l = work_[k] / diag_[k];
        work_[k] = 0.0;
        l_vals_[p] = l;
        if (l == 0.0) continue;
        for (std::size_t q = u_off_[k]; q < u_off_[k + 1]; ++q) work_[u_cols_[q]] -= l * u_vals_[q];
      }

      const double pivot = work_[i];
      work_[i] = 0.0;
      if (!(std::abs(pivot) > tol))
        throw SingularMatrix("zero pivot while factorizing row " + std::to_string(row));
      diag_[i] = pivot;
      for (std::size_t q = u_off_[i]; q < u_off_[i + 1]; ++q) {
        u_vals_[q] = work_[u_cols_[q]];
        work_[u_cols_[q]] = 0.0;
      }
    }
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> pattern_off_;
  std::vector<std::size_t> pattern_cols_;
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> inv_;
  std::vector<std::size_t> l_off_, l_cols_;
  std::vector<double> l_vals_;
  std::vector<std::size_t> u_off_, u_cols_;
  std::vector<double> u_vals_;
  std::vector<double> diag_;
  std::vector<double> work_;
};

inline SparseLU factorize(const SparseMatrix& a) { return SparseLU(a); }

inline std::vector<double> solve(const SparseLU& lu, std::span<const double> b) { return lu.solve(b); }

}  // namespace ksnet
