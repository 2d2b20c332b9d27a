// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_SPARSE_HPP
#define HODGETREE_SPARSE_HPP

#include <algorithm>
#include <ostream>
#include <span>
#include <vector>

#include "hodgetree/common.hpp"

namespace hodgetree {

/// Strictly ascending set of DOF indices with a complement against a
/// stated universe. Carries the bar/ring index sets of the tree
/// decomposition and all submatrix extractions.
class IndexSet {
public:
  IndexSet() = default;

  explicit IndexSet(std::vector<int> sorted_unique) : idx_(std::move(sorted_unique)) {
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (idx_[i] < 0) throw InvalidArgument("IndexSet: negative index");
      if (i > 0 && idx_[i] <= idx_[i - 1])
        throw InvalidArgument("IndexSet: indices must be strictly ascending");
    }
  }

  static IndexSet full(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return IndexSet(std::move(v));
  }

  static IndexSet from_unsorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return IndexSet(std::move(v));
  }

  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }
  int operator[](int i) const { return idx_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& indices() const { return idx_; }

  bool contains(int v) const {
    return std::binary_search(idx_.begin(), idx_.end(), v);
  }

  /// Position of a global index inside the set, -1 if absent.
  int position(int v) const {
    auto it = std::lower_bound(idx_.begin(), idx_.end(), v);
    if (it == idx_.end() || *it != v) return -1;
    return static_cast<int>(it - idx_.begin());
  }

  IndexSet complement(int universe) const {
    if (!idx_.empty() && idx_.back() >= universe)
      throw InvalidArgument("IndexSet::complement: index beyond universe");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(universe) - idx_.size());
    std::size_t p = 0;
    for (int i = 0; i < universe; ++i) {
      if (p < idx_.size() && idx_[p] == i) {
        ++p;
      } else {
        out.push_back(i);
      }
    }
    return IndexSet(std::move(out));
  }

  /// Gather v at the set's indices.
  Vector gather(const Vector& v) const {
    Vector out(idx_.size());
    for (std::size_t i = 0; i < idx_.size(); ++i)
      out[i] = v[static_cast<std::size_t>(idx_[i])];
    return out;
  }

  /// Scatter the packed values into a zero vector of the given length.
  Vector scatter(const Vector& packed, int universe) const {
    if (packed.size() != idx_.size())
      throw InvalidArgument("IndexSet::scatter: size mismatch");
    Vector out(static_cast<std::size_t>(universe), 0.0);
    for (std::size_t i = 0; i < idx_.size(); ++i)
      out[static_cast<std::size_t>(idx_[i])] = packed[i];
    return out;
  }

private:
  std::vector<int> idx_;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row sparse matrix, immutable after construction. Column
/// indices are strictly ascending within each row and exact zeros are
/// dropped at finalization.
class SparseMatrix {
public:
  SparseMatrix() : rows_(0), cols_(0), offsets_{0} {}

  SparseMatrix(int rows, int cols, std::vector<Triplet> triplets)
      : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw InvalidArgument("SparseMatrix: negative shape");
    for (const Triplet& t : triplets) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw InvalidArgument("SparseMatrix: triplet out of bounds");
    }
    // stable: duplicate entries accumulate in insertion order, which keeps
    // symmetrically emitted pairs bitwise equal
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) {
                       return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });
    offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
    columns_.reserve(triplets.size());
    values_.reserve(triplets.size());
    std::size_t i = 0;
    for (int r = 0; r < rows; ++r) {
      while (i < triplets.size() && triplets[i].row == r) {
        int c = triplets[i].col;
        double v = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
          v += triplets[i].value;
          ++i;
        }
        if (v != 0.0) {
          columns_.push_back(c);
          values_.push_back(v);
        }
      }
      offsets_[static_cast<std::size_t>(r) + 1] = static_cast<int>(columns_.size());
    }
  }

  static SparseMatrix identity(int n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseMatrix(n, n, std::move(t));
  }

  static SparseMatrix diagonal(const Vector& d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      t.push_back({static_cast<int>(i), static_cast<int>(i), d[i]});
    int n = static_cast<int>(d.size());
    return SparseMatrix(n, n, std::move(t));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  std::span<const int> row_columns(int r) const {
    return {columns_.data() + offsets_[static_cast<std::size_t>(r)],
            columns_.data() + offsets_[static_cast<std::size_t>(r) + 1]};
  }
  std::span<const double> row_values(int r) const {
    return {values_.data() + offsets_[static_cast<std::size_t>(r)],
            values_.data() + offsets_[static_cast<std::size_t>(r) + 1]};
  }
  const std::vector<int>& offsets() const { return offsets_; }
  const std::vector<int>& columns() const { return columns_; }
  const std::vector<double>& values() const { return values_; }

  double coeff(int r, int c) const {
    auto cols = row_columns(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return 0.0;
    return values_[offsets_[static_cast<std::size_t>(r)] +
                   static_cast<std::size_t>(it - cols.begin())];
  }

  Vector apply(const Vector& x) const {
    if (static_cast<int>(x.size()) != cols_)
      throw InvalidArgument("SparseMatrix::apply: size mismatch");
    Vector y(static_cast<std::size_t>(rows_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (std::size_t i = offsets_[static_cast<std::size_t>(r)];
           i < static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r) + 1]); ++i)
        s += values_[i] * x[static_cast<std::size_t>(columns_[i])];
      y[static_cast<std::size_t>(r)] = s;
    }
    return y;
  }

  Vector apply_transpose(const Vector& x) const {
    if (static_cast<int>(x.size()) != rows_)
      throw InvalidArgument("SparseMatrix::apply_transpose: size mismatch");
    Vector y(static_cast<std::size_t>(cols_), 0.0);
    for (int r = 0; r < rows_; ++r) {
      double xr = x[static_cast<std::size_t>(r)];
      if (xr == 0.0) continue;
      for (std::size_t i = offsets_[static_cast<std::size_t>(r)];
           i < static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r) + 1]); ++i)
        y[static_cast<std::size_t>(columns_[i])] += values_[i] * xr;
    }
    return y;
  }

  SparseMatrix transposed() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (int r = 0; r < rows_; ++r)
      for (std::size_t i = offsets_[static_cast<std::size_t>(r)];
           i < static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r) + 1]); ++i)
        t.push_back({columns_[i], r, values_[i]});
    return SparseMatrix(cols_, rows_, std::move(t));
  }

  bool symmetric(double tol = 0.0) const {
    if (rows_ != cols_) return false;
    SparseMatrix at = transposed();
    double scale = 0.0;
    for (double v : values_) scale = std::max(scale, std::abs(v));
    for (int r = 0; r < rows_; ++r) {
      auto ca = row_columns(r);
      auto va = row_values(r);
      auto cb = at.row_columns(r);
      auto vb = at.row_values(r);
      std::size_t i = 0, j = 0;
      while (i < ca.size() || j < cb.size()) {
        int col_a = i < ca.size() ? ca[i] : cols_;
        int col_b = j < cb.size() ? cb[j] : cols_;
        double x = col_a <= col_b ? va[i] : 0.0;
        double y = col_b <= col_a ? vb[j] : 0.0;
        if (std::abs(x - y) > tol * std::max(scale, 1.0)) return false;
        if (col_a <= col_b) ++i;
        if (col_b <= col_a) ++j;
      }
    }
    return true;
  }

  friend SparseMatrix operator*(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidArgument("SparseMatrix product: shape mismatch");
    // two-pass CSR product with a dense accumulator row
    std::vector<Triplet> out;
    std::vector<double> acc(static_cast<std::size_t>(b.cols_), 0.0);
    std::vector<int> marked;
    for (int r = 0; r < a.rows_; ++r) {
      marked.clear();
      auto ac = a.row_columns(r);
      auto av = a.row_values(r);
      for (std::size_t i = 0; i < ac.size(); ++i) {
        int m = ac[i];
        double w = av[i];
        auto bc = b.row_columns(m);
        auto bv = b.row_values(m);
        for (std::size_t j = 0; j < bc.size(); ++j) {
          if (acc[static_cast<std::size_t>(bc[j])] == 0.0 &&
              std::find(marked.begin(), marked.end(), bc[j]) == marked.end())
            marked.push_back(bc[j]);
          acc[static_cast<std::size_t>(bc[j])] += w * bv[j];
        }
      }
      for (int c : marked) {
        if (acc[static_cast<std::size_t>(c)] != 0.0)
          out.push_back({r, c, acc[static_cast<std::size_t>(c)]});
        acc[static_cast<std::size_t>(c)] = 0.0;
      }
    }
    return SparseMatrix(a.rows_, b.cols_, std::move(out));
  }

  /// alpha*A + beta*B entrywise.
  static SparseMatrix add(double alpha, const SparseMatrix& a, double beta,
                          const SparseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw InvalidArgument("SparseMatrix::add: shape mismatch");
    std::vector<Triplet> t;
    t.reserve(a.values_.size() + b.values_.size());
    for (int r = 0; r < a.rows_; ++r) {
      auto c = a.row_columns(r);
      auto v = a.row_values(r);
      for (std::size_t i = 0; i < c.size(); ++i) t.push_back({r, c[i], alpha * v[i]});
    }
    for (int r = 0; r < b.rows_; ++r) {
      auto c = b.row_columns(r);
      auto v = b.row_values(r);
      for (std::size_t i = 0; i < c.size(); ++i) t.push_back({r, c[i], beta * v[i]});
    }
    return SparseMatrix(a.rows_, a.cols_, std::move(t));
  }

private:
  int rows_;
  int cols_;
  std::vector<int> offsets_;
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Extraction preserving the order of the index sets.
inline SparseMatrix submatrix(const SparseMatrix& a, const IndexSet& row_set,
                              const IndexSet& col_set) {
  for (int i = 0; i < row_set.size(); ++i)
    if (row_set[i] >= a.rows()) throw InvalidArgument("submatrix: row index out of bounds");
  if (!col_set.empty() && col_set[col_set.size() - 1] >= a.cols())
    throw InvalidArgument("submatrix: column index out of bounds");
  std::vector<Triplet> t;
  for (int i = 0; i < row_set.size(); ++i) {
    int r = row_set[i];
    auto cols = a.row_columns(r);
    auto vals = a.row_values(r);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      int p = col_set.position(cols[j]);
      if (p >= 0) t.push_back({i, p, vals[j]});
    }
  }
  return SparseMatrix(row_set.size(), col_set.size(), std::move(t));
}

/// Matrix-market coordinate export (1-based indices).
inline void write_matrix_market(const SparseMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  char buf[64];
  for (int r = 0; r < a.rows(); ++r) {
    auto cols = a.row_columns(r);
    auto vals = a.row_values(r);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r + 1, cols[j] + 1, vals[j]);
      os << buf;
    }
  }
}

}  // namespace hodgetree

#endif
