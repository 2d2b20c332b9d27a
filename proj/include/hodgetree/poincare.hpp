// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_POINCARE_HPP
#define HODGETREE_POINCARE_HPP

#include <memory>

#include "hodgetree/solvers.hpp"
#include "hodgetree/trees.hpp"

namespace hodgetree {

namespace detail {

/// Solver for one permitting block B_k. A triangular row/column pairing
/// is detected and exploited whenever it exists (the node-tree and
/// dual-tree blocks); the generic middle block falls back to pivoted LU.
class BlockSolver {
public:
  BlockSolver() = default;

  explicit BlockSolver(SparseMatrix block) : b_(std::move(block)) {
    auto [row_order, col_order] = triangular_peel(b_);
    if (!row_order.empty()) {
      row_order_ = std::move(row_order);
      col_order_ = std::move(col_order);
      for (std::size_t t = 0; t < row_order_.size(); ++t)
        if (b_.coeff(row_order_[t], col_order_[t]) == 0.0)
          throw SingularMatrixError("BlockSolver: zero pivot on the tree diagonal");
    } else {
      lu_ = std::make_shared<LuFactorization>(b_);
    }
  }

  bool triangular() const { return !row_order_.empty(); }
  int size() const { return b_.rows(); }
  int nnz() const { return b_.nnz(); }

  /// x with B x = r. The triangular path is a single O(nnz) sweep.
  Vector solve(const Vector& r) const {
    if (lu_) return lu_->solve(r);
    Vector x(static_cast<std::size_t>(b_.cols()), 0.0);
    for (std::size_t t = 0; t < row_order_.size(); ++t) {
      int row = row_order_[t];
      int col = col_order_[t];
      double s = r[static_cast<std::size_t>(row)];
      double diag = 0.0;
      auto cols = b_.row_columns(row);
      auto vals = b_.row_values(row);
      for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] == col)
          diag = vals[j];
        else
          s -= vals[j] * x[static_cast<std::size_t>(cols[j])];
      }
      x[static_cast<std::size_t>(col)] = s / diag;
    }
    return x;
  }

  /// x with B^T x = r (backward sweep of the same pairing).
  Vector solve_transpose(const Vector& r) const {
    if (lu_) return lu_->solve_transpose(r);
    Vector x(static_cast<std::size_t>(b_.rows()), 0.0);
    Vector rem = r;
    for (std::size_t t = row_order_.size(); t-- > 0;) {
      int row = row_order_[t];
      int col = col_order_[t];
      double diag = b_.coeff(row, col);
      double xv = rem[static_cast<std::size_t>(col)] / diag;
      x[static_cast<std::size_t>(row)] = xv;
      auto cols = b_.row_columns(row);
      auto vals = b_.row_values(row);
      for (std::size_t j = 0; j < cols.size(); ++j)
        if (cols[j] != col) rem[static_cast<std::size_t>(cols[j])] -= vals[j] * xv;
    }
    return x;
  }

private:
  SparseMatrix b_;
  std::vector<int> row_order_, col_order_;
  std::shared_ptr<LuFactorization> lu_;
};

}  // namespace detail

/// The permitted operator p = (pi_ring d_bar)^{-1} pi_ring realized
/// through the factorized blocks B_k, together with the induced
/// identities dp + pd = I, dpd = d and the decomposition
/// u = p(du) + d(pu).
///
/// Coefficient vectors are always full-length with zeros off-support.
/// Results landing in Lambda^0 are re-centered to the M_0-weighted
/// zero-mean representative of the quotient space.
class PoincareOperator {
public:
  PoincareOperator(const FormComplex& complex, const TreePartition& partition)
      : complex_(&complex), partition_(&partition) {
    int n = complex.dim;
    blocks_.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 1; k <= n; ++k)
      blocks_[static_cast<std::size_t>(k)] =
          detail::BlockSolver(poincare_block(complex, partition, k));
    lumped_mass_ = complex.m(0).apply(Vector(static_cast<std::size_t>(complex.dof_count(0)), 1.0));
    total_mass_ = 0.0;
    for (double v : lumped_mass_) total_mass_ += v;
  }

  const FormComplex& complex() const { return *complex_; }
  const TreePartition& partition() const { return *partition_; }
  const detail::BlockSolver& block(int k) const {
    return blocks_.at(static_cast<std::size_t>(k));
  }

  /// p_k : P Lambda^k -> P Lambda^{k-1}. Extracts the ring components,
  /// solves B_k, scatters into bar_{k-1}; a zero-mean shift is applied
  /// when the target is Lambda^0.
  Vector apply_p(int k, const Vector& u) const {
    int n = complex_->dim;
    if (k < 1 || k > n) throw InvalidArgument("apply_p: k out of range");
    if (static_cast<int>(u.size()) != complex_->dof_count(k))
      throw InvalidArgument("apply_p: size mismatch");
    const IndexSet& rows = partition_->ring[static_cast<std::size_t>(k)];
    Vector packed = rows.gather(u);
    Vector y = blocks_[static_cast<std::size_t>(k)].solve(packed);
    IndexSet cols = partition_->bar_columns(k);
    Vector out = cols.scatter(y, complex_->dof_count(k - 1));
    if (k == 1) recenter(out);
    return out;
  }

  /// Relative defect of d(pu) + p(du) = u in the Euclidean norm.
  double poincare_identity_residual(int k, const Vector& u) const {
    int n = complex_->dim;
    Vector lhs = complex_->d(k - 1).apply(apply_p(k, u));
    if (k < n) {
      Vector pdu = apply_p(k + 1, complex_->d(k).apply(u));
      axpy(1.0, pdu, lhs);
    }
    Vector r = subtract(lhs, u);
    double un = norm2(u);
    return un == 0.0 ? norm2(r) : norm2(r) / un;
  }

  /// Relative defect of d p d = d on Lambda^k (0 <= k <= n; trivially
  /// zero at k = n where d vanishes, and 0/0 returns 0).
  double dpd_residual(int k, const Vector& u) const {
    int n = complex_->dim;
    if (k == n) return 0.0;
    Vector du = complex_->d(k).apply(u);
    double dn = norm2(du);
    if (dn == 0.0) return 0.0;
    Vector dpdu = complex_->d(k).apply(apply_p(k + 1, du));
    return norm2(subtract(du, dpdu)) / dn;
  }

  /// The unique splitting u = ubar + d vbar with ubar = p(du) in bar_k
  /// and vbar = p(u) in bar_{k-1}.
  std::pair<Vector, Vector> decompose(int k, const Vector& u) const {
    int n = complex_->dim;
    Vector ubar = k < n ? apply_p(k + 1, complex_->d(k).apply(u))
                        : Vector(static_cast<std::size_t>(complex_->dof_count(k)), 0.0);
    Vector vbar = apply_p(k, u);
    return {std::move(ubar), std::move(vbar)};
  }

  Vector reconstruct(int k, const Vector& ubar, const Vector& vbar) const {
    Vector out = complex_->d(k - 1).apply(vbar);
    axpy(1.0, ubar, out);
    return out;
  }

  /// Subtract the M_0-weighted mean (the zero-mean class representative).
  void recenter(Vector& v) const {
    double mean = dot(lumped_mass_, v) / total_mass_;
    for (double& x : v) x -= mean;
  }

  const Vector& lumped_mass() const { return lumped_mass_; }
  double total_mass() const { return total_mass_; }

private:
  const FormComplex* complex_;
  const TreePartition* partition_;
  std::vector<detail::BlockSolver> blocks_;
  Vector lumped_mass_;  // M_0 * 1
  double total_mass_;   // |Omega|
};

}  // namespace hodgetree

#endif
