// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_DENSE_ORACLE_HPP
#define HODGETREE_DENSE_ORACLE_HPP

#include <Eigen/Dense>

#include "hodgetree/trees.hpp"

namespace hodgetree {

namespace detail {

inline Eigen::MatrixXd to_dense(const SparseMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    auto cols = a.row_columns(r);
    auto vals = a.row_values(r);
    for (std::size_t j = 0; j < cols.size(); ++j) m(r, cols[j]) = vals[j];
  }
  return m;
}

/// Dense basis of the zero-M_0-mean subspace: columns e_j - (m_j/|Omega|) 1
/// for j != root, m = M_0 1.
inline Eigen::MatrixXd zero_mean_basis(const FormComplex& complex, int root) {
  int n0 = complex.dof_count(0);
  Vector m = complex.m(0).apply(Vector(static_cast<std::size_t>(n0), 1.0));
  double total = 0.0;
  for (double v : m) total += v;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n0, n0 - 1);
  int col = 0;
  for (int j = 0; j < n0; ++j) {
    if (j == root) continue;
    for (int i = 0; i < n0; ++i) w(i, col) = -m[static_cast<std::size_t>(j)] / total;
    w(j, col) += 1.0;
    ++col;
  }
  return w;
}

}  // namespace detail

/// Dense generalized eigensolve for the Poincare constant; the
/// cross-validation oracle for the power-iteration estimator on meshes
/// small enough for dense work.
inline double dense_poincare_constant(const FormComplex& complex, const TreePartition& part,
                                      int k) {
  if (k < 0 || k > complex.dim - 1)
    throw InvalidArgument("dense_poincare_constant: k out of range");
  Eigen::MatrixXd mq, aq;
  if (k == 0) {
    Eigen::MatrixXd w = detail::zero_mean_basis(complex, part.root_node);
    Eigen::MatrixXd m = detail::to_dense(complex.m(0));
    Eigen::MatrixXd a = detail::to_dense(complex.stiffness(0));
    mq = w.transpose() * m * w;
    aq = w.transpose() * a * w;
  } else {
    const IndexSet& bar = part.bar[static_cast<std::size_t>(k)];
    mq = detail::to_dense(submatrix(complex.m(k), bar, bar));
    aq = detail::to_dense(submatrix(complex.stiffness(k), bar, bar));
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(mq, aq);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

/// True discrete inf-sup constant of the pair P Lambda^{k-1} x P Lambda^k,
///   inf_{u in Ker d} sup_v (dv, u) / (||v||_H ||u||),
/// via a dense generalized eigenproblem on the kernel.
inline double dense_infsup_constant(const FormComplex& complex, const TreePartition& part,
                                    int k) {
  int n = complex.dim;
  if (k < 1 || k > n) throw InvalidArgument("dense_infsup_constant: k out of range");

  Eigen::MatrixXd x = detail::to_dense(complex.m(k - 1)) +
                      detail::to_dense(complex.stiffness(k - 1));  // H-norm Gram on test space
  Eigen::MatrixXd b = detail::to_dense(complex.m(k)) * detail::to_dense(complex.d(k - 1));
  if (k == 1) {
    // test functions live in the zero-mean quotient
    Eigen::MatrixXd w = detail::zero_mean_basis(complex, part.root_node);
    x = (w.transpose() * x * w).eval();
    b = (b * w).eval();
  }
  Eigen::MatrixXd s = b * x.ldlt().solve(b.transpose());

  Eigen::MatrixXd kernel;
  if (k == n) {
    kernel = Eigen::MatrixXd::Identity(complex.dof_count(n), complex.dof_count(n));
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(detail::to_dense(complex.d(k)));
    kernel = lu.kernel();
  }
  Eigen::MatrixXd g = kernel.transpose() * s * kernel;
  Eigen::MatrixXd h = kernel.transpose() * detail::to_dense(complex.m(k)) * kernel;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(g, h);
  return std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
}

}  // namespace hodgetree

#endif
