// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_SOLVERS_HPP
#define HODGETREE_SOLVERS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hodgetree/common.hpp"
#include "hodgetree/sparse.hpp"

namespace hodgetree {

using ApplyFn = std::function<Vector(const Vector&)>;

inline ApplyFn make_apply(const SparseMatrix& a) {
  return [&a](const Vector& x) { return a.apply(x); };
}

inline Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nnz()));
  for (int r = 0; r < a.rows(); ++r) {
    auto cols = a.row_columns(r);
    auto vals = a.row_values(r);
    for (std::size_t j = 0; j < cols.size(); ++j)
      t.emplace_back(r, cols[j], vals[j]);
  }
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

/// Reusable SPD factorization (simplicial LDLT). Definiteness is checked
/// through the factor's diagonal.
class SpdFactorization {
public:
  explicit SpdFactorization(const SparseMatrix& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw InvalidArgument("SpdFactorization: matrix not square");
    if (!a.symmetric(1e-12)) throw InvalidArgument("SpdFactorization: matrix not symmetric");
    ldlt_.compute(to_eigen(a));
    if (ldlt_.info() != Eigen::Success)
      throw IndefiniteOperatorError("SpdFactorization: LDLT breakdown");
    const auto& d = ldlt_.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      if (!(d[i] > 0.0))
        throw IndefiniteOperatorError("SpdFactorization: nonpositive pivot at index " +
                                      std::to_string(i));
  }

  Vector solve(const Vector& b) const {
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = ldlt_.solve(bm);
    return Vector(x.data(), x.data() + x.size());
  }

  int size() const { return n_; }

private:
  int n_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Reusable pivoted LU factorization for general square matrices.
class LuFactorization {
public:
  explicit LuFactorization(const SparseMatrix& a) : n_(a.rows()) {
    if (a.rows() != a.cols()) throw InvalidArgument("LuFactorization: matrix not square");
    Eigen::SparseMatrix<double> m = to_eigen(a);
    lu_.isSymmetric(false);
    lu_.compute(m);
    if (lu_.info() != Eigen::Success) {
      // Eigen's message names the offending column for zero pivots.
      std::string msg = lu_.lastErrorMessage();
      int pivot = -1;
      std::size_t pos = msg.find_last_not_of("0123456789");
      if (pos != std::string::npos && pos + 1 < msg.size())
        pivot = std::stoi(msg.substr(pos + 1));
      throw SingularMatrixError("LuFactorization: " + msg, pivot);
    }
  }

  Vector solve(const Vector& b) const {
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = lu_.solve(bm);
    return Vector(x.data(), x.data() + x.size());
  }

  Vector solve_transpose(const Vector& b) const {
    Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = lu_.transpose().solve(bm);
    return Vector(x.data(), x.data() + x.size());
  }

  int size() const { return n_; }

private:
  int n_;
  // Eigen declares SparseLU::transpose() non-const although the solve is
  // logically read-only
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

struct CgResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
};

/// Plain conjugate gradients on an SPD operator, run to a relative
/// residual. Breakdown (nonpositive curvature) is reported as
/// indefiniteness, distinct from running out of iterations.
inline CgResult conjugate_gradient(const ApplyFn& apply, const Vector& b, double rel_tol,
                                   int max_iter, const ApplyFn* precond = nullptr) {
  CgResult res;
  std::size_t n = b.size();
  res.x.assign(n, 0.0);
  Vector r = b;
  double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Vector z = precond ? (*precond)(r) : r;
  Vector p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    Vector ap = apply(p);
    double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      if (pap == 0.0 && norm2(p) == 0.0) break;
      throw IndefiniteOperatorError("conjugate_gradient: nonpositive curvature");
    }
    double alpha = rz / pap;
    axpy(alpha, p, res.x);
    axpy(-alpha, ap, r);
    res.iterations = it;
    if (norm2(r) <= rel_tol * bnorm) {
      res.converged = true;
      return res;
    }
    z = precond ? (*precond)(r) : r;
    double rz_next = dot(r, z);
    double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

/// Solve A x = b for SPD A to a relative residual. A direct symmetric
/// factorization is used below `direct_size_limit` unknowns, conjugate
/// gradients above it; both meet the residual contract.
inline Vector spd_solve(const SparseMatrix& a, const Vector& b, double rel_tol = 1e-12,
                        int direct_size_limit = 50000) {
  if (a.rows() != a.cols()) throw InvalidArgument("spd_solve: matrix not square");
  if (static_cast<int>(b.size()) != a.rows())
    throw InvalidArgument("spd_solve: rhs size mismatch");
  if (!a.symmetric(1e-12)) throw InvalidArgument("spd_solve: matrix not symmetric");
  if (a.rows() <= direct_size_limit) {
    SpdFactorization f(a);
    Vector x = f.solve(b);
    // iterative refinement guards against loss from ill conditioning;
    // the reachable floor is the backward-error bound rel_tol (|b| + |A||x|)
    double anorm = 0.0;
    for (int r = 0; r < a.rows(); ++r) {
      double s = 0.0;
      for (double v : a.row_values(r)) s += std::abs(v);
      anorm = std::max(anorm, s);
    }
    double bnorm = std::max(norm2(b), 1e-300);
    for (int step = 0; step < 5; ++step) {
      Vector r = subtract(b, a.apply(x));
      if (norm2(r) <= rel_tol * std::max(bnorm, anorm * norm2(x))) return x;
      Vector dx = f.solve(r);
      axpy(1.0, dx, x);
    }
    if (norm2(subtract(b, a.apply(x))) >
        rel_tol * std::max(bnorm, anorm * norm2(x)))
      throw ConvergenceError("spd_solve: direct solve missed the residual tolerance");
    return x;
  }
  ApplyFn apply = make_apply(a);
  CgResult cg = conjugate_gradient(apply, b, rel_tol, 10 * a.rows() + 100);
  if (!cg.converged)
    throw ConvergenceError("spd_solve: CG did not reach tolerance", cg.iterations);
  return cg.x;
}

/// Solve A x = b via pivoted LU (general square A), residual <= 1e-12 |b|.
inline Vector lu_solve(const SparseMatrix& a, const Vector& b) {
  if (static_cast<int>(b.size()) != a.rows())
    throw InvalidArgument("lu_solve: rhs size mismatch");
  LuFactorization f(a);
  Vector x = f.solve(b);
  Vector r = subtract(b, a.apply(x));
  double bnorm = norm2(b);
  if (bnorm > 0.0 && norm2(r) > 1e-12 * bnorm) {
    Vector dx = f.solve(r);
    axpy(1.0, dx, x);
    r = subtract(b, a.apply(x));
    if (norm2(r) > 1e-9 * bnorm)
      throw SingularMatrixError("lu_solve: singular to working precision");
  }
  return x;
}

/// Forward substitution for a matrix that is lower triangular under the
/// given elimination order: at step t, unknown order[t] is eliminated
/// using row order[t]. Structural violations and zero diagonals are
/// reported. O(nnz), bitwise deterministic.
inline Vector tree_triangular_solve(const SparseMatrix& a, const Vector& b,
                                    const std::vector<int>& elimination_order) {
  int n = a.rows();
  if (a.cols() != n) throw InvalidArgument("tree_triangular_solve: matrix not square");
  if (static_cast<int>(b.size()) != n)
    throw InvalidArgument("tree_triangular_solve: rhs size mismatch");
  if (static_cast<int>(elimination_order.size()) != n)
    throw InvalidArgument("tree_triangular_solve: order size mismatch");
  std::vector<int> step_of(static_cast<std::size_t>(n), -1);
  for (int t = 0; t < n; ++t) {
    int i = elimination_order[static_cast<std::size_t>(t)];
    if (i < 0 || i >= n || step_of[static_cast<std::size_t>(i)] != -1)
      throw InvalidArgument("tree_triangular_solve: order is not a permutation");
    step_of[static_cast<std::size_t>(i)] = t;
  }
  Vector x(static_cast<std::size_t>(n), 0.0);
  for (int t = 0; t < n; ++t) {
    int i = elimination_order[static_cast<std::size_t>(t)];
    auto cols = a.row_columns(i);
    auto vals = a.row_values(i);
    double diag = 0.0;
    double s = b[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      int c = cols[j];
      if (c == i) {
        diag = vals[j];
      } else if (step_of[static_cast<std::size_t>(c)] < t) {
        s -= vals[j] * x[static_cast<std::size_t>(c)];
      } else {
        throw SingularMatrixError(
            "tree_triangular_solve: entry above the diagonal after permutation (row " +
            std::to_string(i) + ", col " + std::to_string(c) + ")");
      }
    }
    if (diag == 0.0)
      throw SingularMatrixError("tree_triangular_solve: zero diagonal at row " +
                                    std::to_string(i),
                                i);
    x[static_cast<std::size_t>(i)] = s / diag;
  }
  return x;
}

struct MinresResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
};

/// Preconditioned MinRes for a symmetric operator and an SPD
/// preconditioner. Stops when the preconditioned residual norm has
/// dropped by rel_tol, either relative to its initial value or in the
/// Paige-Saunders backward-error sense ||r|| <= rel_tol ||A|| ||y||.
inline MinresResult minres(const ApplyFn& apply, const Vector& b, const ApplyFn& precond,
                           double rel_tol, int max_iter) {
  MinresResult res;
  std::size_t n = b.size();
  res.x.assign(n, 0.0);

  Vector v_prev(n, 0.0);
  Vector v = b;
  Vector z = precond(v);
  double gamma_prev = 1.0;
  double gamma = std::sqrt(dot(z, v));
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw IndefiniteOperatorError("minres: preconditioner produced a nonpositive norm");
  if (gamma == 0.0) {
    res.converged = true;
    return res;
  }
  double eta = gamma;
  double gamma0 = gamma;
  double s_prev = 0.0, s_curr = 0.0;
  double c_prev = 1.0, c_curr = 1.0;
  double tnorm2 = 0.0;  // running estimate of ||T||_F^2 ~ ||A||^2
  Vector w_prev(n, 0.0), w_curr(n, 0.0);

  for (int it = 1; it <= max_iter; ++it) {
    Vector zq = z;
    scale(1.0 / gamma, zq);
    Vector az = apply(zq);
    double delta = dot(az, zq);
    Vector v_next = az;
    axpy(-delta / gamma, v, v_next);
    if (it > 1) axpy(-gamma / gamma_prev, v_prev, v_next);
    Vector z_next = precond(v_next);
    double gamma_next_sq = dot(z_next, v_next);
    if (!std::isfinite(gamma_next_sq) || gamma_next_sq < -1e-13 * dot(v_next, v_next))
      throw IndefiniteOperatorError("minres: Lanczos breakdown (indefinite preconditioner?)");
    double gamma_next = std::sqrt(std::max(gamma_next_sq, 0.0));

    double a0 = c_curr * delta - c_prev * s_curr * gamma;
    double a1 = std::sqrt(a0 * a0 + gamma_next * gamma_next);
    double a2 = s_curr * delta + c_prev * c_curr * gamma;
    double a3 = s_prev * gamma;
    if (a1 == 0.0)
      throw IndefiniteOperatorError("minres: singular reduced system");
    double c_next = a0 / a1;
    double s_next = gamma_next / a1;

    Vector w_next = zq;
    axpy(-a3, w_prev, w_next);
    axpy(-a2, w_curr, w_next);
    scale(1.0 / a1, w_next);

    axpy(c_next * eta, w_next, res.x);
    eta = -s_next * eta;

    res.iterations = it;
    res.relative_residual = std::abs(eta) / gamma0;
    if (!std::isfinite(res.relative_residual))
      throw ConvergenceError("minres: divergence (non-finite residual)", it);
    tnorm2 += delta * delta + gamma_next * gamma_next + (it > 1 ? gamma * gamma : 0.0);
    double backward = std::abs(eta) / std::max(std::sqrt(tnorm2) * norm2(res.x), 1e-300);
    if (res.relative_residual <= rel_tol || backward <= rel_tol) {
      res.converged = true;
      return res;
    }
    if (gamma_next == 0.0) {
      // invariant subspace exhausted; solution is exact
      res.converged = true;
      return res;
    }

    v_prev = v;
    v = v_next;
    z = z_next;
    gamma_prev = gamma;
    gamma = gamma_next;
    s_prev = s_curr;
    s_curr = s_next;
    c_prev = c_curr;
    c_curr = c_next;
    w_prev = w_curr;
    w_curr = w_next;
  }
  return res;
}

inline MinresResult minres(const SparseMatrix& a, const Vector& b, double rel_tol,
                           int max_iter) {
  ApplyFn ident = [](const Vector& v) { return v; };
  return minres(make_apply(a), b, ident, rel_tol, max_iter);
}

}  // namespace hodgetree

#endif
