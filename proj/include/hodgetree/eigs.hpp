// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_EIGS_HPP
#define HODGETREE_EIGS_HPP

#include <Eigen/Dense>

#include "hodgetree/common.hpp"
#include "hodgetree/solvers.hpp"

namespace hodgetree {

struct ExtremeEigs {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Extreme eigenvalues of B^{-1} A for symmetric positive definite A and
/// SPD B, given A*v and B^{-1}*v. Lanczos in the A-inner product with
/// full reorthogonalization; the Ritz interval approaches the true
/// spectrum from the inside.
inline ExtremeEigs extreme_gen_eigs(const ApplyFn& a_apply, const ApplyFn& b_inverse_apply,
                                    int size, double tol, int max_iter = 300,
                                    std::uint64_t seed = 20240915) {
  ExtremeEigs out;
  if (size <= 0) throw InvalidArgument("extreme_gen_eigs: empty operator");
  max_iter = std::min(max_iter, size);

  std::vector<Vector> q;      // Lanczos vectors
  std::vector<Vector> aq;     // A * q, reused for A-inner products
  std::vector<double> alpha;
  std::vector<double> beta;

  Vector v = random_vector(static_cast<std::size_t>(size), seed);
  Vector av = a_apply(v);
  double nrm = std::sqrt(std::max(dot(v, av), 0.0));
  if (nrm == 0.0) throw IndefiniteOperatorError("extreme_gen_eigs: A annihilates start vector");
  scale(1.0 / nrm, v);
  scale(1.0 / nrm, av);
  q.push_back(v);
  aq.push_back(av);

  double lo_prev = 0.0, hi_prev = 0.0;
  for (int j = 0; j < max_iter; ++j) {
    Vector w = b_inverse_apply(aq[static_cast<std::size_t>(j)]);
    double aj = dot(w, aq[static_cast<std::size_t>(j)]);
    alpha.push_back(aj);
    axpy(-aj, q[static_cast<std::size_t>(j)], w);
    if (j > 0) axpy(-beta[static_cast<std::size_t>(j) - 1], q[static_cast<std::size_t>(j) - 1], w);
    // full reorthogonalization in the A-inner product
    Vector aw = a_apply(w);
    for (std::size_t i = 0; i < q.size(); ++i) {
      double c = dot(q[i], aw);
      if (c != 0.0) {
        axpy(-c, q[i], w);
        axpy(-c, aq[i], aw);
      }
    }
    double bj = std::sqrt(std::max(dot(w, aw), 0.0));

    // Ritz values of the tridiagonal section
    int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) {
        t(i, i + 1) = beta[static_cast<std::size_t>(i)];
        t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues()(0);
    double hi = es.eigenvalues()(m - 1);
    out.lambda_min = lo;
    out.lambda_max = hi;
    out.iterations = m;

    bool settled = m > 2 && std::abs(lo - lo_prev) <= tol * std::max(std::abs(lo), 1e-300) &&
                   std::abs(hi - hi_prev) <= tol * std::max(std::abs(hi), 1e-300);
    if (settled || bj <= 1e-13 * std::abs(hi) || m == size) {
      out.converged = true;
      return out;
    }
    lo_prev = lo;
    hi_prev = hi;

    beta.push_back(bj);
    scale(1.0 / bj, w);
    scale(1.0 / bj, aw);
    q.push_back(w);
    aq.push_back(aw);
  }
  return out;  // best estimates, converged stays false
}

struct GenEigMaxResult {
  double lambda = 0.0;
  Vector eigenvector;
  int iterations = 0;
  bool converged = false;
};

/// Largest lambda of M u = lambda A u by block power iteration on
/// A^{-1} M with Rayleigh-Ritz extraction, iterates kept M-orthogonal
/// to an optional deflation vector. The block resolves the eigenvalue
/// clusters that symmetric meshes produce; convergence is declared when
/// the relative eigenvalue increment stays below tol.
inline GenEigMaxResult gen_eig_max(const SparseMatrix& m,
                                   const std::function<Vector(const Vector&)>& a_solve,
                                   const Vector* deflation, double tol, int max_iter = 50000,
                                   std::uint64_t seed = 77001, int block = 4) {
  GenEigMaxResult out;
  int n = m.rows();
  if (n == 0) throw InvalidArgument("gen_eig_max: empty pencil");

  Vector md;
  double dmd = 0.0;
  if (deflation) {
    md = m.apply(*deflation);
    dmd = dot(*deflation, md);
    if (!(dmd > 0.0)) throw InvalidArgument("gen_eig_max: deflation vector has zero M-norm");
  }
  auto deflate = [&](Vector& v) {
    if (!deflation) return;
    double c = dot(v, md) / dmd;
    axpy(-c, *deflation, v);
  };

  int b = std::max(1, std::min(block, n - (deflation ? 1 : 0)));
  std::vector<Vector> x(static_cast<std::size_t>(b));
  for (int j = 0; j < b; ++j) {
    x[static_cast<std::size_t>(j)] =
        random_vector(static_cast<std::size_t>(n), seed + static_cast<std::uint64_t>(j));
    deflate(x[static_cast<std::size_t>(j)]);
  }

  double lambda_prev = 0.0;
  int settled = 0;
  for (int it = 1; it <= max_iter; ++it) {
    // M-orthonormalize the block (modified Gram-Schmidt)
    for (int j = 0; j < b; ++j) {
      Vector& w = x[static_cast<std::size_t>(j)];
      for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < j; ++i) {
          double c = dot(w, m.apply(x[static_cast<std::size_t>(i)]));
          axpy(-c, x[static_cast<std::size_t>(i)], w);
        }
        double nrm2m = dot(w, m.apply(w));
        if (nrm2m > 1e-28) {
          scale(1.0 / std::sqrt(nrm2m), w);
          break;
        }
        if (attempt >= 2)
          throw ConvergenceError("gen_eig_max: block collapsed onto the deflated space", it);
        w = random_vector(static_cast<std::size_t>(n),
                          seed + 1000 + static_cast<std::uint64_t>(it * b + j));
        deflate(w);
      }
    }
    // apply C = A^{-1} M and project (C is self-adjoint in the M-inner product)
    std::vector<Vector> z(static_cast<std::size_t>(b));
    Eigen::MatrixXd h(b, b);
    for (int j = 0; j < b; ++j) {
      z[static_cast<std::size_t>(j)] = a_solve(m.apply(x[static_cast<std::size_t>(j)]));
      deflate(z[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < b; ++j) {
      Vector mz = m.apply(z[static_cast<std::size_t>(j)]);
      for (int i = 0; i < b; ++i) h(i, j) = dot(x[static_cast<std::size_t>(i)], mz);
    }
    Eigen::MatrixXd hs = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hs);
    double lambda = es.eigenvalues()(b - 1);
    out.lambda = lambda;
    out.iterations = it;

    // rotate onto the Ritz directions, dominant first
    std::vector<Vector> next(static_cast<std::size_t>(b),
                             Vector(static_cast<std::size_t>(n), 0.0));
    for (int j = 0; j < b; ++j)
      for (int i = 0; i < b; ++i)
        axpy(es.eigenvectors()(i, b - 1 - j), z[static_cast<std::size_t>(i)],
             next[static_cast<std::size_t>(j)]);
    x = std::move(next);

    if (it > 3 &&
        std::abs(lambda - lambda_prev) <= tol * std::max(std::abs(lambda), 1e-300))
      ++settled;
    else
      settled = 0;
    if (settled >= 3) {
      out.converged = true;
      out.eigenvector = x[0];
      double nrm = norm2(out.eigenvector);
      if (nrm > 0.0) scale(1.0 / nrm, out.eigenvector);
      return out;
    }
    lambda_prev = lambda;
  }
  out.eigenvector = x[0];
  throw ConvergenceError("gen_eig_max: stagnation, no convergence within the iteration cap",
                         out.iterations);
}

}  // namespace hodgetree

#endif
