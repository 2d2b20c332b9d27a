// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_WHITNEY_HPP
#define HODGETREE_WHITNEY_HPP

#include <array>

#include <Eigen/Dense>

#include "hodgetree/mesh.hpp"
#include "hodgetree/sparse.hpp"

namespace hodgetree {

/// Exact integral of lambda_i * lambda_j over a cell of the given
/// volume, from the barycentric power formula
/// int_T lambda^alpha = alpha! n! / (|alpha| + n)! * |T|.
inline double barycentric_pair_integral(int i, int j, int dim, double volume) {
  double base = volume / ((dim + 1) * (dim + 2));
  return i == j ? 2.0 * base : base;
}

namespace detail {

/// Barycentric gradients of one cell, column i = grad lambda_i.
inline Eigen::MatrixXd barycentric_gradients(const SimplicialMesh& mesh,
                                             std::span<const int> cell) {
  int n = mesh.dim();
  Eigen::MatrixXd edges(n, n);
  auto x0 = mesh.vertex(cell[0]);
  for (int c = 1; c <= n; ++c) {
    auto xc = mesh.vertex(cell[static_cast<std::size_t>(c)]);
    for (int r = 0; r < n; ++r) edges(r, c - 1) = xc[r] - x0[r];
  }
  Eigen::MatrixXd inv = edges.inverse();  // row i-1 = grad lambda_i
  Eigen::MatrixXd grads(n, n + 1);
  grads.col(0).setZero();
  for (int i = 1; i <= n; ++i) {
    grads.col(i) = inv.row(i - 1).transpose();
    grads.col(0) -= grads.col(i);
  }
  return grads;
}

}  // namespace detail

/// Mass matrix of the Whitney k-form basis. Degrees of freedom are
/// integral moments over k-simplices at every degree, which makes the
/// cochain differentials exactly the signed incidence matrices:
///   k = 0      nodal hats,
///   k = 1      edge functions  w_e = l_i grad(l_j) - l_j grad(l_i),
///   k = 2, n=3 face functions with the standard factor 2,
///   k = n      cell indicators scaled to unit integral, 1_T / |T|.
/// Local integrals are evaluated exactly via the barycentric power
/// formula.
inline SparseMatrix assemble_mass(const SimplicialMesh& mesh, int k) {
  int n = mesh.dim();
  if (k < 0 || k > n) throw InvalidArgument("assemble_mass: k out of range");
  int ndof = mesh.count(k);
  std::vector<Triplet> trip;

  if (k == n) {
    for (int t = 0; t < ndof; ++t) trip.push_back({t, t, 1.0 / mesh.volume(t)});
    return SparseMatrix(ndof, ndof, std::move(trip));
  }

  int nc = mesh.count(n);
  for (int t = 0; t < nc; ++t) {
    auto cell = mesh.simplex(n, t);
    double vol = mesh.volume(t);
    Eigen::MatrixXd g = detail::barycentric_gradients(mesh, cell);

    if (k == 0) {
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= a; ++b) {
          double v = barycentric_pair_integral(a, b, n, vol);
          int ga = cell[static_cast<std::size_t>(a)];
          int gb = cell[static_cast<std::size_t>(b)];
          trip.push_back({ga, gb, v});
          if (a != b) trip.push_back({gb, ga, v});
        }
    } else if (k == 1) {
      // local edges (a, b), a < b, indexed against the global edge list
      std::vector<std::array<int, 2>> loc;
      std::vector<int> gid;
      for (int a = 0; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) {
          std::array<int, 2> e = {cell[static_cast<std::size_t>(a)],
                                  cell[static_cast<std::size_t>(b)]};
          loc.push_back({a, b});
          gid.push_back(mesh.find_simplex(1, e));
        }
      for (std::size_t p = 0; p < loc.size(); ++p)
        for (std::size_t q = 0; q <= p; ++q) {
          auto [a, b] = loc[p];
          auto [c, d] = loc[q];
          double v = barycentric_pair_integral(a, c, n, vol) * g.col(b).dot(g.col(d)) -
                     barycentric_pair_integral(a, d, n, vol) * g.col(b).dot(g.col(c)) -
                     barycentric_pair_integral(b, c, n, vol) * g.col(a).dot(g.col(d)) +
                     barycentric_pair_integral(b, d, n, vol) * g.col(a).dot(g.col(c));
          trip.push_back({gid[p], gid[q], v});
          if (p != q) trip.push_back({gid[q], gid[p], v});
        }
    } else {  // k == 2, n == 3
      // local faces: drop one cell vertex; signed cross products of the
      // remaining barycentric gradients
      std::vector<int> gid;
      std::vector<std::array<Eigen::Vector3d, 3>> cross;  // per face, per face-vertex
      std::vector<std::array<int, 3>> fverts;
      for (int omit = 0; omit <= 3; ++omit) {
        std::array<int, 3> f;
        std::array<int, 3> fl;
        int w = 0;
        for (int j = 0; j <= 3; ++j)
          if (j != omit) {
            fl[static_cast<std::size_t>(w)] = j;
            f[static_cast<std::size_t>(w)] = cell[static_cast<std::size_t>(j)];
            ++w;
          }
        gid.push_back(mesh.find_simplex(2, f));
        fverts.push_back(fl);
        std::array<Eigen::Vector3d, 3> cr;
        for (int p = 0; p < 3; ++p) {
          int q = fl[static_cast<std::size_t>((p + 1) % 3)];
          int r = fl[static_cast<std::size_t>((p + 2) % 3)];
          if (q > r) std::swap(q, r);
          Eigen::Vector3d prod = Eigen::Vector3d(g.col(q)).cross(Eigen::Vector3d(g.col(r)));
          double sign = p % 2 == 0 ? 1.0 : -1.0;
          cr[static_cast<std::size_t>(p)] = sign * prod;
        }
        cross.push_back(cr);
      }
      for (std::size_t fp = 0; fp < gid.size(); ++fp)
        for (std::size_t fq = 0; fq <= fp; ++fq) {
          double v = 0.0;
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
              v += barycentric_pair_integral(fverts[fp][static_cast<std::size_t>(p)],
                                             fverts[fq][static_cast<std::size_t>(q)], n,
                                             vol) *
                   cross[fp][static_cast<std::size_t>(p)].dot(
                       cross[fq][static_cast<std::size_t>(q)]);
          trip.push_back({gid[fp], gid[fq], 4.0 * v});
          if (fp != fq) trip.push_back({gid[fq], gid[fp], 4.0 * v});
        }
    }
  }
  return SparseMatrix(ndof, ndof, std::move(trip));
}

/// Cochain differential: with integral-moment DOFs this is exactly the
/// signed incidence matrix, no scaling.
inline SparseMatrix differential(const SimplicialMesh& mesh, int k) {
  if (k < 0 || k >= mesh.dim()) throw InvalidArgument("differential: k out of range");
  return signed_incidence(mesh, k);
}

/// Mass and differential matrices of the Whitney complex on one mesh.
struct FormComplex {
  explicit FormComplex(const SimplicialMesh& m) : mesh(&m), dim(m.dim()) {
    mass.reserve(static_cast<std::size_t>(dim) + 1);
    for (int k = 0; k <= dim; ++k) mass.push_back(assemble_mass(m, k));
    diff.reserve(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) diff.push_back(differential(m, k));
  }

  int dof_count(int k) const {
    if (k < 0 || k > dim) throw InvalidArgument("FormComplex: k out of range");
    return mass[static_cast<std::size_t>(k)].rows();
  }

  const SparseMatrix& m(int k) const { return mass.at(static_cast<std::size_t>(k)); }
  const SparseMatrix& d(int k) const { return diff.at(static_cast<std::size_t>(k)); }

  /// Stiffness form A_k = D_k^T M_{k+1} D_k (positive semidefinite,
  /// kernel = kernel of D_k).
  SparseMatrix stiffness(int k) const {
    if (k < 0 || k >= dim) throw InvalidArgument("stiffness: k out of range");
    const SparseMatrix& dk = d(k);
    return dk.transposed() * (m(k + 1) * dk);
  }

  /// Dual vector f = M_k w with <f, u'> = (w, u') for all u'.
  Vector functional_from_density(int k, const Vector& w) const {
    if (static_cast<int>(w.size()) != dof_count(k))
      throw InvalidArgument("functional_from_density: size mismatch");
    return m(k).apply(w);
  }

  /// L2 inner product of two coefficient vectors on P Lambda^k.
  double inner(int k, const Vector& a, const Vector& b) const {
    return dot(a, m(k).apply(b));
  }

  double norm(int k, const Vector& a) const { return std::sqrt(std::max(inner(k, a, a), 0.0)); }

  const SimplicialMesh* mesh;
  int dim;
  std::vector<SparseMatrix> mass;
  std::vector<SparseMatrix> diff;
  // DOF convention: integral moments over k-simplices at every degree
  static constexpr const char* dof_convention = "integral-moments";
};

}  // namespace hodgetree

#endif
