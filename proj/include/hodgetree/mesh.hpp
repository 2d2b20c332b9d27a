// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_MESH_HPP
#define HODGETREE_MESH_HPP

#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hodgetree/sparse.hpp"

namespace hodgetree {

/// Simplicial tessellation of a contractible domain in R^n, n in {2, 3}.
///
/// All k-simplices (0 <= k <= n) are stored as ascending vertex tuples
/// and numbered lexicographically per dimension, so meshes, spanning
/// trees and experiment tables are reproducible across runs. Immutable
/// after construction.
class SimplicialMesh {
public:
  /// Build the full simplex lattice from top-dimensional cells. Lower
  /// simplices are derived by enumerating sorted vertex subsets and
  /// deduplicating. Degenerate cells (repeated vertices, zero volume)
  /// and unreferenced vertices are rejected.
  static SimplicialMesh complete_from_cells(int dim, std::vector<double> vertices,
                                            std::vector<std::vector<int>> cells) {
    if (dim != 2 && dim != 3) throw InvalidArgument("mesh: dim must be 2 or 3");
    if (vertices.size() % static_cast<std::size_t>(dim) != 0)
      throw InvalidArgument("mesh: vertex coordinate count not divisible by dim");
    SimplicialMesh mesh;
    mesh.dim_ = dim;
    mesh.coords_ = std::move(vertices);
    int nv = mesh.vertex_count();

    std::vector<char> used(static_cast<std::size_t>(nv), 0);
    std::vector<std::vector<int>> sorted_cells;
    sorted_cells.reserve(cells.size());
    for (auto& cell : cells) {
      if (static_cast<int>(cell.size()) != dim + 1)
        throw InvalidArgument("mesh: cell arity must be dim + 1");
      std::vector<int> c = cell;
      std::sort(c.begin(), c.end());
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 0 || c[i] >= nv) throw InvalidArgument("mesh: cell vertex out of range");
        if (i > 0 && c[i] == c[i - 1])
          throw InvalidArgument("mesh: degenerate cell (repeated vertex)");
        used[static_cast<std::size_t>(c[i])] = 1;
      }
      sorted_cells.push_back(std::move(c));
    }
    for (int v = 0; v < nv; ++v)
      if (!used[static_cast<std::size_t>(v)])
        throw InvalidArgument("mesh: vertex " + std::to_string(v) +
                              " not referenced by any cell");

    mesh.simplices_.assign(static_cast<std::size_t>(dim) + 1, {});
    for (int k = 0; k <= dim; ++k) {
      std::vector<std::vector<int>> faces;
      std::vector<int> sel(static_cast<std::size_t>(k) + 1);
      for (const auto& c : sorted_cells) {
        // all (k+1)-subsets of the sorted cell tuple, in lexicographic order
        enumerate_subsets(c, k + 1, sel, 0, 0, faces);
      }
      std::sort(faces.begin(), faces.end());
      faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
      auto& flat = mesh.simplices_[static_cast<std::size_t>(k)];
      flat.reserve(faces.size() * (static_cast<std::size_t>(k) + 1));
      for (const auto& f : faces) flat.insert(flat.end(), f.begin(), f.end());
    }

    int nc = mesh.count(dim);
    mesh.volumes_.resize(static_cast<std::size_t>(nc));
    for (int t = 0; t < nc; ++t) {
      double vol = mesh.compute_volume(mesh.simplex(dim, t));
      if (!(vol > 0.0))
        throw InvalidArgument("mesh: degenerate cell " + std::to_string(t) +
                              " (zero volume)");
      mesh.volumes_[static_cast<std::size_t>(t)] = vol;
    }
    return mesh;
  }

  int dim() const { return dim_; }
  int vertex_count() const { return static_cast<int>(coords_.size()) / dim_; }

  int count(int k) const {
    check_range(k, 0, dim_);
    return static_cast<int>(simplices_[static_cast<std::size_t>(k)].size()) / (k + 1);
  }

  std::span<const int> simplex(int k, int i) const {
    check_range(k, 0, dim_);
    const auto& flat = simplices_[static_cast<std::size_t>(k)];
    std::size_t arity = static_cast<std::size_t>(k) + 1;
    return {flat.data() + arity * static_cast<std::size_t>(i), arity};
  }

  std::span<const double> vertex(int v) const {
    return {coords_.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }

  double volume(int cell) const { return volumes_[static_cast<std::size_t>(cell)]; }
  const std::vector<double>& volumes() const { return volumes_; }

  /// Index of the k-simplex with the given ascending vertex tuple, -1 if absent.
  int find_simplex(int k, std::span<const int> tuple) const {
    check_range(k, 0, dim_);
    const auto& flat = simplices_[static_cast<std::size_t>(k)];
    std::size_t arity = static_cast<std::size_t>(k) + 1;
    int lo = 0, hi = count(k) - 1;
    while (lo <= hi) {
      int mid = lo + (hi - lo) / 2;
      const int* cand = flat.data() + arity * static_cast<std::size_t>(mid);
      int cmp = 0;
      for (std::size_t j = 0; j < arity; ++j) {
        if (cand[j] != tuple[j]) {
          cmp = cand[j] < tuple[j] ? -1 : 1;
          break;
        }
      }
      if (cmp == 0) return mid;
      if (cmp < 0)
        lo = mid + 1;
      else
        hi = mid - 1;
    }
    return -1;
  }

  int euler_characteristic() const {
    int chi = 0;
    for (int k = 0; k <= dim_; ++k) chi += (k % 2 == 0 ? 1 : -1) * count(k);
    return chi;
  }

private:
  static void enumerate_subsets(const std::vector<int>& tuple, int want,
                                std::vector<int>& sel, int depth, int start,
                                std::vector<std::vector<int>>& out) {
    if (depth == want) {
      out.push_back(sel);
      return;
    }
    for (int i = start; i <= static_cast<int>(tuple.size()) - (want - depth); ++i) {
      sel[static_cast<std::size_t>(depth)] = tuple[static_cast<std::size_t>(i)];
      enumerate_subsets(tuple, want, sel, depth + 1, i + 1, out);
    }
  }

  static void check_range(int k, int lo, int hi) {
    if (k < lo || k > hi)
      throw InvalidArgument("mesh: simplex dimension " + std::to_string(k) +
                            " out of range");
  }

  double compute_volume(std::span<const int> cell) const {
    // |det[x_1 - x_0, ..., x_n - x_0]| / n!
    auto x0 = vertex(cell[0]);
    if (dim_ == 2) {
      auto a = vertex(cell[1]);
      auto b = vertex(cell[2]);
      double d = (a[0] - x0[0]) * (b[1] - x0[1]) - (a[1] - x0[1]) * (b[0] - x0[0]);
      return std::abs(d) / 2.0;
    }
    auto a = vertex(cell[1]);
    auto b = vertex(cell[2]);
    auto c = vertex(cell[3]);
    std::array<double, 3> u = {a[0] - x0[0], a[1] - x0[1], a[2] - x0[2]};
    std::array<double, 3> v = {b[0] - x0[0], b[1] - x0[1], b[2] - x0[2]};
    std::array<double, 3> w = {c[0] - x0[0], c[1] - x0[1], c[2] - x0[2]};
    double d = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
               u[2] * (v[0] * w[1] - v[1] * w[0]);
    return std::abs(d) / 6.0;
  }

  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<std::vector<int>> simplices_;  // per k, flat (k+1)-tuples
  std::vector<double> volumes_;
};

/// Uniform triangulation of the unit square: N x N cells, each split
/// along its lower-left to upper-right diagonal.
inline SimplicialMesh generate_structured_square(int n_cells_per_side) {
  int n = n_cells_per_side;
  if (n < 1) throw InvalidArgument("generate_structured_square: N must be >= 1");
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>((n + 1) * (n + 1)) * 2);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      coords.push_back(static_cast<double>(i) / n);
      coords.push_back(static_cast<double>(j) / n);
    }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j);
      int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v01, v11});
    }
  return SimplicialMesh::complete_from_cells(2, std::move(coords), std::move(cells));
}

/// Freudenthal/Kuhn triangulation of the unit cube: six tetrahedra per
/// unit cell, all sharing the cell's main diagonal.
inline SimplicialMesh generate_structured_cube(int n_cells_per_side) {
  int n = n_cells_per_side;
  if (n < 1) throw InvalidArgument("generate_structured_cube: N must be >= 1");
  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>((n + 1) * (n + 1) * (n + 1)) * 3);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        coords.push_back(static_cast<double>(i) / n);
        coords.push_back(static_cast<double>(j) / n);
        coords.push_back(static_cast<double>(k) / n);
      }
  auto vid = [n](int i, int j, int k) { return (k * (n + 1) + j) * (n + 1) + i; };
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                               {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(6 * n * n * n));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> at = {i, j, k};
          std::vector<int> tet;
          tet.push_back(vid(at[0], at[1], at[2]));
          for (int step = 0; step < 3; ++step) {
            at[static_cast<std::size_t>(p[step])] += 1;
            tet.push_back(vid(at[0], at[1], at[2]));
          }
          cells.push_back(std::move(tet));
        }
  return SimplicialMesh::complete_from_cells(3, std::move(coords), std::move(cells));
}

/// Signed incidence matrix of shape |Delta_{k+1}| x |Delta_k|: entry
/// (sigma, tau) = (-1)^i when tau is sigma with its i-th vertex removed.
/// Every row has exactly k+2 nonzeros and D_{k+1} D_k = 0 exactly.
inline SparseMatrix signed_incidence(const SimplicialMesh& mesh, int k) {
  if (k < 0 || k >= mesh.dim())
    throw InvalidArgument("signed_incidence: k out of range");
  int rows = mesh.count(k + 1);
  int cols = mesh.count(k);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(rows) * (static_cast<std::size_t>(k) + 2));
  std::vector<int> face(static_cast<std::size_t>(k) + 1);
  for (int s = 0; s < rows; ++s) {
    auto tuple = mesh.simplex(k + 1, s);
    for (int omit = 0; omit <= k + 1; ++omit) {
      std::size_t w = 0;
      for (int j = 0; j <= k + 1; ++j)
        if (j != omit) face[w++] = tuple[static_cast<std::size_t>(j)];
      int idx = mesh.find_simplex(k, face);
      if (idx < 0) throw InvalidArgument("signed_incidence: face closure violated");
      trip.push_back({s, idx, omit % 2 == 0 ? 1.0 : -1.0});
    }
  }
  return SparseMatrix(rows, cols, std::move(trip));
}

/// Arithmetic mean over cells of the maximal pairwise vertex distance.
inline double mean_diameter(const SimplicialMesh& mesh) {
  int n = mesh.dim();
  double total = 0.0;
  int nc = mesh.count(n);
  for (int t = 0; t < nc; ++t) {
    auto cell = mesh.simplex(n, t);
    double diam = 0.0;
    for (std::size_t a = 0; a < cell.size(); ++a)
      for (std::size_t b = a + 1; b < cell.size(); ++b) {
        auto xa = mesh.vertex(cell[a]);
        auto xb = mesh.vertex(cell[b]);
        double d2 = 0.0;
        for (int c = 0; c < n; ++c) d2 += (xa[c] - xb[c]) * (xa[c] - xb[c]);
        diam = std::max(diam, std::sqrt(d2));
      }
    total += diam;
  }
  return total / nc;
}

// ---------------------------------------------------------------------------
// ASCII mesh exchange format:
//   dim n
//   vertices V
//   <V lines of n floats>
//   cells C
//   <C lines of n+1 0-based vertex indices>
// Lower-dimensional simplices are always rederived, never stored.

inline void write_mesh(const SimplicialMesh& mesh, std::ostream& os) {
  int n = mesh.dim();
  os << "dim " << n << "\n";
  os << "vertices " << mesh.vertex_count() << "\n";
  char buf[96];
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    auto x = mesh.vertex(v);
    std::string line;
    for (int c = 0; c < n; ++c) {
      std::snprintf(buf, sizeof(buf), c ? " %.17g" : "%.17g", x[c]);
      line += buf;
    }
    os << line << "\n";
  }
  os << "cells " << mesh.count(n) << "\n";
  for (int t = 0; t < mesh.count(n); ++t) {
    auto cell = mesh.simplex(n, t);
    for (std::size_t j = 0; j < cell.size(); ++j) os << (j ? " " : "") << cell[j];
    os << "\n";
  }
}

inline SimplicialMesh read_mesh(std::istream& is) {
  auto expect = [&is](const std::string& keyword) {
    std::string word;
    if (!(is >> word) || word != keyword)
      throw InvalidArgument("mesh file: expected '" + keyword + "'");
  };
  expect("dim");
  int dim = 0;
  if (!(is >> dim)) throw InvalidArgument("mesh file: missing dimension");
  expect("vertices");
  int nv = 0;
  if (!(is >> nv) || nv < 0) throw InvalidArgument("mesh file: bad vertex count");
  std::vector<double> coords(static_cast<std::size_t>(nv) * static_cast<std::size_t>(dim));
  for (double& c : coords)
    if (!(is >> c)) throw InvalidArgument("mesh file: truncated vertex data");
  expect("cells");
  int nc = 0;
  if (!(is >> nc) || nc < 0) throw InvalidArgument("mesh file: bad cell count");
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nc),
                                      std::vector<int>(static_cast<std::size_t>(dim) + 1));
  for (auto& cell : cells)
    for (int& v : cell)
      if (!(is >> v)) throw InvalidArgument("mesh file: truncated cell data");
  return SimplicialMesh::complete_from_cells(dim, std::move(coords), std::move(cells));
}

}  // namespace hodgetree

#endif
