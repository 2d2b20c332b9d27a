// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_TREES_HPP
#define HODGETREE_TREES_HPP

#include <deque>
#include <ostream>

#include "hodgetree/solvers.hpp"
#include "hodgetree/whitney.hpp"

namespace hodgetree {

/// Rooted spanning tree over a graph whose vertices are mesh entities.
/// For the dual tree the vertex set is cells plus the "outside" vertex
/// nu0, which is encoded as parent index -1 wherever it occurs.
struct SpanningTree {
  int root = -1;                 // graph vertex of the root (-1 when the root is nu0)
  std::vector<int> parent;       // per vertex; -1 at the root
  std::vector<int> parent_edge;  // mesh index of the edge/facet toward the parent; -1 at root
  std::vector<int> bfs_order;    // visit order, root first
  std::vector<int> depth;

  int edge_count() const {
    int c = 0;
    for (int e : parent_edge)
      if (e >= 0) ++c;
    return c;
  }

  int max_depth() const {
    int d = 0;
    for (int v : depth) d = std::max(d, v);
    return d;
  }

  IndexSet tree_edges() const {
    std::vector<int> e;
    e.reserve(parent_edge.size());
    for (int x : parent_edge)
      if (x >= 0) e.push_back(x);
    return IndexSet::from_unsorted(std::move(e));
  }
};

/// BFS spanning tree of the dual graph: one vertex per cell plus nu0 for
/// the outside, one edge per facet (boundary facets connect to nu0).
/// Rooted at nu0; neighbors are visited in ascending facet index.
inline SpanningTree build_dual_tree(const SimplicialMesh& mesh) {
  int n = mesh.dim();
  int nc = mesh.count(n);
  int nf = mesh.count(n - 1);

  // facet -> adjacent cells
  std::vector<std::array<int, 2>> facet_cells(static_cast<std::size_t>(nf), {-1, -1});
  std::vector<int> face(static_cast<std::size_t>(n));
  for (int t = 0; t < nc; ++t) {
    auto cell = mesh.simplex(n, t);
    for (int omit = 0; omit <= n; ++omit) {
      std::size_t w = 0;
      for (int j = 0; j <= n; ++j)
        if (j != omit) face[w++] = cell[static_cast<std::size_t>(j)];
      int f = mesh.find_simplex(n - 1, face);
      auto& fc = facet_cells[static_cast<std::size_t>(f)];
      if (fc[0] < 0)
        fc[0] = t;
      else if (fc[1] < 0)
        fc[1] = t;
      else
        throw InvalidArgument("build_dual_tree: facet shared by more than two cells");
    }
  }

  // per dual vertex, incident facets ascending; slot nc stands for nu0
  std::vector<std::vector<int>> incident(static_cast<std::size_t>(nc) + 1);
  for (int f = 0; f < nf; ++f) {
    auto& fc = facet_cells[static_cast<std::size_t>(f)];
    incident[static_cast<std::size_t>(fc[0])].push_back(f);
    incident[fc[1] >= 0 ? static_cast<std::size_t>(fc[1])
                        : static_cast<std::size_t>(nc)]
        .push_back(f);
  }

  SpanningTree tree;
  tree.root = -1;  // nu0
  tree.parent.assign(static_cast<std::size_t>(nc), -2);
  tree.parent_edge.assign(static_cast<std::size_t>(nc), -2);
  tree.depth.assign(static_cast<std::size_t>(nc), -1);

  std::vector<char> visited(static_cast<std::size_t>(nc) + 1, 0);
  visited[static_cast<std::size_t>(nc)] = 1;
  std::deque<int> queue = {nc};
  std::vector<int> depth_of(static_cast<std::size_t>(nc) + 1, 0);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int f : incident[static_cast<std::size_t>(u)]) {
      auto& fc = facet_cells[static_cast<std::size_t>(f)];
      int other = fc[0] == u ? fc[1] : fc[0];
      if (u == nc) other = fc[0];  // boundary facet seen from nu0
      if (other < 0 || visited[static_cast<std::size_t>(other)]) continue;
      visited[static_cast<std::size_t>(other)] = 1;
      tree.parent[static_cast<std::size_t>(other)] = u == nc ? -1 : u;
      tree.parent_edge[static_cast<std::size_t>(other)] = f;
      depth_of[static_cast<std::size_t>(other)] = depth_of[static_cast<std::size_t>(u)] + 1;
      tree.depth[static_cast<std::size_t>(other)] = depth_of[static_cast<std::size_t>(other)];
      tree.bfs_order.push_back(other);
      queue.push_back(other);
    }
  }
  for (int t = 0; t < nc; ++t)
    if (!visited[static_cast<std::size_t>(t)])
      throw InvalidArgument("build_dual_tree: dual graph is disconnected");
  return tree;
}

namespace detail {

/// BFS spanning tree over the vertex graph restricted to the given edge
/// set (all edges when the set is empty... the full graph case passes
/// every edge). Root: node nearest the bounding-box center, lowest
/// index on ties; neighbors visited in ascending edge index.
inline SpanningTree node_tree_bfs(const SimplicialMesh& mesh,
                                  const std::vector<int>& edges) {
  int nv = mesh.vertex_count();
  int n = mesh.dim();

  std::array<double, 3> lo = {0, 0, 0}, hi = {0, 0, 0};
  for (int c = 0; c < n; ++c) {
    lo[static_cast<std::size_t>(c)] = mesh.vertex(0)[c];
    hi[static_cast<std::size_t>(c)] = mesh.vertex(0)[c];
  }
  for (int v = 1; v < nv; ++v) {
    auto x = mesh.vertex(v);
    for (int c = 0; c < n; ++c) {
      lo[static_cast<std::size_t>(c)] = std::min(lo[static_cast<std::size_t>(c)], x[c]);
      hi[static_cast<std::size_t>(c)] = std::max(hi[static_cast<std::size_t>(c)], x[c]);
    }
  }
  int root = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < nv; ++v) {
    auto x = mesh.vertex(v);
    double d2 = 0.0;
    for (int c = 0; c < n; ++c) {
      double mid = 0.5 * (lo[static_cast<std::size_t>(c)] + hi[static_cast<std::size_t>(c)]);
      d2 += (x[c] - mid) * (x[c] - mid);
    }
    if (d2 < best - 1e-15) {
      best = d2;
      root = v;
    }
  }

  std::vector<std::vector<int>> incident(static_cast<std::size_t>(nv));
  for (int e : edges) {
    auto tuple = mesh.simplex(1, e);
    incident[static_cast<std::size_t>(tuple[0])].push_back(e);
    incident[static_cast<std::size_t>(tuple[1])].push_back(e);
  }

  SpanningTree tree;
  tree.root = root;
  tree.parent.assign(static_cast<std::size_t>(nv), -2);
  tree.parent_edge.assign(static_cast<std::size_t>(nv), -2);
  tree.depth.assign(static_cast<std::size_t>(nv), -1);
  tree.parent[static_cast<std::size_t>(root)] = -1;
  tree.parent_edge[static_cast<std::size_t>(root)] = -1;
  tree.depth[static_cast<std::size_t>(root)] = 0;
  tree.bfs_order.push_back(root);

  std::vector<char> visited(static_cast<std::size_t>(nv), 0);
  visited[static_cast<std::size_t>(root)] = 1;
  std::deque<int> queue = {root};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int e : incident[static_cast<std::size_t>(u)]) {
      auto tuple = mesh.simplex(1, e);
      int w = tuple[0] == u ? tuple[1] : tuple[0];
      if (visited[static_cast<std::size_t>(w)]) continue;
      visited[static_cast<std::size_t>(w)] = 1;
      tree.parent[static_cast<std::size_t>(w)] = u;
      tree.parent_edge[static_cast<std::size_t>(w)] = e;
      tree.depth[static_cast<std::size_t>(w)] = tree.depth[static_cast<std::size_t>(u)] + 1;
      tree.bfs_order.push_back(w);
      queue.push_back(w);
    }
  }
  for (int v = 0; v < nv; ++v)
    if (!visited[static_cast<std::size_t>(v)]) {
      tree.parent.assign(1, -3);  // marker: not spanning
      tree.bfs_order.clear();
      return tree;
    }
  return tree;
}

}  // namespace detail

/// BFS spanning tree over the full vertex graph (the 3D primal tree;
/// in 2D the primal tree is instead derived from the dual complement
/// inside dof_partition).
inline SpanningTree build_node_tree(const SimplicialMesh& mesh) {
  std::vector<int> all(static_cast<std::size_t>(mesh.count(1)));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  SpanningTree t = detail::node_tree_bfs(mesh, all);
  if (t.bfs_order.empty())
    throw InvalidArgument("build_node_tree: vertex graph is disconnected");
  return t;
}

/// Per-degree DOF partition of the Whitney spaces induced by the two
/// spanning trees: ring_1 holds the primal tree edges, bar_{n-1} the
/// dual tree facets, bar_0 is all nodes (zero-mean quotient tracked via
/// the distinguished root) and bar_n is empty.
struct TreePartition {
  SpanningTree node_tree;
  SpanningTree dual_tree;
  std::vector<IndexSet> bar;   // per k = 0..n
  std::vector<IndexSet> ring;  // per k = 0..n
  int root_node = -1;

  /// Quotient-aware dimension of bar_k (k = 0 counts |Delta_0| - 1).
  int bar_dim(int k) const {
    if (k == 0) return bar[0].size() - 1;
    return bar[static_cast<std::size_t>(k)].size();
  }
  int ring_dim(int k) const { return ring[static_cast<std::size_t>(k)].size(); }

  /// Column index set of the Poincare block B_k: bar_{k-1}, with the
  /// root node removed when k - 1 = 0.
  IndexSet bar_columns(int k) const {
    if (k == 1) {
      std::vector<int> cols;
      cols.reserve(bar[0].indices().size() - 1);
      for (int v : bar[0].indices())
        if (v != root_node) cols.push_back(v);
      return IndexSet(std::move(cols));
    }
    return bar[static_cast<std::size_t>(k) - 1];
  }
};

/// Build both trees and the induced partition. In 2D the dual tree is
/// built first and the primal edge set is its complement, which is then
/// verified to span the nodes (planar duality); failure is a hard error.
inline TreePartition dof_partition(const SimplicialMesh& mesh) {
  int n = mesh.dim();
  TreePartition part;
  part.dual_tree = build_dual_tree(mesh);
  IndexSet dual_facets = part.dual_tree.tree_edges();

  if (n == 2) {
    IndexSet primal_edges = dual_facets.complement(mesh.count(1));
    part.node_tree = detail::node_tree_bfs(mesh, primal_edges.indices());
    if (part.node_tree.bfs_order.empty() ||
        primal_edges.size() != mesh.vertex_count() - 1)
      throw InvalidArgument(
          "dof_partition: complement of the dual tree is not a node spanning tree");
  } else {
    part.node_tree = build_node_tree(mesh);
  }
  part.root_node = part.node_tree.root;

  IndexSet primal_edges = part.node_tree.tree_edges();
  part.bar.resize(static_cast<std::size_t>(n) + 1);
  part.ring.resize(static_cast<std::size_t>(n) + 1);

  part.bar[0] = IndexSet::full(mesh.vertex_count());
  part.ring[0] = IndexSet();
  part.ring[1] = primal_edges;
  part.bar[1] = primal_edges.complement(mesh.count(1));
  if (n == 3) {
    part.bar[2] = dual_facets;
    part.ring[2] = dual_facets.complement(mesh.count(2));
  }
  part.bar[static_cast<std::size_t>(n)] = IndexSet();
  part.ring[static_cast<std::size_t>(n)] = IndexSet::full(mesh.count(n));

  if (n == 2 && part.bar[1].indices() != dual_facets.indices())
    throw InvalidArgument("dof_partition: 2D bar_1 must coincide with the dual tree facets");

  for (int k = 0; k < n; ++k)
    if (part.bar_dim(k) != part.ring_dim(k + 1))
      throw InvalidArgument("dof_partition: dimension identity bar_k = ring_{k+1} violated");
  return part;
}

/// The block of D_{k-1} with rows ring_k and columns bar_{k-1} whose
/// invertibility makes the decomposition p-permitting.
inline SparseMatrix poincare_block(const FormComplex& complex, const TreePartition& part,
                                   int k) {
  if (k < 1 || k > complex.dim) throw InvalidArgument("poincare_block: k out of range");
  return submatrix(complex.d(k - 1), part.ring[static_cast<std::size_t>(k)],
                   part.bar_columns(k));
}

struct PermittingBlockReport {
  int k = 0;
  int size = 0;
  bool triangular = false;
  double invertibility_margin = 0.0;  // min |pivot| (triangular) or sigma_min estimate
  bool ok = false;
};

struct PermittingReport {
  std::vector<PermittingBlockReport> blocks;
  bool ok = true;
};

namespace detail {

/// Greedy peel of singleton rows; succeeds exactly when some row/column
/// pairing makes the matrix triangular. Returns (row order, col order)
/// or empty vectors on failure.
inline std::pair<std::vector<int>, std::vector<int>> triangular_peel(const SparseMatrix& b) {
  int n = b.rows();
  std::vector<int> remaining(static_cast<std::size_t>(n));  // per row, #unresolved columns
  std::vector<char> col_done(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> col_rows(static_cast<std::size_t>(n));
  std::deque<int> singles;
  for (int r = 0; r < n; ++r) {
    auto cols = b.row_columns(r);
    remaining[static_cast<std::size_t>(r)] = static_cast<int>(cols.size());
    for (int c : cols) col_rows[static_cast<std::size_t>(c)].push_back(r);
    if (cols.size() == 1) singles.push_back(r);
  }
  std::vector<int> row_order, col_order;
  std::vector<char> row_done(static_cast<std::size_t>(n), 0);
  row_order.reserve(static_cast<std::size_t>(n));
  col_order.reserve(static_cast<std::size_t>(n));
  while (!singles.empty()) {
    int r = singles.front();
    singles.pop_front();
    if (row_done[static_cast<std::size_t>(r)]) continue;
    int pivot_col = -1;
    for (int c : b.row_columns(r))
      if (!col_done[static_cast<std::size_t>(c)]) pivot_col = c;
    if (pivot_col < 0) return {{}, {}};  // empty row: structurally singular
    row_done[static_cast<std::size_t>(r)] = 1;
    col_done[static_cast<std::size_t>(pivot_col)] = 1;
    row_order.push_back(r);
    col_order.push_back(pivot_col);
    for (int rr : col_rows[static_cast<std::size_t>(pivot_col)]) {
      if (row_done[static_cast<std::size_t>(rr)]) continue;
      if (--remaining[static_cast<std::size_t>(rr)] == 1) singles.push_back(rr);
    }
  }
  if (static_cast<int>(row_order.size()) != n) return {{}, {}};
  return {row_order, col_order};
}

}  // namespace detail

/// Check that every block B_k is square and invertible; reports the
/// minimum absolute pivot for triangular blocks and a smallest-singular-
/// value estimate for the general (LU) blocks.
inline PermittingReport verify_p_permitting(const FormComplex& complex,
                                            const TreePartition& part) {
  PermittingReport report;
  for (int k = 1; k <= complex.dim; ++k) {
    PermittingBlockReport blk;
    blk.k = k;
    SparseMatrix b = poincare_block(complex, part, k);
    if (b.rows() != b.cols())
      throw InvalidArgument("verify_p_permitting: block B_" + std::to_string(k) +
                            " is not square (" + std::to_string(b.rows()) + " x " +
                            std::to_string(b.cols()) + ")");
    blk.size = b.rows();
    auto [row_order, col_order] = detail::triangular_peel(b);
    if (!row_order.empty()) {
      blk.triangular = true;
      double min_pivot = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < row_order.size(); ++t) {
        double p = b.coeff(row_order[t], col_order[t]);
        min_pivot = std::min(min_pivot, std::abs(p));
      }
      blk.invertibility_margin = b.rows() > 0 ? min_pivot : 1.0;
      blk.ok = blk.invertibility_margin > 0.0;
    } else {
      // general block: factorize and estimate sigma_min by a few inverse
      // power iterations on B^T B
      LuFactorization lu(b);  // throws SingularMatrixError when singular
      Vector x = random_vector(static_cast<std::size_t>(b.rows()), 4242);
      double sigma = 0.0;
      for (int it = 0; it < 20; ++it) {
        double nx = norm2(x);
        scale(1.0 / nx, x);
        Vector y = lu.solve_transpose(lu.solve(x));  // (B^T B)^{-1} x
        double ny = norm2(y);
        sigma = 1.0 / std::sqrt(ny);
        x = y;
      }
      blk.invertibility_margin = sigma;
      blk.ok = true;
    }
    if (!blk.ok) report.ok = false;
    report.blocks.push_back(blk);
  }
  return report;
}

/// ASCII partition export consumed by the CLI --dump-trees flag: per-k
/// bar/ring index sets plus parent arrays of both trees.
inline void write_partition(const TreePartition& part, int dim, std::ostream& os) {
  os << "partition dim " << dim << "\n";
  for (int k = 0; k <= dim; ++k) {
    const IndexSet& b = part.bar[static_cast<std::size_t>(k)];
    const IndexSet& r = part.ring[static_cast<std::size_t>(k)];
    os << "k " << k << "\n";
    os << "bar " << b.size();
    for (int i : b.indices()) os << " " << i;
    os << "\n";
    os << "ring " << r.size();
    for (int i : r.indices()) os << " " << i;
    os << "\n";
  }
  os << "node_tree root " << part.node_tree.root << "\n";
  os << "node_parents";
  for (int p : part.node_tree.parent) os << " " << p;
  os << "\nnode_parent_edges";
  for (int e : part.node_tree.parent_edge) os << " " << e;
  os << "\ndual_tree root nu0\n";
  os << "dual_parents";
  for (int p : part.dual_tree.parent) os << " " << p;
  os << "\ndual_parent_facets";
  for (int e : part.dual_tree.parent_edge) os << " " << e;
  os << "\n";
}

}  // namespace hodgetree

#endif
