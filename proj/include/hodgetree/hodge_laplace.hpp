// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_HODGE_LAPLACE_HPP
#define HODGETREE_HODGE_LAPLACE_HPP

#include <chrono>
#include <optional>
#include <string>

#include "hodgetree/poincare.hpp"

namespace hodgetree {

/// Discrete mixed Hodge-Laplace problem on P Lambda^{k-1} x P Lambda^k:
///   (v, v') - (u, dv')  = <g, v'>
///   (dv, u') + (du, du') = <f, u'>
struct HodgeLaplaceProblem {
  HodgeLaplaceProblem(const PoincareOperator& op, int k, Vector g, Vector f)
      : op(&op), k(k), g(std::move(g)), f(std::move(f)) {
    const FormComplex& c = op.complex();
    if (k < 1 || k > c.dim) throw InvalidArgument("HodgeLaplaceProblem: k out of range");
    if (static_cast<int>(this->g.size()) != c.dof_count(k - 1) ||
        static_cast<int>(this->f.size()) != c.dof_count(k))
      throw InvalidArgument("HodgeLaplaceProblem: functional size mismatch");
  }

  const PoincareOperator* op;
  int k;
  Vector g;  // dual vector over P Lambda^{k-1}
  Vector f;  // dual vector over P Lambda^k
};

struct SubproblemRecord {
  std::string name;
  int dofs = 0;
  double seconds = 0.0;
  int iterations = 0;  // 0 for direct backends
};

struct HodgeLaplaceSolution {
  Vector v;
  Vector u;
  std::vector<SubproblemRecord> subproblems;
  int total_dofs = 0;
  double total_seconds = 0.0;
  double residual_eq1 = 0.0;
  double residual_eq2 = 0.0;
};

// direct = symmetric LDLT on the SPD blocks; direct_lu = general sparse
// LU everywhere (the backend-matched setting for timing comparisons)
enum class SolveBackend { automatic, direct, direct_lu, iterative };

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// SPD solver on a bar-restricted stiffness block; Lambda^0 blocks pin
/// the tree root. Input/output are full-length vectors.
class BarProblem {
public:
  BarProblem(const FormComplex& complex, const TreePartition& part, int k,
             SolveBackend backend, double sub_tol)
      : n_full_(complex.dof_count(k)), sub_tol_(sub_tol) {
    if (k == 0) {
      std::vector<int> keep;
      keep.reserve(static_cast<std::size_t>(n_full_) - 1);
      for (int v = 0; v < n_full_; ++v)
        if (v != part.root_node) keep.push_back(v);
      idx_ = IndexSet(std::move(keep));
    } else {
      idx_ = part.bar[static_cast<std::size_t>(k)];
    }
    matrix_ = submatrix(complex.stiffness(k), idx_, idx_);
    direct_ = backend != SolveBackend::iterative &&
              (backend != SolveBackend::automatic || matrix_.rows() < 50000);
    if (direct_ && matrix_.rows() > 0) {
      if (backend == SolveBackend::direct_lu)
        lu_factor_ = std::make_shared<LuFactorization>(matrix_);
      else
        factor_ = std::make_shared<SpdFactorization>(matrix_);
    }
  }

  int dofs() const { return idx_.size(); }

  /// Solve (d ubar, d ubar') = <rhs, ubar'> for ubar' in the bar space;
  /// rhs is a full-length dual vector, the result a full-length
  /// coefficient vector supported on the bar set.
  Vector solve(const Vector& rhs, int* iterations = nullptr) const {
    Vector packed = idx_.gather(rhs);
    Vector x;
    if (direct_) {
      x = lu_factor_ ? lu_factor_->solve(packed)
                     : (factor_ ? factor_->solve(packed) : Vector());
      if (iterations) *iterations = 0;
    } else {
      CgResult cg = conjugate_gradient(make_apply(matrix_), packed, sub_tol_,
                                       10 * matrix_.rows() + 100);
      if (!cg.converged)
        throw ConvergenceError("BarProblem: CG did not converge", cg.iterations);
      x = std::move(cg.x);
      if (iterations) *iterations = cg.iterations;
    }
    return idx_.scatter(x, n_full_);
  }

private:
  int n_full_;
  double sub_tol_;
  IndexSet idx_;
  SparseMatrix matrix_;
  bool direct_ = true;
  std::shared_ptr<SpdFactorization> factor_;
  std::shared_ptr<LuFactorization> lu_factor_;
};

// dimension of P Lambda^k with the zero-mean quotient at k = 0
inline int quotient_dim(const FormComplex& c, int k) {
  return k == 0 ? c.dof_count(0) - 1 : c.dof_count(k);
}

inline void compute_residuals(const HodgeLaplaceProblem& p, HodgeLaplaceSolution& sol) {
  const FormComplex& c = p.op->complex();
  int k = p.k;
  // r1 = M_{k-1} v - D^T M_k u - g
  Vector r1 = c.m(k - 1).apply(sol.v);
  Vector dtmu = c.d(k - 1).apply_transpose(c.m(k).apply(sol.u));
  axpy(-1.0, dtmu, r1);
  axpy(-1.0, p.g, r1);
  // r2 = M_k D v + A_k u - f
  Vector r2 = c.m(k).apply(c.d(k - 1).apply(sol.v));
  if (k < c.dim) {
    Vector du = c.d(k).apply(sol.u);
    Vector aku = c.d(k).apply_transpose(c.m(k + 1).apply(du));
    axpy(1.0, aku, r2);
  }
  axpy(-1.0, p.f, r2);
  double denom = std::max(std::sqrt(dot(p.g, p.g) + dot(p.f, p.f)), 1e-300);
  sol.residual_eq1 = norm2(r1) / denom;
  sol.residual_eq2 = norm2(r2) / denom;
}

/// Shift v's constant so the first equation holds against constant test
/// functions: (v, 1) = <g, 1>. Only meaningful when v lives on Lambda^0.
inline void pin_mean_to_data(const PoincareOperator& op, const Vector& g, Vector& v) {
  double gsum = 0.0;
  for (double x : g) gsum += x;
  double c = (gsum - dot(op.lumped_mass(), v)) / op.total_mass();
  for (double& x : v) x += c;
}

}  // namespace detail

/// The four-step sequential solver: four bar-restricted SPD problems in
/// the decomposition basis, assembled back via v = vbar + d wbar,
/// u = ubar + d vbar_u.
inline HodgeLaplaceSolution solve_four_step(const HodgeLaplaceProblem& p,
                                            double sub_tol = 1e-12,
                                            SolveBackend backend = SolveBackend::automatic) {
  const FormComplex& c = p.op->complex();
  const TreePartition& part = p.op->partition();
  int k = p.k;
  int n = c.dim;
  HodgeLaplaceSolution sol;
  sol.total_dofs = detail::quotient_dim(c, k - 1) + c.dof_count(k);
  auto t_all = std::chrono::steady_clock::now();

  // prob 1: (d vbar, d vbar') = <f, d vbar'> on bar_{k-1}
  auto t0 = std::chrono::steady_clock::now();
  detail::BarProblem prob1(c, part, k - 1, backend, sub_tol);
  int iters = 0;
  Vector vbar = prob1.solve(c.d(k - 1).apply_transpose(p.f), &iters);
  // when v lives on Lambda^0 its constant is fixed by the data, (v, 1) =
  // <g, 1>; settle it now so prob 4's functional annihilates constants
  if (k == 1) detail::pin_mean_to_data(*p.op, p.g, vbar);
  sol.subproblems.push_back({"prob1", prob1.dofs(), detail::seconds_since(t0), iters});

  // prob 2: (d wbar, d wbar') = <g, d wbar'> - (vbar, d wbar') on bar_{k-2}
  Vector wbar;
  if (k >= 2) {
    t0 = std::chrono::steady_clock::now();
    detail::BarProblem prob2(c, part, k - 2, backend, sub_tol);
    Vector rhs = p.g;
    axpy(-1.0, c.m(k - 1).apply(vbar), rhs);
    wbar = prob2.solve(c.d(k - 2).apply_transpose(rhs), &iters);
    sol.subproblems.push_back({"prob2", prob2.dofs(), detail::seconds_since(t0), iters});
  } else {
    sol.subproblems.push_back({"prob2", 0, 0.0, 0});
  }

  // prob 3: (d ubar, d ubar') = <f, ubar'> - (d vbar, ubar') on bar_k
  Vector ubar(static_cast<std::size_t>(c.dof_count(k)), 0.0);
  if (k < n) {
    t0 = std::chrono::steady_clock::now();
    detail::BarProblem prob3(c, part, k, backend, sub_tol);
    Vector rhs = p.f;
    axpy(-1.0, c.m(k).apply(c.d(k - 1).apply(vbar)), rhs);
    ubar = prob3.solve(rhs, &iters);
    sol.subproblems.push_back({"prob3", prob3.dofs(), detail::seconds_since(t0), iters});
  } else {
    sol.subproblems.push_back({"prob3", 0, 0.0, 0});
  }

  // prob 4: (d vbar_u, d vbar') = (vbar + d wbar, vbar') - (ubar, d vbar') - <g, vbar'>
  t0 = std::chrono::steady_clock::now();
  detail::BarProblem prob4(c, part, k - 1, backend, sub_tol);
  Vector vfull = vbar;
  if (k >= 2) axpy(1.0, c.d(k - 2).apply(wbar), vfull);
  Vector rhs4 = c.m(k - 1).apply(vfull);
  axpy(-1.0, c.d(k - 1).apply_transpose(c.m(k).apply(ubar)), rhs4);
  axpy(-1.0, p.g, rhs4);
  Vector vbar_u = prob4.solve(rhs4, &iters);
  sol.subproblems.push_back({"prob4", prob4.dofs(), detail::seconds_since(t0), iters});

  sol.v = std::move(vfull);
  sol.u = std::move(ubar);
  axpy(1.0, c.d(k - 1).apply(vbar_u), sol.u);

  sol.total_seconds = detail::seconds_since(t_all);
  detail::compute_residuals(p, sol);
  return sol;
}

/// The k = n specialization: steps 1 and 3 are single passes over the
/// dual tree (triangular solves against B_n and its transpose) and only
/// the middle problem is a genuine SPD solve.
inline HodgeLaplaceSolution solve_k_equals_n(const HodgeLaplaceProblem& p,
                                             double sub_tol = 1e-12,
                                             SolveBackend backend = SolveBackend::automatic) {
  const FormComplex& c = p.op->complex();
  const TreePartition& part = p.op->partition();
  int n = c.dim;
  if (p.k != n) throw InvalidArgument("solve_k_equals_n: requires k = n");
  const detail::BlockSolver& bn = p.op->block(n);
  HodgeLaplaceSolution sol;
  sol.total_dofs = detail::quotient_dim(c, n - 1) + c.dof_count(n);
  auto t_all = std::chrono::steady_clock::now();

  // step 1: M_n D vbar = f on bar_{n-1}; M_n is diagonal
  auto t0 = std::chrono::steady_clock::now();
  const SimplicialMesh& mesh = *c.mesh;
  Vector rhs1(p.f.size());
  for (std::size_t i = 0; i < rhs1.size(); ++i)
    rhs1[i] = p.f[i] * mesh.volume(static_cast<int>(i));  // M_n^{-1} f
  Vector vbar_packed = bn.solve(rhs1);
  IndexSet bar_cols = part.bar_columns(n);
  Vector vbar = bar_cols.scatter(vbar_packed, c.dof_count(n - 1));
  sol.subproblems.push_back({"prob1", bar_cols.size(), detail::seconds_since(t0), 0});

  // step 2: SPD problem on bar_{n-2}
  t0 = std::chrono::steady_clock::now();
  detail::BarProblem prob2(c, part, n - 2, backend, sub_tol);
  Vector rhs2 = p.g;
  axpy(-1.0, c.m(n - 1).apply(vbar), rhs2);
  int iters = 0;
  Vector wbar = prob2.solve(c.d(n - 2).apply_transpose(rhs2), &iters);
  sol.subproblems.push_back({"prob2", prob2.dofs(), detail::seconds_since(t0), iters});

  // step 3: (u, d vbar') = (vbar + d wbar, vbar') - <g, vbar'>, i.e.
  // B_n^T M_n u = rhs restricted to bar_{n-1}
  t0 = std::chrono::steady_clock::now();
  Vector vfull = vbar;
  axpy(1.0, c.d(n - 2).apply(wbar), vfull);
  Vector rhs3_full = c.m(n - 1).apply(vfull);
  axpy(-1.0, p.g, rhs3_full);
  Vector rhs3 = bar_cols.gather(rhs3_full);
  Vector mnu = bn.solve_transpose(rhs3);
  Vector u(static_cast<std::size_t>(c.dof_count(n)));
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = mnu[i] * mesh.volume(static_cast<int>(i));  // M_n^{-1}
  sol.subproblems.push_back({"prob3", bar_cols.size(), detail::seconds_since(t0), 0});
  sol.subproblems.push_back({"prob4", 0, 0.0, 0});

  sol.v = std::move(vfull);
  sol.u = std::move(u);
  sol.total_seconds = detail::seconds_since(t_all);
  detail::compute_residuals(p, sol);
  return sol;
}

/// Reference solve of the full saddle-point system
///   [[M_{k-1}, E^T], [E, -A_k]] (v, w) = (g, f),  E = M_k D_{k-1},
/// symmetrized through u = -w. Direct LU or unpreconditioned MinRes.
inline HodgeLaplaceSolution solve_monolithic(const HodgeLaplaceProblem& p, double tol = 1e-10,
                                             SolveBackend backend = SolveBackend::automatic) {
  const FormComplex& c = p.op->complex();
  int k = p.k;
  int nv = c.dof_count(k - 1);
  int nu = c.dof_count(k);
  HodgeLaplaceSolution sol;
  sol.total_dofs = detail::quotient_dim(c, k - 1) + nu;
  auto t0 = std::chrono::steady_clock::now();

  SparseMatrix e = c.m(k) * c.d(k - 1);
  std::vector<Triplet> trip;
  auto push_block = [&trip](const SparseMatrix& m, int row0, int col0, double sgn) {
    for (int r = 0; r < m.rows(); ++r) {
      auto cols = m.row_columns(r);
      auto vals = m.row_values(r);
      for (std::size_t j = 0; j < cols.size(); ++j)
        trip.push_back({row0 + r, col0 + cols[j], sgn * vals[j]});
    }
  };
  push_block(c.m(k - 1), 0, 0, 1.0);
  push_block(e.transposed(), 0, nv, 1.0);
  push_block(e, nv, 0, 1.0);
  if (k < c.dim) push_block(c.stiffness(k), nv, nv, -1.0);
  SparseMatrix sys(nv + nu, nv + nu, std::move(trip));

  Vector rhs(static_cast<std::size_t>(nv + nu));
  std::copy(p.g.begin(), p.g.end(), rhs.begin());
  std::copy(p.f.begin(), p.f.end(), rhs.begin() + nv);

  Vector x;
  int iterations = 0;
  bool direct = backend == SolveBackend::direct ||
                (backend == SolveBackend::automatic && sys.rows() < 100000);
  if (direct) {
    x = lu_solve(sys, rhs);
  } else {
    MinresResult mr = minres(sys, rhs, tol, 50 * sys.rows() + 1000);
    if (!mr.converged)
      throw ConvergenceError("solve_monolithic: MinRes did not converge", mr.iterations);
    x = std::move(mr.x);
    iterations = mr.iterations;
  }

  sol.v.assign(x.begin(), x.begin() + nv);
  sol.u.assign(x.begin() + nv, x.end());
  for (double& val : sol.u) val = -val;  // u = -w
  sol.total_seconds = detail::seconds_since(t0);
  sol.subproblems.push_back({"monolithic", sol.total_dofs, sol.total_seconds, iterations});
  detail::compute_residuals(p, sol);
  return sol;
}

struct InexactnessReport {
  double r1_baseline = 0.0, r2_baseline = 0.0;
  double r1_perturb24 = 0.0, r2_perturb24 = 0.0;  // prob-2/prob-4 outputs perturbed
  double r1_perturb1 = 0.0, r2_perturb1 = 0.0;    // prob-1 output perturbed
};

/// Demonstrates that the residual of the second Hodge-Laplace equation
/// depends only on the prob-1/prob-3 components: perturbing the prob-2
/// and prob-4 outputs leaves it unchanged, perturbing prob-1 does not.
inline InexactnessReport inexactness_isolation_check(const HodgeLaplaceProblem& p,
                                                     double epsilon,
                                                     std::uint64_t seed = 99) {
  const FormComplex& c = p.op->complex();
  const TreePartition& part = p.op->partition();
  int k = p.k;
  int n = c.dim;
  InexactnessReport rep;

  // rebuild the four-step pieces so we can splice in perturbations
  detail::BarProblem prob1(c, part, k - 1, SolveBackend::automatic, 1e-12);
  Vector vbar = prob1.solve(c.d(k - 1).apply_transpose(p.f));
  if (k == 1) detail::pin_mean_to_data(*p.op, p.g, vbar);
  Vector wbar;
  if (k >= 2) {
    detail::BarProblem prob2(c, part, k - 2, SolveBackend::automatic, 1e-12);
    Vector rhs = p.g;
    axpy(-1.0, c.m(k - 1).apply(vbar), rhs);
    wbar = prob2.solve(c.d(k - 2).apply_transpose(rhs));
  }
  Vector ubar(static_cast<std::size_t>(c.dof_count(k)), 0.0);
  if (k < n) {
    detail::BarProblem prob3(c, part, k, SolveBackend::automatic, 1e-12);
    Vector rhs = p.f;
    axpy(-1.0, c.m(k).apply(c.d(k - 1).apply(vbar)), rhs);
    ubar = prob3.solve(rhs);
  }
  detail::BarProblem prob4(c, part, k - 1, SolveBackend::automatic, 1e-12);
  auto solve4 = [&](const Vector& vb, const Vector& wb, const Vector& ub) {
    Vector vfull = vb;
    if (k >= 2) axpy(1.0, c.d(k - 2).apply(wb), vfull);
    Vector rhs = c.m(k - 1).apply(vfull);
    axpy(-1.0, c.d(k - 1).apply_transpose(c.m(k).apply(ub)), rhs);
    axpy(-1.0, p.g, rhs);
    return prob4.solve(rhs);
  };
  Vector vbar_u = solve4(vbar, wbar, ubar);

  auto assemble = [&](const Vector& vb, const Vector& wb, const Vector& ub,
                      const Vector& vbu) {
    HodgeLaplaceSolution s;
    s.v = vb;
    if (k >= 2) axpy(1.0, c.d(k - 2).apply(wb), s.v);
    s.u = ub;
    axpy(1.0, c.d(k - 1).apply(vbu), s.u);
    detail::compute_residuals(p, s);
    return s;
  };

  HodgeLaplaceSolution base = assemble(vbar, wbar, ubar, vbar_u);
  rep.r1_baseline = base.residual_eq1;
  rep.r2_baseline = base.residual_eq2;

  auto bar_noise = [&](int degree, std::uint64_t s) {
    const IndexSet& set = degree == 0 ? part.bar[0] : part.bar[static_cast<std::size_t>(degree)];
    Vector noise = random_vector(static_cast<std::size_t>(set.size()), s);
    double nn = norm2(noise);
    if (nn > 0.0) scale(epsilon / nn, noise);
    return set.scatter(noise, c.dof_count(degree));
  };

  Vector wbar_p = wbar;
  if (k >= 2) axpy(1.0, bar_noise(k - 2, seed), wbar_p);
  Vector vbar_u_p = vbar_u;
  axpy(1.0, bar_noise(k - 1, seed + 1), vbar_u_p);
  HodgeLaplaceSolution pert24 = assemble(vbar, wbar_p, ubar, vbar_u_p);
  rep.r1_perturb24 = pert24.residual_eq1;
  rep.r2_perturb24 = pert24.residual_eq2;

  Vector vbar_p = vbar;
  axpy(1.0, bar_noise(k - 1, seed + 2), vbar_p);
  if (k == 1) detail::pin_mean_to_data(*p.op, p.g, vbar_p);
  HodgeLaplaceSolution pert1 = assemble(vbar_p, wbar, ubar, solve4(vbar_p, wbar, ubar));
  rep.r1_perturb1 = pert1.residual_eq1;
  rep.r2_perturb1 = pert1.residual_eq2;
  return rep;
}

}  // namespace hodgetree

#endif
