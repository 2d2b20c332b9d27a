// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_AUX_PRECOND_HPP
#define HODGETREE_AUX_PRECOND_HPP

#include "hodgetree/eigs.hpp"
#include "hodgetree/hodge_laplace.hpp"

namespace hodgetree {

/// Weighted projection problem on P Lambda^k:
///   (alpha^2 u, u') + (du, du') = <f, u'>,   0 < alpha <= 1.
struct ProjectionProblem {
  ProjectionProblem(const FormComplex& complex, int k, double alpha)
      : complex(&complex), k(k), alpha(alpha) {
    if (k < 1 || k > complex.dim - 1)
      throw InvalidArgument("ProjectionProblem: k must lie in 1..n-1");
    if (!(alpha > 0.0) || alpha > 1.0)
      throw InvalidArgument("ProjectionProblem: alpha must lie in (0, 1]");
    a_proj = SparseMatrix::add(alpha * alpha, complex.m(k), 1.0, complex.stiffness(k));
  }

  const FormComplex* complex;
  int k;
  double alpha;
  SparseMatrix a_proj;  // alpha^2 M_k + D_k^T M_{k+1} D_k, SPD
};

/// Auxiliary space preconditioner
///   P = Pi_k^T Abar_k^{-1} Pi_k + Dbar_{k-1} (alpha^2 Abar_{k-1})^{-1} Dbar_{k-1}^T
/// built from the tree decomposition; both inner solves are exact
/// factorizations.
class AuxPreconditioner {
public:
  AuxPreconditioner(const FormComplex& complex, const TreePartition& part, int k,
                    double alpha)
      : complex_(&complex), k_(k), alpha_(alpha), n_full_(complex.dof_count(k)) {
    if (k < 1 || k > complex.dim - 1)
      throw InvalidArgument("AuxPreconditioner: k must lie in 1..n-1");
    if (!(alpha > 0.0) || alpha > 1.0)
      throw InvalidArgument("AuxPreconditioner: alpha must lie in (0, 1]");

    bar_k_ = part.bar[static_cast<std::size_t>(k)];
    abar_k_ = std::make_shared<SpdFactorization>(
        submatrix(complex.stiffness(k), bar_k_, bar_k_));

    if (k == 1) {
      // the k-1 = 0 auxiliary space is the full nodal space; pin the
      // tree root (RHS D_0^T r annihilates constants, so the pinned
      // solve is exact and the image under D_0 representative-free)
      std::vector<int> keep;
      for (int v = 0; v < complex.dof_count(0); ++v)
        if (v != part.root_node) keep.push_back(v);
      inner_set_ = IndexSet(std::move(keep));
      dbar_ = complex.d(0);
    } else {
      inner_set_ = part.bar[static_cast<std::size_t>(k) - 1];
      dbar_ = submatrix(complex.d(k - 1), IndexSet::full(complex.dof_count(k)), inner_set_);
    }
    abar_km1_ = std::make_shared<SpdFactorization>(
        submatrix(complex.stiffness(k - 1), inner_set_, inner_set_));
  }

  int size() const { return n_full_; }
  double alpha() const { return alpha_; }

  Vector apply(const Vector& r) const {
    if (static_cast<int>(r.size()) != n_full_)
      throw InvalidArgument("AuxPreconditioner::apply: size mismatch");
    Vector out = bar_k_.scatter(abar_k_->solve(bar_k_.gather(r)), n_full_);
    Vector s = dbar_.apply_transpose(r);
    Vector z;
    if (k_ == 1) {
      // s is a nodal functional orthogonal to constants; solve pinned
      z = inner_set_.scatter(abar_km1_->solve(inner_set_.gather(s)),
                             dbar_.cols());
    } else {
      z = abar_km1_->solve(s);
    }
    Vector t = dbar_.apply(z);
    axpy(1.0 / (alpha_ * alpha_), t, out);
    return out;
  }

  ApplyFn apply_fn() const {
    return [this](const Vector& r) { return apply(r); };
  }

private:
  const FormComplex* complex_;
  int k_;
  double alpha_;
  int n_full_;
  IndexSet bar_k_;
  IndexSet inner_set_;
  SparseMatrix dbar_;  // columns bar_{k-1} of D_{k-1} (all columns when k = 1)
  std::shared_ptr<SpdFactorization> abar_k_;
  std::shared_ptr<SpdFactorization> abar_km1_;
};

struct PminresResult {
  Vector u;
  int iterations = 0;
  bool converged = false;
};

/// MinRes on the projection problem preconditioned by the auxiliary
/// space preconditioner; the iteration count is the study's headline number.
inline PminresResult pminres(const ProjectionProblem& problem, const AuxPreconditioner& precond,
                             const Vector& f, double rel_tol = 1e-8, int max_iter = 10000) {
  MinresResult mr =
      minres(make_apply(problem.a_proj), f, precond.apply_fn(), rel_tol, max_iter);
  if (!mr.converged)
    throw ConvergenceError("pminres: MinRes did not reach the tolerance", mr.iterations);
  return {std::move(mr.x), mr.iterations, mr.converged};
}

/// Spectral condition number of the preconditioned projection operator.
inline double estimate_condition(const ProjectionProblem& problem,
                                 const AuxPreconditioner& precond, double tol = 1e-6,
                                 int max_iter = 400) {
  ExtremeEigs ee = extreme_gen_eigs(make_apply(problem.a_proj), precond.apply_fn(),
                                    problem.a_proj.rows(), tol, max_iter);
  if (!ee.converged)
    throw ConvergenceError("estimate_condition: Lanczos did not settle", ee.iterations);
  return ee.lambda_max / ee.lambda_min;
}

struct PoincareConstantResult {
  double cbar = 0.0;
  Vector eigenvector;  // full-length coefficient vector on P Lambda^k
  int iterations = 0;
};

/// Poincare constant cbar_k = sup ||ubar|| / ||d ubar|| over bar_k,
/// computed as the square root of the largest eigenvalue of
/// Mbar u = lambda Abar u. k = 0 uses the full nodal pencil with
/// constant-vector deflation in the M_0-inner product.
inline PoincareConstantResult poincare_constant(const FormComplex& complex,
                                                const TreePartition& part, int k,
                                                double tol = 1e-10, int max_iter = 100000) {
  int n = complex.dim;
  if (k < 0 || k > n - 1) throw InvalidArgument("poincare_constant: k must lie in 0..n-1");
  PoincareConstantResult out;

  if (k == 0) {
    const SparseMatrix& m0 = complex.m(0);
    std::vector<int> keep;
    for (int v = 0; v < complex.dof_count(0); ++v)
      if (v != part.root_node) keep.push_back(v);
    IndexSet pinned(std::move(keep));
    SpdFactorization a0(submatrix(complex.stiffness(0), pinned, pinned));
    auto a_solve = [&](const Vector& b) {
      // compatible RHS (deflated against constants): pinned solve is exact
      return pinned.scatter(a0.solve(pinned.gather(b)), complex.dof_count(0));
    };
    Vector ones(static_cast<std::size_t>(complex.dof_count(0)), 1.0);
    GenEigMaxResult r = gen_eig_max(m0, a_solve, &ones, tol, max_iter);
    out.cbar = std::sqrt(r.lambda);
    out.eigenvector = std::move(r.eigenvector);
    out.iterations = r.iterations;
    return out;
  }

  const IndexSet& bar = part.bar[static_cast<std::size_t>(k)];
  SparseMatrix mbar = submatrix(complex.m(k), bar, bar);
  SpdFactorization abar(submatrix(complex.stiffness(k), bar, bar));
  auto a_solve = [&abar](const Vector& b) { return abar.solve(b); };
  GenEigMaxResult r = gen_eig_max(mbar, a_solve, nullptr, tol, max_iter);
  out.cbar = std::sqrt(r.lambda);
  out.eigenvector = bar.scatter(r.eigenvector, complex.dof_count(k));
  out.iterations = r.iterations;
  return out;
}

struct UpperBoundReport {
  double max_ratio = 0.0;
  int samples = 0;
};

/// Sampled check of the upper-bound property: for u = p(dw) spanning a
/// complement of Ker(d), the ratio ||u|| / ||du|| never exceeds cbar_k.
inline UpperBoundReport poincare_upper_bound_check(const PoincareOperator& op, int k,
                                                   int samples, std::uint64_t seed = 31) {
  const FormComplex& c = op.complex();
  if (k < 0 || k > c.dim - 1)
    throw InvalidArgument("poincare_upper_bound_check: k out of range");
  UpperBoundReport rep;
  for (int s = 0; s < samples; ++s) {
    Vector w = random_vector(static_cast<std::size_t>(c.dof_count(k)), seed + static_cast<std::uint64_t>(s));
    Vector dw = c.d(k).apply(w);
    double dn = c.norm(k + 1, dw);
    if (dn == 0.0) continue;
    Vector u = op.apply_p(k + 1, dw);
    double ratio = c.norm(k, u) / dn;  // d(p dw) = dw by dpd = d
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.samples;
  }
  return rep;
}

/// Lower bound 1/sqrt(cbar_{k-1}^2 + 1) on the inf-sup constant of the
/// pair P Lambda^{k-1} x P Lambda^k.
inline double infsup_lower_bound(double cbar_km1) {
  return 1.0 / std::sqrt(cbar_km1 * cbar_km1 + 1.0);
}

struct StabilityReport {
  int samples = 0;
  int violations_transfer = 0;     // ||a ubar||^2 + ||d ubar||^2 <= (c^2+1)||d ubar||^2
  int violations_decomposition = 0;  // decomposition stability inequality
  double max_dd_residual = 0.0;      // ||d d vbar|| (exact zero up to rounding)
  double max_equality_residual = 0.0;  // | ||d ubar|| - ||du|| | / ||du||
  double max_transfer_slack = 0.0;     // lhs/rhs of (i), 1 at tightness
  double max_decomposition_slack = 0.0;
};

/// Random-sample verification of the transfer and decomposition
/// stability inequalities at a given alpha, using the computed cbar_k.
inline StabilityReport stability_inequalities_check(const PoincareOperator& op, int k,
                                                    double alpha, double cbar, int samples,
                                                    std::uint64_t seed = 47) {
  const FormComplex& c = op.complex();
  const TreePartition& part = op.partition();
  if (k < 1 || k > c.dim - 1)
    throw InvalidArgument("stability_inequalities_check: k out of range");
  StabilityReport rep;
  rep.samples = samples;
  const double slack_tol = 1e-6;  // estimator error allowance on cbar
  const IndexSet& bar_k = part.bar[static_cast<std::size_t>(k)];
  const IndexSet& bar_km1 = part.bar[static_cast<std::size_t>(k) - 1];

  for (int s = 0; s < samples; ++s) {
    std::uint64_t sd = seed + 3 * static_cast<std::uint64_t>(s);

    // (i) transfer stability on bar_k
    Vector ubar = bar_k.scatter(random_vector(static_cast<std::size_t>(bar_k.size()), sd),
                                c.dof_count(k));
    double du2 = c.inner(k + 1, c.d(k).apply(ubar), c.d(k).apply(ubar));
    double u2 = c.inner(k, ubar, ubar);
    double lhs1 = alpha * alpha * u2 + du2;
    double rhs1 = (cbar * cbar + 1.0) * du2;
    rep.max_transfer_slack = std::max(rep.max_transfer_slack, lhs1 / rhs1);
    if (lhs1 > rhs1 * (1.0 + slack_tol)) ++rep.violations_transfer;

    // (ii) second transfer: || d(d vbar) || vanishes
    Vector vbar = bar_km1.scatter(
        random_vector(static_cast<std::size_t>(bar_km1.size()), sd + 1), c.dof_count(k - 1));
    Vector ddv = c.d(k).apply(c.d(k - 1).apply(vbar));
    double dv = c.norm(k, c.d(k - 1).apply(vbar));
    rep.max_dd_residual =
        std::max(rep.max_dd_residual, c.norm(k + 1, ddv) / std::max(dv, 1e-300));

    // (iii) decomposition stability for random u
    Vector u = random_vector(static_cast<std::size_t>(c.dof_count(k)), sd + 2);
    auto [pu, pv] = op.decompose(k, u);
    Vector du = c.d(k).apply(u);
    Vector dpu = c.d(k).apply(pu);
    Vector dpv = c.d(k - 1).apply(pv);
    double ndu2 = c.inner(k + 1, du, du);
    double ndpu2 = c.inner(k + 1, dpu, dpu);
    double ndpv2 = c.inner(k, dpv, dpv);
    double nu2 = c.inner(k, u, u);
    double lhs3 = ndpu2 + alpha * alpha * ndpv2;
    double rhs3 = 2.0 * alpha * alpha * nu2 + (1.0 + 2.0 * cbar * cbar) * ndu2;
    rep.max_decomposition_slack = std::max(rep.max_decomposition_slack, lhs3 / rhs3);
    if (lhs3 > rhs3 * (1.0 + slack_tol)) ++rep.violations_decomposition;

    double eq = std::abs(std::sqrt(ndpu2) - std::sqrt(ndu2)) / std::max(std::sqrt(ndu2), 1e-300);
    rep.max_equality_residual = std::max(rep.max_equality_residual, eq);
  }
  return rep;
}

}  // namespace hodgetree

#endif
