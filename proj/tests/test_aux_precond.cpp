// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "hodgetree/aux_precond.hpp"
#include "hodgetree/dense_oracle.hpp"

using namespace hodgetree;

namespace {

struct Setup {
  explicit Setup(SimplicialMesh m)
      : mesh(std::move(m)), complex(mesh), part(dof_partition(mesh)), op(complex, part) {}
  Setup(const Setup&) = delete;
  SimplicialMesh mesh;
  FormComplex complex;
  TreePartition part;
  PoincareOperator op;
};

}  // namespace

TEST_CASE("apply_precond: zero in, zero out; symmetry; exact alpha scaling") {
  Setup s(generate_structured_square(4));
  AuxPreconditioner p(s.complex, s.part, 1, 0.25);
  int n = s.complex.dof_count(1);
  CHECK(norm2(p.apply(Vector(static_cast<std::size_t>(n), 0.0))) == 0.0);

  Vector r = random_vector(static_cast<std::size_t>(n), 1);
  Vector t = random_vector(static_cast<std::size_t>(n), 2);
  double prt = dot(p.apply(r), t);
  double rpt = dot(r, p.apply(t));
  CHECK(prt == doctest::Approx(rpt).epsilon(1e-12));

  // P(alpha) = T1 + T2 / alpha^2: recover T2 from two alpha values each
  // and compare the reconstructions
  AuxPreconditioner p_half(s.complex, s.part, 1, 0.5);
  AuxPreconditioner p_unit(s.complex, s.part, 1, 1.0);
  Vector probe = random_vector(static_cast<std::size_t>(n), 4);
  Vector t1_plus_t2 = p_unit.apply(probe);            // T1 + T2
  Vector t1_plus_16t2 = p.apply(probe);               // T1 + 16 T2
  Vector t1_plus_4t2 = p_half.apply(probe);           // T1 + 4 T2
  Vector t2_a = subtract(t1_plus_16t2, t1_plus_t2);   // 15 T2
  Vector t2_b = subtract(t1_plus_4t2, t1_plus_t2);    // 3 T2
  scale(1.0 / 15.0, t2_a);
  scale(1.0 / 3.0, t2_b);
  CHECK(norm2(subtract(t2_a, t2_b)) <= 1e-12 * std::max(norm2(t2_a), 1e-30));
}

TEST_CASE("apply_precond is positive definite on random vectors") {
  Setup s(generate_structured_cube(1));
  for (int k : {1, 2}) {
    AuxPreconditioner p(s.complex, s.part, k, 0.1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Vector r = random_vector(static_cast<std::size_t>(s.complex.dof_count(k)), seed);
      CHECK(dot(r, p.apply(r)) > 0.0);
    }
  }
}

TEST_CASE("projection problem validates its range and weight") {
  Setup s(generate_structured_square(2));
  CHECK_THROWS_AS(ProjectionProblem(s.complex, 0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(ProjectionProblem(s.complex, 2, 0.5), InvalidArgument);
  CHECK_THROWS_AS(ProjectionProblem(s.complex, 1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ProjectionProblem(s.complex, 1, 1.5), InvalidArgument);
  ProjectionProblem ok(s.complex, 1, 1.0);
  CHECK(ok.a_proj.rows() == s.complex.dof_count(1));
}

TEST_CASE("pminres solution matches spd_solve on the projection operator") {
  Setup s(generate_structured_square(6));
  for (double alpha : {1e-2, 1.0}) {
    ProjectionProblem pp(s.complex, 1, alpha);
    AuxPreconditioner pc(s.complex, s.part, 1, alpha);
    Vector f = random_vector(static_cast<std::size_t>(s.complex.dof_count(1)), 8);
    PminresResult pm = pminres(pp, pc, f, 1e-10);
    Vector direct = spd_solve(pp.a_proj, f, 1e-12);
    CHECK(norm2(subtract(pm.u, direct)) <= 1e-7 * std::max(norm2(direct), 1e-30));
  }
}

TEST_CASE("preconditioned minres iteration counts across alpha") {
  Setup s(generate_structured_square(8));
  ProjectionProblem p4(s.complex, 1, 1e-4);
  AuxPreconditioner c4(s.complex, s.part, 1, 1e-4);
  Vector f = random_vector(static_cast<std::size_t>(s.complex.dof_count(1)), 9);
  CHECK(pminres(p4, c4, f, 1e-8).iterations == 1);

  ProjectionProblem p1(s.complex, 1, 1e-1);
  AuxPreconditioner c1(s.complex, s.part, 1, 1e-1);
  CHECK(pminres(p1, c1, f, 1e-8).iterations <= 4);

  ProjectionProblem p0(s.complex, 1, 1.0);
  AuxPreconditioner c0(s.complex, s.part, 1, 1.0);
  CHECK(pminres(p0, c0, f, 1e-8).iterations <= 12);
}

TEST_CASE("preconditioned condition numbers across alpha") {
  Setup s(generate_structured_square(8));
  ProjectionProblem p4(s.complex, 1, 1e-4);
  AuxPreconditioner c4(s.complex, s.part, 1, 1e-4);
  double kappa4 = estimate_condition(p4, c4, 1e-6);
  CHECK(kappa4 == doctest::Approx(1.0).epsilon(0.02));

  ProjectionProblem p0(s.complex, 1, 1.0);
  AuxPreconditioner c0(s.complex, s.part, 1, 1.0);
  double kappa0 = estimate_condition(p0, c0, 1e-6);
  CHECK(kappa0 >= 1.5);
  CHECK(kappa0 <= 3.0);

  Setup s3(generate_structured_cube(2));
  ProjectionProblem q(s3.complex, 2, 1e-1);
  AuxPreconditioner qc(s3.complex, s3.part, 2, 1e-1);
  CHECK(estimate_condition(q, qc, 1e-6) <= 1.3);
}

TEST_CASE("kappa is non-increasing as alpha decreases") {
  Setup s(generate_structured_square(6));
  double prev = 0.0;
  for (int e : {-4, -3, -2, -1, 0}) {
    double alpha = std::pow(10.0, e);
    ProjectionProblem pp(s.complex, 1, alpha);
    AuxPreconditioner pc(s.complex, s.part, 1, alpha);
    double kappa = estimate_condition(pp, pc, 1e-7);
    CHECK(kappa >= prev * (1.0 - 1e-6));
    prev = kappa;
  }
}

TEST_CASE("poincare constant: 2D k=0 approximates 1/pi on a fine mesh") {
  Setup s(generate_structured_square(32));
  PoincareConstantResult r = poincare_constant(s.complex, s.part, 0, 1e-10);
  CHECK(r.cbar == doctest::Approx(1.0 / M_PI).epsilon(0.02));
}

TEST_CASE("poincare constant matches the dense oracle below 2000 DOFs") {
  {
    Setup s(generate_structured_square(8));
    for (int k : {0, 1}) {
      PoincareConstantResult est = poincare_constant(s.complex, s.part, k, 1e-11);
      double dense = dense_poincare_constant(s.complex, s.part, k);
      CHECK(std::abs(est.cbar - dense) <= 1e-6 * std::max(dense, 1e-30));
    }
  }
  {
    Setup s(generate_structured_cube(2));
    for (int k : {0, 1, 2}) {
      PoincareConstantResult est = poincare_constant(s.complex, s.part, k, 1e-11);
      double dense = dense_poincare_constant(s.complex, s.part, k);
      CHECK(std::abs(est.cbar - dense) <= 1e-6 * std::max(dense, 1e-30));
    }
  }
}

TEST_CASE("upper bound property: sampled kernel-complement ratios stay below cbar") {
  Setup s(generate_structured_square(6));
  for (int k : {0, 1}) {
    PoincareConstantResult c = poincare_constant(s.complex, s.part, k, 1e-10);
    UpperBoundReport rep = poincare_upper_bound_check(s.op, k, 100);
    CHECK(rep.samples == 100);
    CHECK(rep.max_ratio <= c.cbar * 1.001);
  }
}

TEST_CASE("single-element sanity: N=1 square ratio below cbar_0 (dense oracle)") {
  Setup s(generate_structured_square(1));
  double cbar = dense_poincare_constant(s.complex, s.part, 0);
  UpperBoundReport rep = poincare_upper_bound_check(s.op, 0, 20);
  CHECK(rep.max_ratio <= cbar * 1.001);
}

TEST_CASE("inf-sup lower bound: formula cases and monotonicity") {
  CHECK(infsup_lower_bound(0.0) == doctest::Approx(1.0));
  CHECK(infsup_lower_bound(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(infsup_lower_bound(0.3) > infsup_lower_bound(0.6));
}

TEST_CASE("inf-sup lower bound is below the dense-oracle constant") {
  {
    Setup s(generate_structured_square(1));
    for (int k = 1; k <= 2; ++k) {
      double cbar = dense_poincare_constant(s.complex, s.part, k - 1);
      double bound = infsup_lower_bound(cbar);
      double truth = dense_infsup_constant(s.complex, s.part, k);
      CHECK(bound <= truth * (1.0 + 1e-6));
    }
  }
  {
    Setup s(generate_structured_square(4));
    for (int k = 1; k <= 2; ++k) {
      double cbar = poincare_constant(s.complex, s.part, k - 1, 1e-10).cbar;
      double bound = infsup_lower_bound(cbar);
      double truth = dense_infsup_constant(s.complex, s.part, k);
      CHECK(bound <= truth * (1.0 + 1e-6));
    }
  }
  {
    Setup s(generate_structured_cube(1));
    for (int k = 1; k <= 3; ++k) {
      double cbar = dense_poincare_constant(s.complex, s.part, k - 1);
      double bound = infsup_lower_bound(cbar);
      double truth = dense_infsup_constant(s.complex, s.part, k);
      CHECK(bound <= truth * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("stability inequalities hold on random samples") {
  auto run = [](const Setup& s, int k, double alpha) {
    double cbar = poincare_constant(s.complex, s.part, k, 1e-10).cbar;
    StabilityReport rep = stability_inequalities_check(s.op, k, alpha, cbar, 200);
    CHECK(rep.violations_transfer == 0);
    CHECK(rep.violations_decomposition == 0);
    CHECK(rep.max_dd_residual <= 1e-12);
    CHECK(rep.max_equality_residual <= 1e-10);
  };
  {
    Setup s(generate_structured_square(6));
    run(s, 1, 1.0);
    run(s, 1, 1e-2);
  }
  {
    Setup s(generate_structured_cube(2));
    run(s, 1, 1.0);
    run(s, 2, 0.5);
  }
}

TEST_CASE("transfer inequality is tight at the extremal eigenvector with alpha = 1") {
  Setup s(generate_structured_square(6));
  int k = 1;
  PoincareConstantResult c = poincare_constant(s.complex, s.part, k, 1e-11);
  const Vector& ubar = c.eigenvector;
  Vector du = s.complex.d(k).apply(ubar);
  double du2 = s.complex.inner(k + 1, du, du);
  double u2 = s.complex.inner(k, ubar, ubar);
  double lhs = u2 + du2;                       // alpha = 1
  double rhs = (c.cbar * c.cbar + 1.0) * du2;  // equality at the extremizer
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}
