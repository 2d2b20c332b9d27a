// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "hodgetree/hodge_laplace.hpp"

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

  HodgeLaplaceProblem random_problem(int k, std::uint64_t seed) const {
    Vector g = random_vector(static_cast<std::size_t>(complex.dof_count(k - 1)), seed);
    Vector f = random_vector(static_cast<std::size_t>(complex.dof_count(k)), seed + 1);
    return HodgeLaplaceProblem(op, k, std::move(g), std::move(f));
  }
};

double solution_gap(const HodgeLaplaceSolution& a, const HodgeLaplaceSolution& b) {
  double denom = std::max(norm2(b.v) + norm2(b.u), 1e-300);
  return (norm2(subtract(a.v, b.v)) + norm2(subtract(a.u, b.u))) / denom;
}

}  // namespace

TEST_CASE("four-step residuals are tiny for random data") {
  {
    Setup s(generate_structured_square(4));
    for (int k = 1; k <= 2; ++k) {
      HodgeLaplaceProblem p = s.random_problem(k, 10 * static_cast<std::uint64_t>(k));
      HodgeLaplaceSolution sol = solve_four_step(p);
      CHECK(sol.residual_eq1 <= 1e-8);
      CHECK(sol.residual_eq2 <= 1e-8);
    }
  }
  {
    Setup s(generate_structured_cube(2));
    for (int k = 1; k <= 3; ++k) {
      HodgeLaplaceProblem p = s.random_problem(k, 20 * static_cast<std::uint64_t>(k));
      HodgeLaplaceSolution sol = solve_four_step(p);
      CHECK(sol.residual_eq1 <= 1e-8);
      CHECK(sol.residual_eq2 <= 1e-8);
    }
  }
}

TEST_CASE("zero data gives the zero solution") {
  Setup s(generate_structured_square(2));
  for (int k = 1; k <= 2; ++k) {
    Vector g(static_cast<std::size_t>(s.complex.dof_count(k - 1)), 0.0);
    Vector f(static_cast<std::size_t>(s.complex.dof_count(k)), 0.0);
    HodgeLaplaceProblem p(s.op, k, g, f);
    HodgeLaplaceSolution sol = solve_four_step(p);
    CHECK(norm2(sol.v) <= 1e-14);
    CHECK(norm2(sol.u) <= 1e-14);
  }
}

TEST_CASE("subproblem DOF counts sum to the full dimension") {
  // dimensions follow the zero-mean quotient at degree 0
  auto check = [](const Setup& s) {
    int n = s.complex.dim;
    for (int k = 1; k <= n; ++k) {
      HodgeLaplaceProblem p = s.random_problem(k, 3);
      HodgeLaplaceSolution sol =
          k == n ? solve_k_equals_n(p) : solve_four_step(p);
      int sum = 0;
      for (const auto& sub : sol.subproblems) sum += sub.dofs;
      int nkm1 = s.complex.dof_count(k - 1) - (k == 1 ? 1 : 0);
      CHECK(sum == nkm1 + s.complex.dof_count(k));
      CHECK(sol.total_dofs == sum);
    }
  };
  {
    Setup s(generate_structured_square(3));
    check(s);
  }
  {
    Setup s(generate_structured_cube(2));
    check(s);
  }
}

TEST_CASE("empty subproblems keep the report shape uniform") {
  Setup s(generate_structured_cube(1));
  HodgeLaplaceProblem p1 = s.random_problem(1, 5);
  HodgeLaplaceSolution s1 = solve_four_step(p1);
  REQUIRE(s1.subproblems.size() == 4);
  CHECK(s1.subproblems[1].name == "prob2");
  CHECK(s1.subproblems[1].dofs == 0);
  CHECK(s1.subproblems[1].seconds == 0.0);
  HodgeLaplaceProblem p3 = s.random_problem(3, 6);
  HodgeLaplaceSolution s3 = solve_four_step(p3);
  CHECK(s3.subproblems[2].name == "prob3");
  CHECK(s3.subproblems[2].dofs == 0);
}

TEST_CASE("k = n: unit density gives D v = 1 exactly") {
  {
    Setup s(generate_structured_square(1));
    Vector g(static_cast<std::size_t>(s.complex.dof_count(1)), 0.0);
    Vector ones(static_cast<std::size_t>(s.complex.dof_count(2)), 1.0);
    Vector f = s.complex.functional_from_density(2, ones);
    HodgeLaplaceProblem p(s.op, 2, g, f);
    HodgeLaplaceSolution sol = solve_k_equals_n(p);
    Vector dv = s.complex.d(1).apply(sol.v);
    for (double x : dv) CHECK(x == doctest::Approx(1.0).epsilon(1e-13));
  }
  {
    Setup s(generate_structured_cube(2));
    Vector g(static_cast<std::size_t>(s.complex.dof_count(2)), 0.0);
    Vector ones(static_cast<std::size_t>(s.complex.dof_count(3)), 1.0);
    Vector f = s.complex.functional_from_density(3, ones);
    HodgeLaplaceProblem p(s.op, 3, g, f);
    HodgeLaplaceSolution sol = solve_k_equals_n(p);
    Vector dv = s.complex.d(2).apply(sol.v);
    for (double x : dv) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("k = n fast path uses the triangular tree blocks") {
  Setup s(generate_structured_cube(2));
  CHECK(s.op.block(3).triangular());
  Setup s2(generate_structured_square(4));
  CHECK(s2.op.block(2).triangular());
}

TEST_CASE("k = n report: subproblem triple (cells, bar_1, cells, -)") {
  Setup s(generate_structured_cube(2));
  HodgeLaplaceProblem p = s.random_problem(3, 9);
  HodgeLaplaceSolution sol = solve_k_equals_n(p);
  int cells = s.complex.dof_count(3);
  int bar1 = s.part.bar[1].size();
  REQUIRE(sol.subproblems.size() == 4);
  CHECK(sol.subproblems[0].dofs == cells);
  CHECK(sol.subproblems[1].dofs == bar1);
  CHECK(sol.subproblems[2].dofs == cells);
  CHECK(sol.subproblems[3].dofs == 0);
}

TEST_CASE("three-step, four-step and monolithic solutions agree") {
  auto check = [](const Setup& s, double tol) {
    int n = s.complex.dim;
    for (int k = 1; k <= n; ++k) {
      for (std::uint64_t seed : {1ull, 2ull}) {
        HodgeLaplaceProblem p = s.random_problem(k, 100 * static_cast<std::uint64_t>(k) + seed);
        HodgeLaplaceSolution four = solve_four_step(p);
        HodgeLaplaceSolution mono = solve_monolithic(p);
        CHECK(solution_gap(four, mono) <= tol);
        if (k == n) {
          HodgeLaplaceSolution three = solve_k_equals_n(p);
          CHECK(solution_gap(three, mono) <= tol);
          CHECK(solution_gap(three, four) <= tol);
        }
      }
    }
  };
  {
    Setup s(generate_structured_square(4));
    check(s, 1e-8);
  }
  {
    Setup s(generate_structured_cube(2));
    check(s, 1e-8);
  }
}

TEST_CASE("monolithic dimension bookkeeping and residuals") {
  Setup s(generate_structured_square(3));
  HodgeLaplaceProblem p = s.random_problem(2, 8);
  HodgeLaplaceSolution mono = solve_monolithic(p);
  CHECK(mono.total_dofs == s.complex.dof_count(1) + s.complex.dof_count(2));
  CHECK(mono.residual_eq1 <= 1e-10);
  CHECK(mono.residual_eq2 <= 1e-10);
  CHECK(mono.subproblems.size() == 1);
  CHECK(mono.subproblems[0].dofs == mono.total_dofs);
}

TEST_CASE("monolithic iterative backend agrees with the direct one") {
  Setup s(generate_structured_square(2));
  HodgeLaplaceProblem p = s.random_problem(1, 12);
  HodgeLaplaceSolution direct = solve_monolithic(p, 1e-10, SolveBackend::direct);
  HodgeLaplaceSolution iterative = solve_monolithic(p, 1e-12, SolveBackend::iterative);
  CHECK(solution_gap(iterative, direct) <= 1e-6);
  CHECK(iterative.subproblems[0].iterations > 0);
}

TEST_CASE("inexactness isolation: eq2 blind to prob-2/prob-4 accuracy") {
  auto check = [](const Setup& s, int k) {
    HodgeLaplaceProblem p = s.random_problem(k, 21);
    InexactnessReport rep = inexactness_isolation_check(p, 1e-2);
    // baseline solves are exact
    CHECK(rep.r1_baseline <= 1e-9);
    CHECK(rep.r2_baseline <= 1e-9);
    // perturbing prob-2/prob-4 outputs leaves eq 2 untouched
    CHECK(std::abs(rep.r2_perturb24 - rep.r2_baseline) < 1e-9);
    // ... while eq 1 degrades to O(eps)
    CHECK(rep.r1_perturb24 > 1e-5);
    // contrapositive: perturbing prob 1 moves eq 2 by O(eps)
    CHECK(rep.r2_perturb1 > 1e-5);
  };
  {
    Setup s(generate_structured_square(4));
    check(s, 2);
  }
  {
    Setup s(generate_structured_cube(2));
    check(s, 2);
    check(s, 3);
  }
}

TEST_CASE("inexactness isolation: zero perturbation reproduces the baseline") {
  Setup s(generate_structured_square(3));
  HodgeLaplaceProblem p = s.random_problem(2, 31);
  InexactnessReport rep = inexactness_isolation_check(p, 0.0);
  CHECK(rep.r1_perturb24 == doctest::Approx(rep.r1_baseline).epsilon(1e-12));
  CHECK(rep.r2_perturb24 == doctest::Approx(rep.r2_baseline).epsilon(1e-12));
}

TEST_CASE("problem construction validates sizes and range") {
  Setup s(generate_structured_square(1));
  Vector g(static_cast<std::size_t>(s.complex.dof_count(0)), 0.0);
  Vector f(static_cast<std::size_t>(s.complex.dof_count(1)), 0.0);
  CHECK_THROWS_AS(HodgeLaplaceProblem(s.op, 0, g, f), InvalidArgument);
  CHECK_THROWS_AS(HodgeLaplaceProblem(s.op, 3, g, f), InvalidArgument);
  CHECK_THROWS_AS(HodgeLaplaceProblem(s.op, 1, f, f), InvalidArgument);
  CHECK_THROWS_AS(solve_k_equals_n(HodgeLaplaceProblem(s.op, 1, g, f)), InvalidArgument);
}
