// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "hodgetree/eigs.hpp"
#include "hodgetree/solvers.hpp"

using namespace hodgetree;

namespace {

SparseMatrix random_spd(int n, std::mt19937_64& gen) {
  // diagonally dominant symmetric matrix
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Triplet> t;
  std::vector<double> diag(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (gen() % 4 != 0) continue;
      double v = dist(gen);
      t.push_back({i, j, v});
      t.push_back({j, i, v});
      diag[static_cast<std::size_t>(i)] += std::abs(v);
      diag[static_cast<std::size_t>(j)] += std::abs(v);
    }
  for (int i = 0; i < n; ++i) t.push_back({i, i, diag[static_cast<std::size_t>(i)]});
  return SparseMatrix(n, n, t);
}

}  // namespace

TEST_CASE("spd_solve: identity returns rhs") {
  SparseMatrix a = SparseMatrix::identity(4);
  Vector b = {1.0, -2.0, 3.0, 0.5};
  Vector x = spd_solve(a, b);
  for (int i = 0; i < 4; ++i) CHECK(x[static_cast<std::size_t>(i)] == doctest::Approx(b[static_cast<std::size_t>(i)]));
}

TEST_CASE("spd_solve: hand-solved 2x2") {
  SparseMatrix a(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}});
  Vector x = spd_solve(a, {1.0, 1.0});
  CHECK(x[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("spd_solve: singular matrix reports indefiniteness") {
  SparseMatrix a(2, 2, {{0, 0, 1.0}});
  CHECK_THROWS_AS(spd_solve(a, {1.0, 1.0}), IndefiniteOperatorError);
}

TEST_CASE("spd_solve: iterative backend honors the residual contract") {
  std::mt19937_64 gen(11);
  SparseMatrix a = random_spd(60, gen);
  Vector b = random_vector(60, 5);
  Vector x = spd_solve(a, b, 1e-12, /*direct_size_limit=*/10);
  Vector r = subtract(b, a.apply(x));
  CHECK(norm2(r) <= 1e-11 * norm2(b));
}

TEST_CASE("conjugate_gradient flags indefinite operators distinctly") {
  SparseMatrix a(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  CHECK_THROWS_AS(conjugate_gradient(make_apply(a), {1.0, 1.0}, 1e-10, 50),
                  IndefiniteOperatorError);
}

TEST_CASE("lu_solve: permutation matrix permutes rhs") {
  SparseMatrix p(3, 3, {{0, 2, 1.0}, {1, 0, 1.0}, {2, 1, 1.0}});
  Vector x = lu_solve(p, {9.0, 8.0, 7.0});
  CHECK(x[0] == doctest::Approx(8.0));
  CHECK(x[1] == doctest::Approx(7.0));
  CHECK(x[2] == doctest::Approx(9.0));
}

TEST_CASE("lu_solve: off-diagonal 2x2 requires pivoting") {
  SparseMatrix a(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  Vector x = lu_solve(a, {1.0, 2.0});
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("lu_solve: 1x1 zero matrix is singular") {
  SparseMatrix a(1, 1, {});
  CHECK_THROWS_AS(lu_solve(a, {1.0}), SingularMatrixError);
}

TEST_CASE("tree_triangular_solve: diagonal system") {
  SparseMatrix a(3, 3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, -1.0}});
  Vector x = tree_triangular_solve(a, {2.0, 8.0, 3.0}, {0, 1, 2});
  CHECK(x == Vector{1.0, 2.0, -3.0});
}

TEST_CASE("tree_triangular_solve: path-graph incidence block matches lu_solve") {
  // path 0-1-...-m rooted at 0; rows = edges, cols = non-root nodes
  int m = 12;
  std::vector<Triplet> t;
  for (int e = 0; e < m; ++e) {
    t.push_back({e, e, 1.0});            // node e+1 in edge (e, e+1)
    if (e > 0) t.push_back({e, e - 1, -1.0});  // node e
  }
  SparseMatrix b(m, m, t);
  Vector rhs = random_vector(static_cast<std::size_t>(m), 17);
  std::vector<int> order(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  Vector x = tree_triangular_solve(b, rhs, order);
  Vector y = lu_solve(b, rhs);
  for (int i = 0; i < m; ++i)
    CHECK(x[static_cast<std::size_t>(i)] ==
          doctest::Approx(y[static_cast<std::size_t>(i)]).epsilon(1e-14));
}

TEST_CASE("tree_triangular_solve: order violating triangularity is a structural error") {
  SparseMatrix a(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(tree_triangular_solve(a, {1.0, 1.0}, {0, 1}), SingularMatrixError);
  // reversed order is fine (upper triangular solved bottom-up)
  Vector x = tree_triangular_solve(a, {3.0, 1.0}, {1, 0});
  CHECK(x == Vector{2.0, 1.0});
}

TEST_CASE("tree_triangular_solve: zero diagonal reported") {
  SparseMatrix a(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  CHECK_THROWS_AS(tree_triangular_solve(a, {1.0, 1.0}, {0, 1}), SingularMatrixError);
}

TEST_CASE("cross-oracle: spd, lu and triangular solves agree on random instances") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 8; ++trial) {
    int n = 20 + static_cast<int>(gen() % 480);
    SparseMatrix a = random_spd(n, gen);
    Vector b = random_vector(static_cast<std::size_t>(n), 100 + static_cast<std::uint64_t>(trial));
    Vector xs = spd_solve(a, b);
    Vector xl = lu_solve(a, b);
    Vector d = subtract(xs, xl);
    CHECK(norm2(d) <= 1e-10 * std::max(norm2(xs), 1.0));
  }
  // triangular-compatible instance: random lower-triangular matrix
  for (int trial = 0; trial < 4; ++trial) {
    int n = 50;
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
      t.push_back({i, i, 2.0 + std::abs(dist(gen))});
      for (int j = 0; j < i; ++j)
        if (gen() % 5 == 0) t.push_back({i, j, dist(gen)});
    }
    SparseMatrix a(n, n, t);
    Vector b = random_vector(static_cast<std::size_t>(n), 55 + static_cast<std::uint64_t>(trial));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Vector xt = tree_triangular_solve(a, b, order);
    Vector xl = lu_solve(a, b);
    CHECK(norm2(subtract(xt, xl)) <= 1e-10 * std::max(norm2(xl), 1.0));
  }
}

TEST_CASE("minres: exact preconditioner converges in one iteration") {
  std::mt19937_64 gen(31);
  SparseMatrix a = random_spd(30, gen);
  SpdFactorization inv(a);
  Vector b = random_vector(30, 3);
  MinresResult r = minres(make_apply(a), b,
                          [&inv](const Vector& v) { return inv.solve(v); }, 1e-10, 100);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("minres: unpreconditioned 2x2 SPD exact within two iterations") {
  SparseMatrix a(2, 2, {{0, 0, 3.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}});
  MinresResult r = minres(a, {1.0, -1.0}, 1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  Vector res = subtract(a.apply(r.x), {1.0, -1.0});
  CHECK(norm2(res) <= 1e-10);
}

TEST_CASE("minres: solves a symmetric indefinite system") {
  SparseMatrix a(3, 3, {{0, 0, 2.0}, {1, 1, -1.0}, {2, 2, 0.5}, {0, 1, 0.3}, {1, 0, 0.3}});
  Vector b = {1.0, 2.0, 3.0};
  MinresResult r = minres(a, b, 1e-12, 50);
  CHECK(r.converged);
  CHECK(norm2(subtract(a.apply(r.x), b)) <= 1e-10 * norm2(b));
}

TEST_CASE("extreme_gen_eigs: A = B gives (1, 1)") {
  SparseMatrix a = SparseMatrix::identity(10);
  ExtremeEigs e = extreme_gen_eigs(make_apply(a), make_apply(a), 10, 1e-10);
  CHECK(e.lambda_min == doctest::Approx(1.0));
  CHECK(e.lambda_max == doctest::Approx(1.0));
}

TEST_CASE("extreme_gen_eigs: diagonal pencil against identity") {
  SparseMatrix a(2, 2, {{0, 0, 1.0}, {1, 1, 4.0}});
  SparseMatrix b = SparseMatrix::identity(2);
  ExtremeEigs e = extreme_gen_eigs(make_apply(a), make_apply(b), 2, 1e-12);
  CHECK(e.lambda_min == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(e.lambda_max == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("extreme_gen_eigs: diag(d) vs identity recovers extreme entries") {
  int n = 40;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.push_back({i, i, 0.5 + 0.25 * i});
  SparseMatrix a(n, n, t);
  ExtremeEigs e = extreme_gen_eigs(make_apply(a),
                                   make_apply(SparseMatrix::identity(n)), n, 1e-10, 300);
  CHECK(e.lambda_min == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(e.lambda_max == doctest::Approx(0.5 + 0.25 * (n - 1)).epsilon(1e-6));
}

TEST_CASE("gen_eig_max: M = A gives 1") {
  std::mt19937_64 gen(41);
  SparseMatrix a = random_spd(15, gen);
  SpdFactorization f(a);
  GenEigMaxResult r = gen_eig_max(a, [&f](const Vector& v) { return f.solve(v); }, nullptr,
                                  1e-12);
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gen_eig_max: diag(2,1) vs identity gives 2") {
  SparseMatrix m(2, 2, {{0, 0, 2.0}, {1, 1, 1.0}});
  GenEigMaxResult r = gen_eig_max(m, [](const Vector& v) { return v; }, nullptr, 1e-12);
  CHECK(r.lambda == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("gen_eig_max with deflation skips the dominant direction") {
  // pencil (diag(3,2,1), I); deflating e0 in the M-inner product leaves 2
  SparseMatrix m(3, 3, {{0, 0, 3.0}, {1, 1, 2.0}, {2, 2, 1.0}});
  Vector e0 = {1.0, 0.0, 0.0};
  GenEigMaxResult r = gen_eig_max(m, [](const Vector& v) { return v; }, &e0, 1e-12);
  CHECK(r.lambda == doctest::Approx(2.0).epsilon(1e-9));
}
