// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>
#include <sstream>

#include "hodgetree/sparse.hpp"

using namespace hodgetree;

TEST_CASE("triplet construction sorts, merges and drops zeros") {
  SparseMatrix a(2, 3, {{1, 2, 4.0}, {0, 1, 1.0}, {0, 1, 2.0}, {1, 0, 0.0}, {0, 2, -1.0}});
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a.nnz() == 3);
  CHECK(a.coeff(0, 1) == 3.0);
  CHECK(a.coeff(0, 2) == -1.0);
  CHECK(a.coeff(1, 0) == 0.0);
  CHECK(a.coeff(1, 2) == 4.0);
  auto cols = a.row_columns(0);
  CHECK(std::is_sorted(cols.begin(), cols.end()));
}

TEST_CASE("triplets out of bounds are rejected") {
  CHECK_THROWS_AS(SparseMatrix(2, 2, {{2, 0, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(SparseMatrix(2, 2, {{0, -1, 1.0}}), InvalidArgument);
}

TEST_CASE("apply and apply_transpose") {
  SparseMatrix a(2, 3, {{0, 0, 1.0}, {0, 2, 2.0}, {1, 1, -3.0}});
  Vector x = {1.0, 2.0, 3.0};
  Vector y = a.apply(x);
  CHECK(y[0] == 7.0);
  CHECK(y[1] == -6.0);
  Vector z = a.apply_transpose({1.0, 1.0});
  CHECK(z[0] == 1.0);
  CHECK(z[1] == -3.0);
  CHECK(z[2] == 2.0);
}

TEST_CASE("product matches dense evaluation on random matrices") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    int m = 6, k = 5, n = 4;
    std::vector<Triplet> ta, tb;
    std::vector<std::vector<double>> da(m, std::vector<double>(k, 0.0));
    std::vector<std::vector<double>> db(k, std::vector<double>(n, 0.0));
    for (int i = 0; i < 12; ++i) {
      int r = static_cast<int>(gen() % m), c = static_cast<int>(gen() % k);
      double v = dist(gen);
      ta.push_back({r, c, v});
      da[r][c] += v;
      int r2 = static_cast<int>(gen() % k), c2 = static_cast<int>(gen() % n);
      double w = dist(gen);
      tb.push_back({r2, c2, w});
      db[r2][c2] += w;
    }
    SparseMatrix a(m, k, ta), b(k, n, tb);
    SparseMatrix ab = a * b;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) {
        double want = 0.0;
        for (int j = 0; j < k; ++j) want += da[r][j] * db[j][c];
        CHECK(ab.coeff(r, c) == doctest::Approx(want).epsilon(1e-13));
      }
  }
}

TEST_CASE("transpose of transpose is identity") {
  SparseMatrix a(3, 2, {{0, 1, 2.0}, {2, 0, -1.0}, {1, 1, 0.5}});
  SparseMatrix att = a.transposed().transposed();
  CHECK(att.rows() == a.rows());
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) CHECK(att.coeff(r, c) == a.coeff(r, c));
}

TEST_CASE("submatrix: full index sets reproduce the matrix") {
  SparseMatrix a(3, 3, {{0, 0, 1.0}, {1, 2, 2.0}, {2, 1, 3.0}});
  SparseMatrix s = submatrix(a, IndexSet::full(3), IndexSet::full(3));
  CHECK(s.nnz() == a.nnz());
  CHECK(s.coeff(1, 2) == 2.0);
}

TEST_CASE("submatrix: empty row set gives 0 x cols") {
  SparseMatrix a(3, 3, {{0, 0, 1.0}});
  SparseMatrix s = submatrix(a, IndexSet(), IndexSet::full(3));
  CHECK(s.rows() == 0);
  CHECK(s.cols() == 3);
  CHECK(s.nnz() == 0);
}

TEST_CASE("submatrix of identity rows/cols {0,2}") {
  SparseMatrix id = SparseMatrix::identity(3);
  IndexSet sel(std::vector<int>{0, 2});
  SparseMatrix s = submatrix(id, sel, sel);
  CHECK(s.rows() == 2);
  CHECK(s.cols() == 2);
  CHECK(s.coeff(0, 0) == 1.0);
  CHECK(s.coeff(1, 1) == 1.0);
  CHECK(s.nnz() == 2);
}

TEST_CASE("submatrix composition equals composed index sets") {
  std::mt19937_64 gen(3);
  std::vector<Triplet> t;
  for (int i = 0; i < 30; ++i)
    t.push_back({static_cast<int>(gen() % 8), static_cast<int>(gen() % 8),
                 static_cast<double>(gen() % 17) - 8.0});
  SparseMatrix a(8, 8, t);
  IndexSet rows1(std::vector<int>{0, 2, 3, 5, 7});
  IndexSet cols1(std::vector<int>{1, 2, 4, 6, 7});
  IndexSet rows2(std::vector<int>{1, 3, 4});
  IndexSet cols2(std::vector<int>{0, 2, 3});
  SparseMatrix twice = submatrix(submatrix(a, rows1, cols1), rows2, cols2);
  std::vector<int> rc, cc;
  for (int i = 0; i < rows2.size(); ++i) rc.push_back(rows1[rows2[i]]);
  for (int i = 0; i < cols2.size(); ++i) cc.push_back(cols1[cols2[i]]);
  SparseMatrix direct = submatrix(a, IndexSet(rc), IndexSet(cc));
  CHECK(twice.nnz() == direct.nnz());
  for (int r = 0; r < twice.rows(); ++r)
    for (int c = 0; c < twice.cols(); ++c) CHECK(twice.coeff(r, c) == direct.coeff(r, c));
}

TEST_CASE("submatrix rejects out-of-bounds indices") {
  SparseMatrix a = SparseMatrix::identity(3);
  CHECK_THROWS_AS(submatrix(a, IndexSet(std::vector<int>{3}), IndexSet::full(3)),
                  InvalidArgument);
}

TEST_CASE("IndexSet invariants and complement") {
  CHECK_THROWS_AS(IndexSet(std::vector<int>{1, 1}), InvalidArgument);
  CHECK_THROWS_AS(IndexSet(std::vector<int>{2, 1}), InvalidArgument);
  IndexSet s(std::vector<int>{1, 3});
  IndexSet c = s.complement(5);
  CHECK(c.indices() == std::vector<int>{0, 2, 4});
  CHECK(s.position(3) == 1);
  CHECK(s.position(2) == -1);
  CHECK(s.contains(1));
  CHECK(!s.contains(0));
}

TEST_CASE("gather/scatter round trip") {
  IndexSet s(std::vector<int>{0, 2});
  Vector full = {5.0, 6.0, 7.0};
  Vector packed = s.gather(full);
  CHECK(packed == Vector{5.0, 7.0});
  Vector back = s.scatter(packed, 3);
  CHECK(back == Vector{5.0, 0.0, 7.0});
}

TEST_CASE("matrix market export header and entries") {
  SparseMatrix a(2, 2, {{0, 0, 1.5}, {1, 0, -2.0}});
  std::ostringstream os;
  write_matrix_market(a, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "%%MatrixMarket matrix coordinate real general");
  std::getline(is, line);
  CHECK(line == "2 2 2");
  std::getline(is, line);
  CHECK(line == "1 1 1.5");
  std::getline(is, line);
  CHECK(line == "2 1 -2");
}
