// SPDX-License-Identifier: Apache-2.0

#ifndef HODGETREE_COMMON_HPP
#define HODGETREE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hodgetree {

using Vector = std::vector<double>;

/// Invalid input (sizes, ranges, malformed meshes or configs).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Singular or structurally unusable matrix in a direct solve.
class SingularMatrixError : public std::runtime_error {
public:
  explicit SingularMatrixError(const std::string& what, int pivot = -1)
      : std::runtime_error(what), pivot_index(pivot) {}
  int pivot_index;
};

/// Operator failed a definiteness assumption (breakdown in LDLT/CG).
class IndefiniteOperatorError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Iterative method hit its iteration cap or diverged.
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what, int iterations = -1)
      : std::runtime_error(what), iterations(iterations) {}
  int iterations;
};

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw InvalidArgument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, Vector& x) {
  for (double& v : x) v *= alpha;
}

inline Vector subtract(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("subtract: size mismatch");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

/// Deterministic i.i.d. uniform [-1, 1] vector for the given seed.
inline Vector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

}  // namespace hodgetree

#endif
