#pragma once

#include "resil/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace resil {

using Matrix = std::vector<std::vector<Rational>>;

/// Solves A x = b exactly by Gaussian elimination. The pivot in each column is
/// the candidate with the largest numerator magnitude (first on ties), which
/// keeps the elimination order deterministic. Throws on singular systems.
inline std::vector<Rational> solve_linear_system(Matrix a, std::vector<Rational> b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw std::invalid_argument("linear system: dimension mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = n;
    for (std::size_t r = col; r < n; ++r) {
      if (a[r][col] == 0) continue;
      if (pivot == n || abs(numerator(a[r][col])) > abs(numerator(a[pivot][col]))) pivot = r;
    }
    if (pivot == n) throw std::runtime_error("linear system is singular");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);

    std::vector<std::size_t> nz;
    for (std::size_t k = col + 1; k < n; ++k)
      if (a[col][k] != 0) nz.push_back(k);
    const Rational inv = 1 / a[col][col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational factor = a[r][col] * inv;
      for (auto k : nz) a[r][k] -= factor * a[col][k];
      b[r] -= factor * b[col];
      a[r][col] = 0;
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace resil
