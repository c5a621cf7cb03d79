#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "caei/rational.hpp"

namespace caei {

/// Solves matrix * x = rhs exactly. Rows are scaled to integers and reduced
/// with Bareiss' fraction-free elimination; only the back substitution works
/// in fractions. Free variables of an underdetermined system are pinned to 0.
/// Returns nullopt when the system is inconsistent.
inline std::optional<RationalVector> solve_linear_system(const RationalMatrix& matrix, const RationalVector& rhs) {
  const std::size_t rows = matrix.size();
  if (rhs.size() != rows) throw InputError("linear system: rhs length does not match row count");
  const std::size_t cols = rows == 0 ? 0 : matrix.front().size();
  for (const auto& row : matrix)
    if (row.size() != cols) throw InputError("linear system: ragged matrix");

  // Integer augmented matrix [A | b], each row scaled by the lcm of its denominators.
  std::vector<std::vector<Integer>> a(rows, std::vector<Integer>(cols + 1));
  for (std::size_t r = 0; r < rows; ++r) {
    Integer scale = rhs[r].get_den();
    for (const Rational& v : matrix[r]) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), v.get_den_mpz_t());
    for (std::size_t c = 0; c < cols; ++c) a[r][c] = matrix[r][c].get_num() * (scale / matrix[r][c].get_den());
    a[r][cols] = rhs[r].get_num() * (scale / rhs[r].get_den());
  }

  std::vector<std::size_t> pivot_cols;
  Integer previous = 1;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rows;
    for (std::size_t r = rank; r < rows; ++r) {
      if (sgn(a[r][c]) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot == rows) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      for (std::size_t k = c + 1; k <= cols; ++k) {
        Integer t = a[rank][c] * a[r][k] - a[r][c] * a[rank][k];
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), previous.get_mpz_t());
        a[r][k] = t;
      }
      a[r][c] = 0;
    }
    // Columns left of c in rows below are already zero; Bareiss keeps them so.
    previous = a[rank][c];
    pivot_cols.push_back(c);
    ++rank;
  }

  for (std::size_t r = rank; r < rows; ++r)
    if (sgn(a[r][cols]) != 0) return std::nullopt;

  RationalVector x(cols, Rational(0));
  for (std::size_t idx = rank; idx-- > 0;) {
    const std::size_t c = pivot_cols[idx];
    Rational acc(a[idx][cols]);
    for (std::size_t k = c + 1; k < cols; ++k)
      if (sgn(a[idx][k]) != 0 && sgn(x[k]) != 0) acc -= Rational(a[idx][k]) * x[k];
    x[c] = acc / Rational(a[idx][c]);
  }
  return x;
}

}  // namespace caei
