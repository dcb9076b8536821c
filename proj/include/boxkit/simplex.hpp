#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "boxkit/rational.hpp"

namespace boxkit {

struct FeasibilityResult {
  bool feasible = false;
  std::vector<Rational> solution;  // structural variables only, valid when feasible
  Rational residual;               // phase-1 optimum: 0 iff feasible
};

/// Decides whether the system  A x = rhs, x >= 0  has a solution, in exact
/// rational arithmetic.
///
/// Phase-1 simplex: one artificial variable per row, minimize their sum.
/// Pivot selection follows Bland's rule (smallest eligible index, smallest
/// basic index on ratio ties), which excludes cycling, so termination needs
/// no tolerance of any kind. Artificial columns never re-enter the basis.
inline FeasibilityResult solve_nonnegative_system(std::vector<std::vector<Rational>> rows,
                                                  std::vector<Rational> rhs) {
  const std::size_t m = rows.size();
  if (rhs.size() != m) throw std::invalid_argument("simplex: rhs size mismatch");
  const std::size_t n = m == 0 ? 0 : rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != n) throw std::invalid_argument("simplex: ragged constraint matrix");
  }
  if (m == 0) return FeasibilityResult{true, std::vector<Rational>(n, Rational(0)), Rational(0)};

  for (std::size_t i = 0; i < m; ++i) {
    if (rhs[i] < 0) {
      for (auto& v : rows[i]) v = -v;
      rhs[i] = -rhs[i];
    }
  }

  // Tableau columns: structural 0..n-1, artificial n..n+m-1, then rhs.
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<Rational>> tab(m, std::vector<Rational>(cols, Rational(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab[i][j] = rows[i][j];
    tab[i][n + i] = 1;
    tab[i][cols - 1] = rhs[i];
    basis[i] = n + i;
  }

  // Reduced costs of minimizing the artificial sum, with artificials basic:
  // cost[j] = -sum_i tab[i][j]; objective value starts at sum(rhs).
  std::vector<Rational> cost(n, Rational(0));
  Rational objective(0);
  for (std::size_t i = 0; i < m; ++i) {
    objective += tab[i][cols - 1];
    for (std::size_t j = 0; j < n; ++j) cost[j] -= tab[i][j];
  }

  for (;;) {
    std::size_t entering = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (cost[j] < 0) {
        entering = j;
        break;
      }
    }
    if (entering == n) break;  // optimal

    std::size_t leaving = m;
    Rational best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab[i][entering] <= 0) continue;
      const Rational ratio = tab[i][cols - 1] / tab[i][entering];
      if (leaving == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leaving])) {
        leaving = i;
        best_ratio = ratio;
      }
    }
    if (leaving == m) {
      // Phase-1 objective is bounded below by zero; a negative reduced cost
      // always admits a ratio row.
      throw std::logic_error("simplex: unbounded phase-1 problem");
    }

    auto& pivot_row = tab[leaving];
    const Rational pivot = pivot_row[entering];
    for (auto& v : pivot_row) {
      if (v != 0) v /= pivot;
    }
    pivot_row[entering] = 1;

    for (std::size_t i = 0; i < m; ++i) {
      if (i == leaving) continue;
      const Rational factor = tab[i][entering];
      if (factor == 0) continue;
      auto& row = tab[i];
      for (std::size_t j = 0; j < cols; ++j) {
        if (pivot_row[j] != 0) row[j] -= factor * pivot_row[j];
      }
      row[entering] = 0;
    }

    const Rational cost_factor = cost[entering];
    if (cost_factor != 0) {
      for (std::size_t j = 0; j < n; ++j) {
        if (pivot_row[j] != 0) cost[j] -= cost_factor * pivot_row[j];
      }
      objective += cost_factor * pivot_row[cols - 1];
      cost[entering] = 0;
    }

    basis[leaving] = entering;
  }

  FeasibilityResult result;
  result.residual = objective;
  result.feasible = objective == 0;
  if (result.feasible) {
    result.solution.assign(n, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n) result.solution[basis[i]] = tab[i][cols - 1];
    }
  }
  return result;
}

}  // namespace boxkit
