#pragma once

#include <cassert>
#include <limits>
#include <vector>

#include "fgent/matrix.hpp"

namespace fgent {

struct Assignment {
  std::vector<int> row_to_col;  // -1 when a row is left unmatched
  double total = 0.0;           // sum over matched real entries
};

// Optimal one-to-one partial assignment of rows to columns (rectangular
// Kuhn-Munkres with potentials, O(n^3)). Rectangles are padded to a square
// with zero-weight dummies, so with `maximize` a pair is left unmatched
// rather than matched at negative similarity.
inline Assignment optimal_alignment(const Matrix& weights, bool maximize) {
  const std::size_t n_rows = weights.rows(), n_cols = weights.cols();
  Assignment result;
  result.row_to_col.assign(n_rows, -1);
  if (n_rows == 0 || n_cols == 0) return result;

  const std::size_t n = std::max(n_rows, n_cols);
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    if (i >= n_rows || j >= n_cols) return 0.0;
    return maximize ? -weights(i, j) : weights(i, j);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      std::size_t i0 = match[j0], j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    std::size_t i = match[j];
    if (i == 0) continue;
    if (i - 1 < n_rows && j - 1 < n_cols) {
      result.row_to_col[i - 1] = static_cast<int>(j - 1);
      result.total += weights(i - 1, j - 1);
    }
  }
  return result;
}

}  // namespace fgent
