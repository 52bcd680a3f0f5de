#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <vector>

namespace ptframe::detail {

// Minimum-cost assignment of each row to a distinct column (rows <= columns),
// by shortest augmenting paths over row/column potentials (Jonker-Volgenant
// flavour of the Hungarian method, O(rows^2 * cols)). Returns row -> column.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int nr = static_cast<int>(cost.rows());
  const int nc = static_cast<int>(cost.cols());
  if (nr == 0) return {};
  if (nr > nc) throw std::invalid_argument("min_cost_assignment: more rows than columns");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(nr) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(nc) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(nc) + 1, 0);  // column -> row (1-based)
  std::vector<int> way(static_cast<std::size_t>(nc) + 1, 0);

  for (int i = 1; i <= nr; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(nc) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(nc) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= nc; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      if (j1 < 0) throw std::runtime_error("min_cost_assignment: no augmenting path");
      for (int j = 0; j <= nc; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(nr), -1);
  for (int j = 1; j <= nc; ++j) {
    const int i = match[static_cast<std::size_t>(j)];
    if (i > 0) row_to_col[static_cast<std::size_t>(i) - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace ptframe::detail
