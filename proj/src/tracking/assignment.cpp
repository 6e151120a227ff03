#include "parklot/tracking/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parklot/error.hpp"

namespace parklot::tracking {

namespace {

// Classic O(n^2 m) potentials formulation for n <= m, 1-based internally.
// Returns, for each row, the assigned column.
std::vector<std::size_t> hungarian(const std::vector<double>& a, std::size_t n, std::size_t m) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

AssignmentResult solve_assignment(const CostMatrix& costs) {
  const std::size_t rows = costs.rows();
  const std::size_t cols = costs.cols();
  AssignmentResult result;

  double magnitude = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!costs.feasible(r, c)) continue;
      if (!std::isfinite(costs.cost(r, c))) throw Error("assignment: feasible cost must be finite");
      magnitude += std::abs(costs.cost(r, c));
    }
  }
  // Any infeasible cell costs more than every feasible-only difference, so the
  // solver first maximises the number of feasible pairs, then minimises cost.
  const double forbidden = 2.0 * magnitude + 1.0;

  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;
  const std::size_t m = transpose ? rows : cols;
  std::vector<double> a(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t r = transpose ? j : i;
      const std::size_t c = transpose ? i : j;
      a[i * m + j] = costs.feasible(r, c) ? costs.cost(r, c) : forbidden;
    }
  }

  std::vector<char> row_used(rows, 0);
  std::vector<char> col_used(cols, 0);
  if (n > 0) {
    const auto assigned = hungarian(a, n, m);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = transpose ? assigned[i] : i;
      const std::size_t c = transpose ? i : assigned[i];
      if (!costs.feasible(r, c)) continue;
      result.matches.emplace_back(r, c);
      result.total_cost += costs.cost(r, c);
      row_used[r] = 1;
      col_used[c] = 1;
    }
  }
  std::sort(result.matches.begin(), result.matches.end());
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_used[r]) result.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) result.unmatched_cols.push_back(c);
  }
  return result;
}

}  // namespace parklot::tracking
