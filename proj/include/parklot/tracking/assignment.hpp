#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace parklot::tracking {

/// Dense row-major cost matrix with a feasibility mask. Infeasible cells are
/// never part of a solution.
class CostMatrix {
public:
  CostMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cost_(rows * cols, 0.0), feasible_(rows * cols, 1) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double cost(std::size_t r, std::size_t c) const { return cost_[r * cols_ + c]; }
  bool feasible(std::size_t r, std::size_t c) const { return feasible_[r * cols_ + c] != 0; }

  void set(std::size_t r, std::size_t c, double cost) {
    cost_[r * cols_ + c] = cost;
    feasible_[r * cols_ + c] = 1;
  }
  void forbid(std::size_t r, std::size_t c) { feasible_[r * cols_ + c] = 0; }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> cost_;
  std::vector<unsigned char> feasible_;
};

struct AssignmentResult {
  /// (row, col) pairs in ascending row order.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  double total_cost = 0.0;
};

/// Optimal assignment with the Hungarian method (shortest augmenting paths).
/// Among all matchings that use only feasible cells it returns one with the
/// largest number of pairs and, among those, the smallest total cost.
/// Feasible costs must be finite.
AssignmentResult solve_assignment(const CostMatrix& costs);

}  // namespace parklot::tracking
