#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace tvbench {

/// Dense row-major cost matrix; lower is better. Entries must be finite.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct Matching {
  /// (row, col) sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

/// Minimum-cost maximum-cardinality matching (min(rows, cols) pairs).
///
/// Shortest augmenting path with dual potentials, O(n^3). Among equally
/// cheap matchings the result is the lexicographically smallest one when
/// read row by row: row 0 takes the lowest admissible column, then row 1,
/// and so on. Non-finite entries throw kInvalidArgument.
Matching solve_assignment(const CostMatrix& cost);

/// Gated matching: pairs costing more than `max_cost` are never returned.
/// The result maximises the number of admissible pairs and, among those,
/// minimises their total cost. Ties break as in solve_assignment.
Matching threshold_match(const CostMatrix& cost, double max_cost);

}  // namespace tvbench
