#include "tvbench/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tvbench/error.hpp"

namespace tvbench {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw Error(ErrorCode::kInvalidArgument, "CostMatrix: value count does not match shape");
  }
}

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  values_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw Error(ErrorCode::kInvalidArgument, "CostMatrix: ragged rows");
    values_.insert(values_.end(), row.begin(), row.end());
  }
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

class SquareSolver {
 public:
  explicit SquareSolver(std::vector<double> cost, std::size_t n) : c_(std::move(cost)), n_(n) {}

  // Row -> column assignment of a minimum-cost perfect matching.
  std::vector<std::size_t> solve() {
    augment_all();
    std::vector<std::size_t> row_to_col(n_, kNone);
    for (std::size_t j = 1; j <= n_; ++j) row_to_col[p_[j] - 1] = j - 1;
    canonicalize(row_to_col);
    return row_to_col;
  }

 private:
  double at(std::size_t i, std::size_t j) const { return c_[i * n_ + j]; }

  // Shortest augmenting paths with potentials (1-based, column 0 is the
  // virtual root). Strict comparisons keep the lowest column on ties, except
  // that an unassigned column beats an assigned one of equal reduced cost.
  void augment_all() {
    const double inf = std::numeric_limits<double>::infinity();
    u_.assign(n_ + 1, 0.0);
    v_.assign(n_ + 1, 0.0);
    p_.assign(n_ + 1, 0);
    std::vector<std::size_t> way(n_ + 1, 0);
    std::vector<double> minv(n_ + 1);
    std::vector<char> used(n_ + 1);
    for (std::size_t i = 1; i <= n_; ++i) {
      p_[0] = i;
      std::size_t j0 = 0;
      std::fill(minv.begin(), minv.end(), inf);
      std::fill(used.begin(), used.end(), 0);
      do {
        used[j0] = 1;
        const std::size_t i0 = p_[j0];
        double delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n_; ++j) {
          if (used[j]) continue;
          const double cur = at(i0 - 1, j - 1) - u_[i0] - v_[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta || (minv[j] == delta && p_[j] == 0 && p_[j1] != 0)) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (std::size_t j = 0; j <= n_; ++j) {
          if (used[j]) {
            u_[p_[j]] += delta;
            v_[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p_[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        p_[j0] = p_[j1];
        j0 = j1;
      } while (j0 != 0);
    }
  }

  // Rewrites an optimal matching into the lexicographically smallest optimal
  // one. Optimal matchings are exactly the perfect matchings on edges whose
  // reduced cost is zero under the final potentials, so each row greedily
  // takes the lowest tight column for which the still-unfixed rows can be
  // re-matched along an alternating path.
  void canonicalize(std::vector<std::size_t>& row_to_col) const {
    double scale = 1.0;
    for (double x : c_) scale = std::max(scale, std::abs(x));
    const double tol = 1e-9 * scale;

    std::vector<char> tight(n_ * n_, 0);
    std::size_t tight_count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const bool t = at(i, j) - u_[i + 1] - v_[j + 1] <= tol;
        tight[i * n_ + j] = t;
        tight_count += t;
      }
    }
    if (tight_count == n_) return;  // unique optimum

    std::vector<std::size_t> col_to_row(n_);
    for (std::size_t i = 0; i < n_; ++i) col_to_row[row_to_col[i]] = i;
    std::vector<char> fixed(n_, 0);
    std::vector<char> visited(n_);

    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < row_to_col[i]; ++j) {
        if (!tight[i * n_ + j]) continue;
        const std::size_t holder = col_to_row[j];
        if (fixed[holder]) continue;
        // Move row i to column j; `holder` must reach the freed column.
        const std::size_t freed = row_to_col[i];
        std::vector<std::size_t> path_rows;
        std::vector<std::size_t> path_cols;
        std::fill(visited.begin(), visited.end(), 0);
        visited[j] = 1;
        if (find_path(holder, freed, tight, fixed, i, row_to_col, col_to_row, visited, path_rows,
                      path_cols)) {
          for (std::size_t k = 0; k < path_rows.size(); ++k) {
            row_to_col[path_rows[k]] = path_cols[k];
            col_to_row[path_cols[k]] = path_rows[k];
          }
          row_to_col[i] = j;
          col_to_row[j] = i;
          break;
        }
      }
      fixed[i] = 1;
    }
  }

  // Depth-first alternating path from `row` to column `target` through rows
  // that are neither fixed nor `skip`. On success the (row, new column)
  // assignments are appended to path_rows/path_cols.
  bool find_path(std::size_t row, std::size_t target, const std::vector<char>& tight,
                 const std::vector<char>& fixed, std::size_t skip,
                 const std::vector<std::size_t>& row_to_col,
                 const std::vector<std::size_t>& col_to_row, std::vector<char>& visited,
                 std::vector<std::size_t>& path_rows, std::vector<std::size_t>& path_cols) const {
    for (std::size_t c = 0; c < n_; ++c) {
      if (visited[c] || !tight[row * n_ + c]) continue;
      visited[c] = 1;
      if (c == target) {
        path_rows.push_back(row);
        path_cols.push_back(c);
        return true;
      }
      const std::size_t next = col_to_row[c];
      if (fixed[next] || next == skip) continue;
      if (find_path(next, target, tight, fixed, skip, row_to_col, col_to_row, visited, path_rows,
                    path_cols)) {
        path_rows.push_back(row);
        path_cols.push_back(c);
        return true;
      }
    }
    return false;
  }

  std::vector<double> c_;
  std::size_t n_;
  std::vector<double> u_, v_;
  std::vector<std::size_t> p_;
};

void check_finite(const CostMatrix& cost) {
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    for (std::size_t c = 0; c < cost.cols(); ++c) {
      if (!std::isfinite(cost(r, c))) {
        throw Error(ErrorCode::kInvalidArgument, "cost matrix entry (" + std::to_string(r) + "," +
                                                     std::to_string(c) + ") is not finite");
      }
    }
  }
}

// Pads to square with zeros. Every perfect matching of the padded matrix
// uses exactly |rows - cols| padding cells, so the pad value never changes
// which real pairs are optimal.
std::vector<std::size_t> solve_padded(const CostMatrix& cost, auto&& entry) {
  const std::size_t n = std::max(cost.rows(), cost.cols());
  std::vector<double> square(n * n, 0.0);
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    for (std::size_t c = 0; c < cost.cols(); ++c) square[r * n + c] = entry(r, c);
  }
  return SquareSolver(std::move(square), n).solve();
}

}  // namespace

Matching solve_assignment(const CostMatrix& cost) {
  check_finite(cost);
  Matching out;
  if (cost.empty()) return out;
  const auto row_to_col = solve_padded(cost, [&](std::size_t r, std::size_t c) { return cost(r, c); });
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    if (row_to_col[r] < cost.cols()) {
      out.pairs.emplace_back(r, row_to_col[r]);
      out.total_cost += cost(r, row_to_col[r]);
    }
  }
  return out;
}

Matching threshold_match(const CostMatrix& cost, double max_cost) {
  check_finite(cost);
  Matching out;
  if (cost.empty() || !std::isfinite(max_cost)) return out;

  bool any = false;
  double lo = max_cost;
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    for (std::size_t c = 0; c < cost.cols(); ++c) {
      if (cost(r, c) <= max_cost) {
        any = true;
        lo = std::min(lo, cost(r, c));
      }
    }
  }
  if (!any) return out;

  // One inflated pair must outweigh any spread of admissible costs across a
  // full matching, so cardinality dominates and cost breaks ties.
  const double m = static_cast<double>(std::min(cost.rows(), cost.cols()));
  const double inflated = lo + (m + 1.0) * (max_cost - lo + 1.0);
  const auto row_to_col = solve_padded(cost, [&](std::size_t r, std::size_t c) {
    return cost(r, c) <= max_cost ? cost(r, c) : inflated;
  });
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    const std::size_t c = row_to_col[r];
    if (c < cost.cols() && cost(r, c) <= max_cost) {
      out.pairs.emplace_back(r, c);
      out.total_cost += cost(r, c);
    }
  }
  return out;
}

}  // namespace tvbench
