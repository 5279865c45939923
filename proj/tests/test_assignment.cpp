#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "support.hpp"
#include "tvbench/assignment.hpp"
#include "tvbench/error.hpp"

using namespace tvbench;

namespace {

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Exhaustive search over injections of the smaller side into the larger.
// Permutations come in lexicographic order, so the first optimum found is the
// lexicographically smallest one read row by row.
Best brute_force(const CostMatrix& c) {
  Best best;
  const bool wide = c.rows() <= c.cols();
  const std::size_t small = wide ? c.rows() : c.cols(), large = wide ? c.cols() : c.rows();
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < small; ++i) pairs.emplace_back(wide ? i : perm[i], wide ? perm[i] : i);
    std::sort(pairs.begin(), pairs.end());
    double total = 0.0;
    for (auto [r, col] : pairs) total += c(r, col);
    if (total < best.cost || (total == best.cost && pairs < best.pairs)) best = {total, pairs};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

CostMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c, bool integral) {
  CostMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = integral ? static_cast<double>(rng.integer(0, 3)) : rng.uniform(-5, 5);
  }
  return m;
}

double matched_cost(const CostMatrix& c, const Matching& m) {
  double total = 0.0;
  for (auto [r, col] : m.pairs) total += c(r, col);
  return total;
}

}  // namespace

TEST(Assignment, SquareMatchesExhaustiveMinimum) {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(1, 7));
    const CostMatrix c = random_matrix(rng, n, n, false);
    const Matching m = solve_assignment(c);
    ASSERT_EQ(m.pairs.size(), n);
    EXPECT_NEAR(m.total_cost, brute_force(c).cost, 1e-9);
    EXPECT_NEAR(matched_cost(c, m), m.total_cost, 1e-12);
  }
}

TEST(Assignment, RectangularMatchesExhaustiveMinimum) {
  Rng rng(102);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = static_cast<std::size_t>(rng.integer(1, 6)), c = static_cast<std::size_t>(rng.integer(1, 6));
    const CostMatrix m = random_matrix(rng, r, c, false);
    const Matching got = solve_assignment(m);
    EXPECT_EQ(got.pairs.size(), std::min(r, c));
    EXPECT_NEAR(got.total_cost, brute_force(m).cost, 1e-9);
  }
}

TEST(Assignment, TiesBreakLexicographically) {
  Rng rng(103);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = static_cast<std::size_t>(rng.integer(1, 5)), c = static_cast<std::size_t>(rng.integer(1, 5));
    const CostMatrix m = random_matrix(rng, r, c, true);
    const Best want = brute_force(m);
    const Matching got = solve_assignment(m);
    EXPECT_EQ(got.total_cost, want.cost);
    EXPECT_EQ(got.pairs, want.pairs);
  }
  const Matching zeros = solve_assignment(CostMatrix(3, 3, 0.0));
  EXPECT_EQ(zeros.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}, {2, 2}}));
}

TEST(Assignment, EmptyAndInvalid) {
  EXPECT_TRUE(solve_assignment(CostMatrix(0, 3)).pairs.empty());
  CostMatrix bad(2, 2, 0.0);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_assignment(bad), Error);
  bad(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(solve_assignment(bad), Error);
}

TEST(Assignment, HandExample) {
  const CostMatrix c{{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  const Matching m = solve_assignment(c);
  EXPECT_DOUBLE_EQ(m.total_cost, 5.0);
  EXPECT_EQ(m.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}, {2, 2}}));
}

namespace {

// Every partial injection using only admissible pairs; most pairs first,
// then least cost.
void search(const CostMatrix& c, double gate, std::size_t row, std::vector<bool>& used,
            std::vector<std::pair<std::size_t, std::size_t>>& cur, double cost, std::size_t& best_n, double& best_cost) {
  if (row == c.rows()) {
    if (cur.size() > best_n || (cur.size() == best_n && cost < best_cost - 1e-12)) {
      best_n = cur.size();
      best_cost = cost;
    }
    return;
  }
  search(c, gate, row + 1, used, cur, cost, best_n, best_cost);
  for (std::size_t j = 0; j < c.cols(); ++j) {
    if (used[j] || c(row, j) > gate) continue;
    used[j] = true;
    cur.emplace_back(row, j);
    search(c, gate, row + 1, used, cur, cost + c(row, j), best_n, best_cost);
    cur.pop_back();
    used[j] = false;
  }
}

}  // namespace

TEST(ThresholdMatch, MaximisesAdmissiblePairsThenMinimisesCost) {
  Rng rng(104);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t r = static_cast<std::size_t>(rng.integer(0, 5)), c = static_cast<std::size_t>(rng.integer(0, 5));
    CostMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.uniform(0, 1);
    }
    const double gate = rng.uniform(0.1, 0.9);
    std::vector<bool> used(c, false);
    std::vector<std::pair<std::size_t, std::size_t>> cur;
    std::size_t best_n = 0;
    double best_cost = 0.0;
    search(m, gate, 0, used, cur, 0.0, best_n, best_cost);
    const Matching got = threshold_match(m, gate);
    EXPECT_EQ(got.pairs.size(), best_n);
    EXPECT_NEAR(got.total_cost, best_cost, 1e-9);
    for (auto [i, j] : got.pairs) EXPECT_LE(m(i, j), gate);
  }
}

TEST(ThresholdMatch, PrefersTwoPairsOverOneCheapPair) {
  // The global minimum would take the 0.1 pair and leave the other row out
  // of the gate; two admissible pairs must win.
  const CostMatrix c{{0.1, 0.6}, {0.65, 0.9}};
  const Matching m = threshold_match(c, 0.7);
  EXPECT_EQ(m.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}}));
}
