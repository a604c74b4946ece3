#include "convopt/lp.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace convopt {

namespace {

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kMaxPivots = 200000;

// Dense tableau for  min c.x, A x <= b  with free structural variables.
// Columns: [0, n) structural (free), [n, n+m) slacks (>= 0), optional
// artificial column n+m (>= 0). Invariant: rows whose basic variable is
// sign-restricted keep rhs >= 0; rows basic in a free variable may go
// negative.
class Tableau {
 public:
  Tableau(const Mat& A, const std::vector<Rat>& b) : n_(A.cols), m_(A.rows) {
    cols_ = n_ + m_;
    t_.assign(m_, std::vector<Rat>(cols_, Rat(0)));
    rhs_.resize(m_);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = A(i, j);
      t_[i][n_ + i] = 1;
      rhs_[i] = b[i];
      basis_[i] = n_ + i;
    }
  }

  bool is_free(std::size_t j) const { return j < n_; }

  LPStatus run(const std::vector<Rat>& structural_cost) {
    if (!phase1()) return LPStatus::Infeasible;
    std::vector<Rat> cost(cols_, Rat(0));
    for (std::size_t j = 0; j < n_; ++j) cost[j] = structural_cost[j];
    if (!optimize(cost)) return LPStatus::Unbounded;
    vertexify();
    return LPStatus::Optimal;
  }

  std::vector<Rat> structural_solution() const {
    std::vector<Rat> x(n_, Rat(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = rhs_[i];
    return x;
  }

 private:
  std::size_t n_, m_, cols_;
  std::vector<std::vector<Rat>> t_;
  std::vector<Rat> rhs_;
  std::vector<std::size_t> basis_;
  std::size_t artificial_ = kNoRow;  // column index once added
  std::size_t pivots_ = 0;

  bool in_basis(std::size_t j) const {
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] == j) return true;
    return false;
  }

  void pivot(std::size_t r, std::size_t j) {
    if (++pivots_ > kMaxPivots) throw std::logic_error("simplex pivot cap exceeded");
    Rat p = t_[r][j];
    for (auto& v : t_[r]) v /= p;
    rhs_[r] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || t_[i][j] == 0) continue;
      Rat f = t_[i][j];
      for (std::size_t k = 0; k < cols_; ++k)
        if (t_[r][k] != 0) t_[i][k] -= f * t_[r][k];
      rhs_[i] -= f * rhs_[r];
    }
    basis_[r] = j;
  }

  // Reduced costs for the given cost vector under the current basis.
  std::vector<Rat> reduced_costs(const std::vector<Rat>& cost) const {
    std::vector<Rat> d = cost;
    for (std::size_t i = 0; i < m_; ++i) {
      const Rat& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t k = 0; k < cols_; ++k)
        if (t_[i][k] != 0) d[k] -= cb * t_[i][k];
    }
    return d;
  }

  // Ratio test for entering column j moving in direction dir (+1/-1).
  // Returns the blocking row, or kNoRow if unblocked. Bland tie-break on
  // the basic variable index.
  std::size_t ratio_test(std::size_t j, int dir) const {
    std::size_t best = kNoRow;
    Rat best_ratio;
    for (std::size_t i = 0; i < m_; ++i) {
      if (is_free(basis_[i])) continue;  // free basic vars never block
      Rat denom = dir > 0 ? t_[i][j] : Rat(-t_[i][j]);
      if (denom <= 0) continue;
      Rat ratio = rhs_[i] / denom;
      if (best == kNoRow || ratio < best_ratio ||
          (ratio == best_ratio && basis_[i] < basis_[best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  // Primal simplex loop for the given cost. Returns false on unbounded.
  bool optimize(const std::vector<Rat>& cost) {
    while (true) {
      std::vector<Rat> d = reduced_costs(cost);
      std::size_t enter = kNoRow;
      int dir = +1;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j == artificial_ && cost[j] == 0) continue;  // banned after phase 1
        if (in_basis(j)) continue;
        if (is_free(j)) {
          if (d[j] != 0) {
            enter = j;
            dir = d[j] < 0 ? +1 : -1;
            break;
          }
        } else if (d[j] < 0) {
          enter = j;
          dir = +1;
          break;
        }
      }
      if (enter == kNoRow) return true;
      std::size_t leave = ratio_test(enter, dir);
      if (leave == kNoRow) return false;
      pivot(leave, enter);
    }
  }

  bool phase1() {
    bool feasible = true;
    for (std::size_t i = 0; i < m_; ++i)
      if (rhs_[i] < 0) feasible = false;
    if (feasible) return true;

    artificial_ = cols_;
    for (std::size_t i = 0; i < m_; ++i) t_[i].push_back(Rat(-1));
    ++cols_;

    std::size_t worst = 0;
    for (std::size_t i = 1; i < m_; ++i)
      if (rhs_[i] < rhs_[worst]) worst = i;
    pivot(worst, artificial_);

    std::vector<Rat> cost(cols_, Rat(0));
    cost[artificial_] = 1;
    if (!optimize(cost)) throw std::logic_error("phase-1 LP unbounded");

    Rat art_value(0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] == artificial_) art_value = rhs_[i];
    if (art_value != 0) return false;

    // Drive a degenerate basic artificial out; an all-zero row is a
    // redundant constraint and may keep it harmlessly at value 0.
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] != artificial_) continue;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (j == artificial_ || in_basis(j)) continue;
        if (t_[i][j] != 0) {
          pivot(i, j);
          break;
        }
      }
    }
    return true;
  }

  // Zero-cost pivots bringing every structural variable into the basis, so
  // the basic point is a vertex of the optimal face. At optimality every
  // nonbasic free variable has zero reduced cost, so the objective is
  // unchanged.
  void vertexify() {
    for (std::size_t j = 0; j < n_; ++j) {
      if (in_basis(j)) continue;
      std::size_t r = ratio_test(j, +1);
      if (r == kNoRow) r = ratio_test(j, -1);
      if (r == kNoRow) continue;  // feasible set contains a line through x_j
      pivot(r, j);
    }
  }
};

}  // namespace

LPSolution solve_inequality_lp(const Mat& A, const std::vector<Rat>& b,
                               const std::vector<Rat>& c) {
  if (A.rows != b.size() || A.cols != c.size())
    throw std::invalid_argument("solve_inequality_lp shape");
  LPSolution sol;
  Tableau tab(A, b);
  sol.status = tab.run(c);
  if (sol.status != LPStatus::Optimal) return sol;
  sol.x = tab.structural_solution();
  sol.objective = dot(c, sol.x);
  Mat tight(0, A.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    if (dot(A.row(i), sol.x) == b[i]) {
      sol.tight_rows.push_back(i);
      tight.append_row(A.row(i));
    }
  }
  sol.vertex = tight.rows >= A.cols && rank_of(tight) == A.cols;
  return sol;
}

VertexSolution simplex_solve(const LPInstance& lp, const std::vector<Rat>& theta) {
  if (theta.size() != lp.F.cols) throw std::invalid_argument("theta dimension");
  LPSolution sol = solve_inequality_lp(lp.G, lp.rhs_at(theta), lp.c);
  if (sol.status != LPStatus::Optimal) throw LPError(sol.status);
  if (!sol.vertex)
    throw std::logic_error("LP optimum is not at a vertex (rank-deficient system)");
  return {sol.x, sol.objective, sol.tight_rows};
}

}  // namespace convopt
