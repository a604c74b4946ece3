#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "convopt/linalg.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

enum class LPStatus { Optimal, Infeasible, Unbounded };

/// Outcome of solving  min c.x  s.t.  A x <= b  with x free. On Optimal the
/// returned point is a vertex whenever the constraint matrix has full column
/// rank (the solver drives every structural variable into the basis).
struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  std::vector<Rat> x;
  Rat objective = 0;
  std::vector<std::size_t> tight_rows;  // rows with A_i x == b_i, exact
  bool vertex = false;                  // tight rows contain n independent rows
};

/// Exact rational simplex, Bland's pivoting rule throughout: deterministic
/// and cycle-free. Two phases (single artificial column), then zero-cost
/// pivots to land on a vertex of the optimal face.
LPSolution solve_inequality_lp(const Mat& A, const std::vector<Rat>& b,
                               const std::vector<Rat>& c);

/// Parametric LP in the form  min c.x  s.t.  G x <= w + F theta.
struct LPInstance {
  std::vector<Rat> c;
  Mat G;
  std::vector<Rat> w;
  Mat F;
  std::vector<std::string> theta_names;

  std::size_t num_vars() const { return G.cols; }
  std::size_t num_rows() const { return G.rows; }
  std::vector<Rat> rhs_at(const std::vector<Rat>& theta) const {
    std::vector<Rat> b = mat_vec(F, theta);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += w[i];
    return b;
  }
};

struct VertexSolution {
  std::vector<Rat> x;
  Rat objective = 0;
  std::vector<std::size_t> tight_rows;
};

class LPError : public std::runtime_error {
 public:
  LPStatus status;
  explicit LPError(LPStatus s)
      : std::runtime_error(s == LPStatus::Infeasible ? "LP infeasible"
                                                     : "LP unbounded"),
        status(s) {}
};

/// Solves the instance at a concrete parameter point; throws LPError on
/// infeasible/unbounded and logic_error if no vertex exists.
VertexSolution simplex_solve(const LPInstance& lp, const std::vector<Rat>& theta);

}  // namespace convopt
