#pragma once

#include <array>
#include <string>
#include <utility>

#include "convopt/lp.hpp"
#include "convopt/model.hpp"

namespace convopt {

/// Per-dimension block sizes after the r = sw*r' + r'' / s = sh*s' + s''
/// index split. The split is applied uniformly; with unit strides r'' and
/// s'' collapse to single values and b_r2 = b_s2 = 1.
struct Tiling {
  Int b_b = 1, b_c = 1, b_k = 1, b_w = 1, b_h = 1;
  Int b_r1 = 1, b_r2 = 1, b_s1 = 1, b_s2 = 1;

  std::array<Int*, 9> fields() { return {&b_b, &b_c, &b_k, &b_w, &b_h, &b_r1, &b_r2, &b_s1, &b_s2}; }
  std::array<const Int*, 9> fields() const {
    return {&b_b, &b_c, &b_k, &b_w, &b_h, &b_r1, &b_r2, &b_s1, &b_s2};
  }
  Int block_product() const {
    return b_b * b_c * b_k * b_w * b_h * b_r1 * b_r2 * b_s1 * b_s2;
  }
  bool operator==(const Tiling&) const = default;
};

/// Loop bounds of the nine lifted dimensions (b, c, k, w, h, r', r'', s', s'').
std::array<Int, 9> lifted_bounds(const ConvParams& p);

/// All Tiling invariants for (p, M): per-dimension bounds, Out and Filter
/// tiles within M, Image tile within 4M (the four-term split bound).
bool tiling_feasible(const Tiling& t, const ConvParams& p, const CacheModel& m);

/// The Eq.-8 log-space LP: 9 variables, rows in fixed order (9 nonnegativity,
/// 5 loop-bound rows, 2 stride rows, 2 filter-extent rows, Out, Filter, 4
/// Image rows); pooling omits the Filter row. theta holds log_M of
/// (B, C, K, W, H, R, S, sw, sh).
LPInstance build_tiling_lp(KernelKind kind);
LPInstance build_tiling_lp(const ConvParams& p);

/// Rational log_M approximations of the nine parameters.
std::vector<Rat> tiling_theta(const ConvParams& p, const CacheModel& m);

/// Solves the tiling LP at the layer's parameter point and materializes
/// integer blocks: floor each M^l to >= 1, repair any capacity break by
/// halving, then grow each block by single steps up to ceil(M^l) while the
/// invariants hold. For M = 1 the LP is skipped (all-ones is the only
/// feasible tiling).
Tiling solve_tiling(const ConvParams& p, const CacheModel& m);

/// Eq. 9 exponentiated: total_flops * M / prod(blocks), the round-based
/// communication cost of the blocked nest. Throws if t is infeasible.
Rat tiling_comm_cost(const Tiling& t, const ConvParams& p, const CacheModel& m);

/// Greedy splitters mirroring the appendix helper functions: fill x first,
/// then y (then z), so that the parts sum to s within the given caps.
std::pair<Rat, Rat> split2(const Rat& xbar, const Rat& ybar, const Rat& s);
std::array<Rat, 3> split3(const Rat& xbar, const Rat& ybar, const Rat& zbar, const Rat& s);

struct DecisionTreeResult {
  std::string case_label;  // "1.1" .. "1.10", "2.1", "2.2.1", "2.2.2.1", "2.2.2.2"
  Int alb_words;           // attainable lower bound, rounded down
  Tiling tiling;
};

/// Walks the unit-stride upper-bound decision tree with exact integer
/// comparisons (ties take the first matching branch) and materializes the
/// block sizes each case prescribes. Requires sigma_w = sigma_h = 1.
DecisionTreeResult stride1_decision_tree(const ConvParams& p, const CacheModel& m);

}  // namespace convopt
