#pragma once

#include <optional>
#include <vector>

#include "convopt/lattice.hpp"
#include "convopt/model.hpp"
#include "convopt/numeric.hpp"

namespace convopt {

/// Term indices of the communication lower bound
///   max(BKWH, sw*sh*BCWH, CKRS, BCKWHRS/M, BCKWH*sqrt(RS*sw*sh/M));
/// pooling keeps only the first, second and fourth.
enum class BoundTerm : int {
  OutSize = 0,
  ImageProxy = 1,
  FilterSize = 2,
  Hbl = 3,
  SmallFilter = 4,
};

const char* bound_term_name(BoundTerm t);

struct BoundBreakdown {
  KernelKind kind = KernelKind::Convolution;
  Int out_size;
  Int image_proxy;                     // simplified sw*sh*B*C*W*H form
  std::optional<Int> filter_size;      // absent for pooling
  Int hbl_term;                        // floor(B*C*K*W*H*R*S / M)
  std::optional<Int> small_filter_term;  // absent for pooling; floor of the sqrt term
  Int max_term;
  BoundTerm dominant = BoundTerm::OutSize;  // exact comparison; ties take the
                                            // lowest term index

  std::vector<std::pair<BoundTerm, Int>> applicable_terms() const;
};

/// Evaluates every term of the lower bound exactly. Dominance between the
/// square-root term and the others is decided on squared rationals, never in
/// floating point; the stored word counts are the exact values rounded down.
BoundBreakdown lower_bound(const ConvParams& p, const CacheModel& m);

/// max(n^2, floor(n^2 k / sqrt(M))) for n-by-n times n-by-k matmul.
Int matmul_lower_bound(const Int& n, const Int& k, const CacheModel& m);

/// G = min(M^2, floor(sqrt(RS/(sw*sh)) * M^(3/2))): the largest number of
/// loop iterations executable on 2M resident words once filters are small.
Int max_ops_per_round(const ConvParams& p, const CacheModel& m);

struct ExponentConstraint {
  std::size_t subgroup_rank;
  std::vector<std::size_t> image_ranks;  // rank(phi_i(H)) per projection
};

struct ExponentSolution {
  std::vector<Rat> s;     // one exponent per projection, a feasible witness
  Rat total;              // sum of exponents; the LP optimum (unique)
  std::vector<ExponentConstraint> constraints_used;
};

/// Builds one inequality rank(H) <= sum_i s_i * rank(phi_i(H)) per subgroup,
/// drops trivial 0 <= 0 rows, and minimizes sum s_i with the exact simplex.
ExponentSolution hbl_exponents(const std::vector<Projection>& projections,
                               const std::vector<Subgroup>& subgroups);

}  // namespace convopt
