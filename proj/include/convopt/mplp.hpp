#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "convopt/lp.hpp"
#include "convopt/model.hpp"

namespace convopt {

/// Polyhedron { theta : A theta <= b } in parameter space.
struct Region {
  Mat A;
  std::vector<Rat> b;
  std::size_t dim = 0;

  static Region whole(std::size_t d) { return {Mat(0, d), {}, d}; }
  void add_row(const std::vector<Rat>& coeffs, const Rat& rhs) {
    A.append_row(coeffs);
    b.push_back(rhs);
  }
};

/// x_hat(theta) = E theta + e: the optimal LP solution as an affine map on
/// its owning region.
struct AffineOptimizer {
  Mat E;
  std::vector<Rat> e;
  std::vector<Rat> at(const std::vector<Rat>& theta) const {
    std::vector<Rat> x = mat_vec(E, theta);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += e[i];
    return x;
  }
};

struct Piece {
  Region region;
  AffineOptimizer optimizer;
};

struct Partition {
  Region parent;
  std::vector<Piece> pieces;
};

struct ChebyshevResult {
  bool feasible = false;
  Rat radius = 0;            // inf-norm inscribed-ball radius, capped at 1
  std::vector<Rat> center;
};

/// Largest inf-norm ball inside the region (support via l1 row norms keeps
/// everything rational). Infeasible result means the region is empty;
/// radius 0 means nonempty but lower-dimensional.
ChebyshevResult chebyshev_center(const Region& r);

bool region_is_empty(const Region& r);
bool region_is_full_dim(const Region& r);

/// Deterministic splittable RNG for sampling.
struct SampleRng {
  std::uint64_t state;
  explicit SampleRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  /// Uniform rational in [-1, 1] with denominator 2^20.
  Rat unit();
};

/// Chebyshev center nudged by a seeded rational offset of at most half the
/// ball radius per coordinate; stays strictly interior. Throws on empty or
/// lower-dimensional regions.
std::vector<Rat> sample_interior(const Region& r, SampleRng& rng);

/// Scales rows to primitive integer form, drops duplicates and trivially
/// true rows. Returns false if a row is trivially unsatisfiable.
bool normalize_region(Region& r);

/// Drops every row implied by the others (one LP per row).
Region remove_redundant_rows(const Region& r);

class DegenerateSamplingExhausted : public std::runtime_error {
 public:
  DegenerateSamplingExhausted()
      : std::runtime_error("mpLP sampling kept hitting degenerate points") {}
};

struct PartitionOptions {
  int max_sample_retries = 32;
  std::size_t piece_cap = 100000;
};

/// The geometric mpLP partitioning algorithm: sample a parameter point,
/// solve, read the optimizer off the tight rows, carve out the region where
/// that optimizer stays optimal, and recurse on the complement cells.
/// Identical seeds produce identical partitions.
Partition partition_parameter_space(const LPInstance& lp, const Region& parent,
                                    std::uint64_t rng_seed,
                                    const PartitionOptions& opts = {});

/// Affine function a . theta + c over the 9 parameter coordinates.
struct AffineForm {
  std::vector<Rat> coeffs;
  Rat constant = 0;
  Rat eval(const std::vector<Rat>& theta) const { return dot(coeffs, theta) + constant; }
};

/// Log-space lower-bound terms (5 for convolution, 3 for pooling) in theta
/// coordinates, with log_M M = 1.
std::vector<AffineForm> log_bound_forms(KernelKind kind);

/// Log of the blocked nest's communication cost for a piece's optimizer:
/// sum of the seven loop-bound logs, plus 1, minus the block-size logs.
AffineForm log_cost_form(const AffineOptimizer& opt);

struct GapEntry {
  std::size_t piece_index = 0;
  int bound_index = 0;                  // into log_bound_forms(kind)
  std::optional<Rat> max_gap;           // empty if the dominance set is empty
  Rat min_gap = 0;                      // over the full piece
};

struct VerificationReport {
  std::size_t num_regions = 0;
  std::vector<GapEntry> entries;
  bool all_max_gaps_zero = true;
  bool all_min_gaps_nonneg = true;
  bool ok() const { return all_max_gaps_zero && all_min_gaps_nonneg; }
};

/// For every (piece, bound) pair: maximize cost - bound over the subset of
/// the piece where that bound dominates the rest and is at least M (gap must
/// be exactly zero), and minimize cost - bound over the whole piece (must be
/// nonnegative).
VerificationReport verify_attainability(const Partition& part, KernelKind kind);

/// Validity polytope of the CNN parameters in log space: nonnegative logs,
/// log sw <= log R <= log sw + log W (and the h analogue), and a box bound
/// theta <= theta_max as the analysis horizon.
Region cnn_parent_region(int theta_max = 8);

}  // namespace convopt
