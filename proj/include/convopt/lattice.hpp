#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "convopt/numeric.hpp"

namespace convopt {

/// Dense integer matrix, rows = generators of a lattice / rows of a linear
/// index map.
struct IntMat {
  std::size_t rows = 0, cols = 0;
  std::vector<Int> a;

  IntMat() = default;
  IntMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  Int& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Int& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  void append_row(const std::vector<Int>& r) {
    if (cols == 0) cols = r.size();
    if (r.size() != cols) throw std::invalid_argument("append_row size");
    a.insert(a.end(), r.begin(), r.end());
    ++rows;
  }

  bool operator==(const IntMat& o) const {
    return rows == o.rows && cols == o.cols && a == o.a;
  }
  bool operator<(const IntMat& o) const {
    if (rows != o.rows) return rows < o.rows;
    if (cols != o.cols) return cols < o.cols;
    return a < o.a;
  }
};

/// Row-style Hermite normal form: the unique upper-echelon basis of the row
/// lattice with positive pivots and entries above each pivot reduced into
/// [0, pivot). Zero rows are dropped, so rows == rank.
IntMat hermite_normal_form(const IntMat& m);

/// Basis of { z : z * m = 0 } (integer left kernel), rows in HNF.
IntMat left_kernel(const IntMat& m);

/// A subgroup of Z^d stored as the Hermite-form basis of its saturation, so
/// equal (and commensurable) subgroups compare equal. Only ranks over Q feed
/// the exponent machinery, and the lattice cardinalities of the kernel
/// construction are counted at this identification.
struct Subgroup {
  std::size_t dim = 0;
  IntMat basis;  // saturated HNF, rows = rank; empty for the zero subgroup

  static Subgroup zero(std::size_t d) {
    Subgroup s;
    s.dim = d;
    s.basis.cols = d;
    return s;
  }
  static Subgroup from_generators(std::size_t d, const std::vector<std::vector<Int>>& gens);

  std::size_t rank() const { return basis.rows; }
  bool is_zero() const { return basis.rows == 0; }

  bool operator==(const Subgroup& o) const { return dim == o.dim && basis == o.basis; }
  bool operator<(const Subgroup& o) const {
    if (dim != o.dim) return dim < o.dim;
    return basis < o.basis;
  }
};

Subgroup subgroup_sum(const Subgroup& x, const Subgroup& y);
Subgroup subgroup_intersection(const Subgroup& x, const Subgroup& y);

/// Z^d -> Z^m linear index map; row i holds the coefficients of output
/// coordinate i over the d loop indices.
struct Projection {
  IntMat matrix;  // m x d
  std::size_t domain_dim() const { return matrix.cols; }
  std::size_t image_dim() const { return matrix.rows; }
};

std::size_t subgroup_rank(const Subgroup& h);
std::size_t image_rank(const Projection& phi, const Subgroup& h);

class ClosureTooLarge : public std::runtime_error {
 public:
  explicit ClosureTooLarge(std::size_t cap)
      : std::runtime_error("lattice closure exceeded cap of " + std::to_string(cap)) {}
};

/// Closure of the given subgroups plus {0} under pairwise sum and
/// intersection, deduplicated via canonical bases. Deterministic discovery
/// order: generators first, then new elements as found (sums before
/// intersections per sweep).
std::vector<Subgroup> lattice_closure(const std::vector<Subgroup>& generators,
                                      std::size_t cap = 10000);

// ---------------------------------------------------------------------------
// Built-in constructions for the CNN / pooling kernels. Loop index order is
// (b, c, k, w, h, r, s) in Z^7 and (b, c, k, w, h, r', r'', s', s'') in the
// lifted Z^9.

/// phi_1 = Out subscripts (b,k,w,h); phi_2 = Image subscripts
/// (b, c, r + sw*w, s + sh*h); phi_3 = Filter subscripts (c,k,r,s).
std::vector<Projection> cnn_projections(const Int& sigma_w, const Int& sigma_h);

/// phi_1, phi_2 only (pooling has no Filter).
std::vector<Projection> pooling_projections(const Int& sigma_w, const Int& sigma_h);

/// Kernels of the three CNN projections, as subgroups of Z^7.
std::vector<Subgroup> cnn_kernels(const Int& sigma_w, const Int& sigma_h);

struct SubgroupTableRow {
  std::string label;   // e.g. "C_{2,4}"
  Subgroup subgroup;
};

/// The 11 nonzero members of lattice(C_1) .. lattice(C_5), built by closing
/// each independent generator set; row order matches the exponent-LP table.
std::vector<SubgroupTableRow> cnn_subgroup_table(const Int& sigma_w, const Int& sigma_h);

/// The 8 nonzero members of the pooling C' lattices (no C_5 = <e_b> set:
/// only two kernels remain once Filter is gone).
std::vector<SubgroupTableRow> pooling_subgroup_table(const Int& sigma_w, const Int& sigma_h);

/// Lifted 9-dimensional projections after the r = sw*r' + r'' split: every
/// index lands in exactly two of the three maps (tensor-contraction shape).
std::vector<Projection> lifted_projections();

/// The nine coordinate subgroups <e_i> of Z^9; with the lifted projections
/// these generate the exponent constraints of the small-filter bound.
std::vector<Subgroup> lifted_subgroups();

}  // namespace convopt
