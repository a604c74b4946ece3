#include "convopt/lattice.hpp"

#include <algorithm>
#include <set>

namespace convopt {

namespace {

void swap_rows(IntMat& m, std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t c = 0; c < m.cols; ++c) std::swap(m(i, c), m(j, c));
}

void negate_row(IntMat& m, std::size_t i) {
  for (std::size_t c = 0; c < m.cols; ++c) m(i, c) = -m(i, c);
}

// row_i -= q * row_j
void axpy_row(IntMat& m, std::size_t i, std::size_t j, const Int& q) {
  if (q == 0) return;
  for (std::size_t c = 0; c < m.cols; ++c) m(i, c) -= q * m(j, c);
}

// Echelon reduction over Z via repeated Euclid steps on rows. `u`, when
// non-null, accumulates the same row operations (starts as identity) so that
// u * original = reduced.
std::size_t hnf_in_place(IntMat& m, IntMat* u) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    // Euclid on column c below row r until a single nonzero survives.
    while (true) {
      std::size_t piv = m.rows;
      for (std::size_t i = r; i < m.rows; ++i) {
        if (m(i, c) == 0) continue;
        if (piv == m.rows ||
            boost::multiprecision::abs(m(i, c)) < boost::multiprecision::abs(m(piv, c)))
          piv = i;
      }
      if (piv == m.rows) break;  // column all zero below r
      swap_rows(m, r, piv);
      if (u) swap_rows(*u, r, piv);
      if (m(r, c) < 0) {
        negate_row(m, r);
        if (u) negate_row(*u, r);
      }
      bool cleared = true;
      for (std::size_t i = r + 1; i < m.rows; ++i) {
        if (m(i, c) == 0) continue;
        Int q = floor_div(m(i, c), m(r, c));
        axpy_row(m, i, r, q);
        if (u) axpy_row(*u, i, r, q);
        if (m(i, c) != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (m(r, c) == 0) continue;
    // Reduce entries above the pivot into [0, pivot).
    for (std::size_t i = 0; i < r; ++i) {
      Int q = floor_div(m(i, c), m(r, c));
      axpy_row(m, i, r, q);
      if (u) axpy_row(*u, i, r, q);
    }
    ++r;
  }
  return r;
}

IntMat drop_zero_rows(const IntMat& m, std::size_t rank) {
  IntMat out(rank, m.cols);
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
  out.cols = m.cols;
  return out;
}

}  // namespace

IntMat hermite_normal_form(const IntMat& m) {
  IntMat work = m;
  std::size_t rank = hnf_in_place(work, nullptr);
  return drop_zero_rows(work, rank);
}

namespace {

IntMat transpose(const IntMat& m) {
  IntMat t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

// Largest lattice with the same rational span: v is in the saturation iff it
// is orthogonal to the right kernel of the basis. Keeps commensurable
// subgroups identified, which is the identity the rank machinery uses.
IntMat saturate(const IntMat& basis, std::size_t dim) {
  IntMat right_kernel = left_kernel(transpose(basis));
  IntMat sat = left_kernel(transpose(right_kernel));
  sat.cols = dim;
  return sat;
}

}  // namespace

IntMat left_kernel(const IntMat& m) {
  IntMat work = m;
  IntMat u(m.rows, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) u(i, i) = 1;
  std::size_t rank = hnf_in_place(work, &u);
  IntMat ker(m.rows - rank, m.rows);
  for (std::size_t i = rank; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.rows; ++j) ker(i - rank, j) = u(i, j);
  return hermite_normal_form(ker);
}

Subgroup Subgroup::from_generators(std::size_t d,
                                   const std::vector<std::vector<Int>>& gens) {
  IntMat m(gens.size(), d);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (gens[i].size() != d) throw std::invalid_argument("generator dimension");
    for (std::size_t j = 0; j < d; ++j) m(i, j) = gens[i][j];
  }
  Subgroup s;
  s.dim = d;
  s.basis = saturate(hermite_normal_form(m), d);
  return s;
}

Subgroup subgroup_sum(const Subgroup& x, const Subgroup& y) {
  if (x.dim != y.dim) throw std::invalid_argument("subgroup_sum dimension");
  IntMat stacked(x.basis.rows + y.basis.rows, x.dim);
  for (std::size_t i = 0; i < x.basis.rows; ++i)
    for (std::size_t j = 0; j < x.dim; ++j) stacked(i, j) = x.basis(i, j);
  for (std::size_t i = 0; i < y.basis.rows; ++i)
    for (std::size_t j = 0; j < x.dim; ++j) stacked(x.basis.rows + i, j) = y.basis(i, j);
  Subgroup s;
  s.dim = x.dim;
  s.basis = saturate(hermite_normal_form(stacked), x.dim);
  return s;
}

Subgroup subgroup_intersection(const Subgroup& x, const Subgroup& y) {
  if (x.dim != y.dim) throw std::invalid_argument("subgroup_intersection dimension");
  if (x.is_zero() || y.is_zero()) return Subgroup::zero(x.dim);
  // v in X cap Y iff v = a*X = b*Y, i.e. (a,-b) lies in the left kernel of
  // the stacked basis [X; Y].
  const std::size_t xr = x.basis.rows, yr = y.basis.rows;
  IntMat stacked(xr + yr, x.dim);
  for (std::size_t i = 0; i < xr; ++i)
    for (std::size_t j = 0; j < x.dim; ++j) stacked(i, j) = x.basis(i, j);
  for (std::size_t i = 0; i < yr; ++i)
    for (std::size_t j = 0; j < x.dim; ++j) stacked(xr + i, j) = y.basis(i, j);
  IntMat ker = left_kernel(stacked);
  IntMat gens(ker.rows, x.dim);
  for (std::size_t i = 0; i < ker.rows; ++i)
    for (std::size_t j = 0; j < x.dim; ++j) {
      Int v(0);
      for (std::size_t t = 0; t < xr; ++t) v += ker(i, t) * x.basis(t, j);
      gens(i, j) = v;
    }
  Subgroup s;
  s.dim = x.dim;
  s.basis = saturate(hermite_normal_form(gens), x.dim);
  return s;
}

std::size_t subgroup_rank(const Subgroup& h) { return h.basis.rows; }

std::size_t image_rank(const Projection& phi, const Subgroup& h) {
  if (phi.domain_dim() != h.dim) throw std::invalid_argument("image_rank dimension");
  if (h.is_zero()) return 0;
  // Image generators as rows: basis * phi^T.
  IntMat img(h.basis.rows, phi.image_dim());
  for (std::size_t i = 0; i < h.basis.rows; ++i)
    for (std::size_t j = 0; j < phi.image_dim(); ++j) {
      Int v(0);
      for (std::size_t t = 0; t < h.dim; ++t) v += h.basis(i, t) * phi.matrix(j, t);
      img(i, j) = v;
    }
  return hermite_normal_form(img).rows;
}

std::vector<Subgroup> lattice_closure(const std::vector<Subgroup>& generators,
                                      std::size_t cap) {
  if (generators.empty()) return {};
  const std::size_t d = generators.front().dim;
  std::vector<Subgroup> members;
  std::set<Subgroup> seen;
  auto add = [&](const Subgroup& s) {
    if (seen.insert(s).second) {
      members.push_back(s);
      if (members.size() > cap) throw ClosureTooLarge(cap);
      return true;
    }
    return false;
  };
  add(Subgroup::zero(d));
  for (const auto& g : generators) {
    if (g.dim != d) throw std::invalid_argument("closure: mixed dimensions");
    add(g);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t n = members.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (add(subgroup_sum(members[i], members[j]))) changed = true;
        if (add(subgroup_intersection(members[i], members[j]))) changed = true;
      }
  }
  return members;
}

// --- CNN / pooling constructions -------------------------------------------

namespace {

Projection projection_from_rows(std::size_t d, const std::vector<std::vector<Int>>& rows) {
  Projection p;
  p.matrix = IntMat(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) p.matrix(i, j) = rows[i][j];
  return p;
}

// Index positions in Z^7: (b, c, k, w, h, r, s).
enum : std::size_t { IB = 0, IC = 1, IK = 2, IW = 3, IH = 4, IR = 5, IS = 6 };

std::vector<Int> coord7(std::size_t i) {
  std::vector<Int> v(7, Int(0));
  v[i] = 1;
  return v;
}

}  // namespace

std::vector<Projection> cnn_projections(const Int& sigma_w, const Int& sigma_h) {
  std::vector<Int> img_w = coord7(IR);
  img_w[IW] = sigma_w;
  std::vector<Int> img_h = coord7(IS);
  img_h[IH] = sigma_h;
  Projection out = projection_from_rows(7, {coord7(IB), coord7(IK), coord7(IW), coord7(IH)});
  Projection image = projection_from_rows(7, {coord7(IB), coord7(IC), img_w, img_h});
  Projection filter = projection_from_rows(7, {coord7(IC), coord7(IK), coord7(IR), coord7(IS)});
  return {out, image, filter};
}

std::vector<Projection> pooling_projections(const Int& sigma_w, const Int& sigma_h) {
  auto all = cnn_projections(sigma_w, sigma_h);
  return {all[0], all[1]};
}

std::vector<Subgroup> cnn_kernels(const Int& sigma_w, const Int& sigma_h) {
  std::vector<Int> wr = coord7(IW);  // e_w - sigma_w e_r
  wr[IR] = -sigma_w;
  std::vector<Int> hs = coord7(IH);  // e_h - sigma_h e_s
  hs[IS] = -sigma_h;
  Subgroup k1 = Subgroup::from_generators(7, {coord7(IC), coord7(IR), coord7(IS)});
  Subgroup k2 = Subgroup::from_generators(7, {coord7(IK), wr, hs});
  Subgroup k3 = Subgroup::from_generators(7, {coord7(IB), coord7(IW), coord7(IH)});
  return {k1, k2, k3};
}

namespace {

// Builds the table rows for one independent generator set C_i: generators in
// the given order, then any lattice-closure additions, skipping {0}.
void append_lattice_rows(std::vector<SubgroupTableRow>& rows, std::size_t set_index,
                         const std::vector<Subgroup>& gens) {
  auto closure = lattice_closure(gens);
  std::vector<Subgroup> ordered;
  for (const auto& g : gens) ordered.push_back(g);
  for (const auto& m : closure) {
    if (m.is_zero()) continue;
    if (std::find(ordered.begin(), ordered.end(), m) == ordered.end())
      ordered.push_back(m);
  }
  for (std::size_t j = 0; j < ordered.size(); ++j) {
    rows.push_back({"C_{" + std::to_string(set_index) + "," + std::to_string(j + 1) + "}",
                    ordered[j]});
  }
}

}  // namespace

std::vector<SubgroupTableRow> cnn_subgroup_table(const Int& sigma_w, const Int& sigma_h) {
  std::vector<Int> hs = coord7(IH);
  hs[IS] = -sigma_h;
  std::vector<Int> wr = coord7(IW);
  wr[IR] = -sigma_w;
  auto g = [&](const std::vector<Int>& v) { return Subgroup::from_generators(7, {v}); };

  std::vector<SubgroupTableRow> rows;
  append_lattice_rows(rows, 1, {g(coord7(IK))});
  append_lattice_rows(rows, 2, {g(coord7(IH)), g(coord7(IS)), g(hs)});
  append_lattice_rows(rows, 3, {g(coord7(IW)), g(coord7(IR)), g(wr)});
  append_lattice_rows(rows, 4, {g(coord7(IC))});
  append_lattice_rows(rows, 5, {g(coord7(IB))});
  return rows;
}

std::vector<SubgroupTableRow> pooling_subgroup_table(const Int& sigma_w, const Int& sigma_h) {
  std::vector<Int> hs = coord7(IH);
  hs[IS] = -sigma_h;
  std::vector<Int> wr = coord7(IW);
  wr[IR] = -sigma_w;
  auto g = [&](const std::vector<Int>& v) { return Subgroup::from_generators(7, {v}); };

  std::vector<SubgroupTableRow> rows;
  append_lattice_rows(rows, 1, {g(coord7(IK))});
  append_lattice_rows(rows, 2, {g(coord7(IS)), g(hs)});
  append_lattice_rows(rows, 3, {g(coord7(IR)), g(wr)});
  append_lattice_rows(rows, 4, {g(coord7(IC))});
  return rows;
}

std::vector<Projection> lifted_projections() {
  // Z^9 order: (b, c, k, w, h, r', r'', s', s'').
  auto coord9 = [](std::size_t i) {
    std::vector<Int> v(9, Int(0));
    v[i] = 1;
    return v;
  };
  Projection out = projection_from_rows(9, {coord9(0), coord9(2), coord9(3), coord9(4)});
  Projection image = projection_from_rows(
      9, {coord9(0), coord9(1), coord9(5), coord9(6), coord9(3), coord9(7), coord9(8), coord9(4)});
  Projection filter = projection_from_rows(
      9, {coord9(1), coord9(2), coord9(5), coord9(6), coord9(7), coord9(8)});
  return {out, image, filter};
}

std::vector<Subgroup> lifted_subgroups() {
  std::vector<Subgroup> subs;
  for (std::size_t i = 0; i < 9; ++i) {
    std::vector<Int> v(9, Int(0));
    v[i] = 1;
    subs.push_back(Subgroup::from_generators(9, {v}));
  }
  return subs;
}

}  // namespace convopt
