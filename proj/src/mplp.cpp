#include "convopt/mplp.hpp"

#include <algorithm>
#include <set>

namespace convopt {

namespace {

Rat l1_norm(const std::vector<Rat>& v) {
  Rat s(0);
  for (const auto& x : v) s += boost::multiprecision::abs(x);
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t SampleRng::next() {
  state = splitmix64(state);
  return state;
}

Rat SampleRng::unit() {
  const std::int64_t span = 1 << 20;
  std::int64_t k = static_cast<std::int64_t>(next() % (2 * span + 1)) - span;
  return Rat(Int(k), Int(span));
}

ChebyshevResult chebyshev_center(const Region& r) {
  // Variables (theta, rho): maximize rho subject to
  // A_i theta + |A_i|_1 rho <= b_i, 0 <= rho <= 1.
  const std::size_t d = r.dim;
  Mat A(0, d + 1);
  std::vector<Rat> b;
  for (std::size_t i = 0; i < r.A.rows; ++i) {
    std::vector<Rat> row = r.A.row(i);
    row.push_back(l1_norm(row));
    A.append_row(row);
    b.push_back(r.b[i]);
  }
  std::vector<Rat> lo(d + 1, Rat(0)), hi(d + 1, Rat(0));
  lo[d] = -1;
  hi[d] = 1;
  A.append_row(lo);
  b.push_back(Rat(0));
  A.append_row(hi);
  b.push_back(Rat(1));

  std::vector<Rat> c(d + 1, Rat(0));
  c[d] = -1;
  LPSolution sol = solve_inequality_lp(A, b, c);
  ChebyshevResult res;
  if (sol.status == LPStatus::Infeasible) return res;
  if (sol.status != LPStatus::Optimal)
    throw std::logic_error("chebyshev LP unbounded despite radius cap");
  res.feasible = true;
  res.radius = sol.x[d];
  res.center.assign(sol.x.begin(), sol.x.begin() + d);
  return res;
}

bool region_is_empty(const Region& r) { return !chebyshev_center(r).feasible; }

bool region_is_full_dim(const Region& r) {
  auto c = chebyshev_center(r);
  return c.feasible && c.radius > 0;
}

std::vector<Rat> sample_interior(const Region& r, SampleRng& rng) {
  auto c = chebyshev_center(r);
  if (!c.feasible) throw std::domain_error("sample_interior: empty region");
  if (c.radius == 0) throw std::domain_error("sample_interior: lower-dimensional region");
  Rat half = c.radius / 2;
  for (auto& x : c.center) x += half * rng.unit();
  return c.center;
}

bool normalize_region(Region& r) {
  Mat A(0, r.dim);
  std::vector<Rat> b;
  std::set<std::pair<std::vector<Rat>, Rat>> seen;
  for (std::size_t i = 0; i < r.A.rows; ++i) {
    std::vector<Rat> row = r.A.row(i);
    Rat rhs = r.b[i];
    // Scale by the positive lcm of denominators / gcd of numerators.
    Int lcm(1), gcd(0);
    for (const auto& v : row) {
      lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(v));
      gcd = boost::multiprecision::gcd(gcd, boost::multiprecision::numerator(v));
    }
    if (gcd == 0) {  // all-zero coefficients
      if (rhs < 0) return false;
      continue;
    }
    // gcd of the scaled integer entries: entries are num * (lcm/den).
    Int g(0);
    for (const auto& v : row)
      g = boost::multiprecision::gcd(
          g, boost::multiprecision::numerator(v) * (lcm / boost::multiprecision::denominator(v)));
    Rat scale(lcm, g);
    for (auto& v : row) v *= scale;
    rhs *= scale;
    if (seen.insert({row, rhs}).second) {
      A.append_row(row);
      b.push_back(rhs);
    }
  }
  r.A = std::move(A);
  r.b = std::move(b);
  return true;
}

Region remove_redundant_rows(const Region& r) {
  Region out = r;
  if (!normalize_region(out)) throw std::domain_error("remove_redundant_rows: empty region");
  std::size_t i = 0;
  while (i < out.A.rows) {
    Region rest{Mat(0, out.dim), {}, out.dim};
    for (std::size_t j = 0; j < out.A.rows; ++j) {
      if (j == i) continue;
      rest.add_row(out.A.row(j), out.b[j]);
    }
    std::vector<Rat> c = out.A.row(i);
    for (auto& v : c) v = -v;  // maximize A_i . theta
    LPSolution sol = solve_inequality_lp(rest.A, rest.b, c);
    bool redundant = sol.status == LPStatus::Optimal && -sol.objective <= out.b[i];
    if (redundant) {
      out = rest;
    } else {
      ++i;
    }
  }
  return out;
}

namespace {

// Derives x_hat(theta) = E theta + e from the tight rows of a vertex
// solution. Returns false when the tight system pins theta itself (the
// measure-zero degenerate-sample case, "D, r != 0").
bool optimizer_from_tight_rows(const LPInstance& lp, const std::vector<std::size_t>& tight,
                               AffineOptimizer& out) {
  const std::size_t n = lp.num_vars(), d = lp.F.cols;
  // Augmented system [G_t | -F_t | w_t] over columns (x, theta, 1).
  Mat sys(0, n + d + 1);
  for (std::size_t idx : tight) {
    std::vector<Rat> row(n + d + 1);
    for (std::size_t j = 0; j < n; ++j) row[j] = lp.G(idx, j);
    for (std::size_t j = 0; j < d; ++j) row[n + j] = -lp.F(idx, j);
    row[n + d] = lp.w[idx];
    sys.append_row(row);
  }
  // Eliminate on the x block.
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < sys.rows; ++c) {
    std::size_t piv = rank;
    while (piv < sys.rows && sys(piv, c) == 0) ++piv;
    if (piv == sys.rows) continue;
    for (std::size_t j = 0; j < sys.cols; ++j) std::swap(sys(rank, j), sys(piv, j));
    Rat dvd = sys(rank, c);
    for (std::size_t j = 0; j < sys.cols; ++j) sys(rank, j) /= dvd;
    for (std::size_t i = 0; i < sys.rows; ++i) {
      if (i == rank || sys(i, c) == 0) continue;
      Rat f = sys(i, c);
      for (std::size_t j = 0; j < sys.cols; ++j) sys(i, j) -= f * sys(rank, j);
    }
    ++rank;
  }
  if (rank < n) return false;  // vertex guarantees full x-rank; treat as degenerate
  // Remaining rows constrain theta alone: any nonzero entry there means the
  // sample sat on a partition boundary.
  for (std::size_t i = rank; i < sys.rows; ++i)
    for (std::size_t j = n; j < sys.cols; ++j)
      if (sys(i, j) != 0) return false;
  // Row k of the eliminated block reads x_k + P theta = q.
  out.E = Mat(n, d);
  out.e.assign(n, Rat(0));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t col = 0;
    while (col < n && sys(i, col) == 0) ++col;
    for (std::size_t j = 0; j < d; ++j) out.E(col, j) = -sys(i, n + j);
    out.e[col] = sys(i, n + d);
  }
  return true;
}

struct PartitionWorker {
  const LPInstance& lp;
  const PartitionOptions& opts;
  std::vector<Piece> pieces;

  void recurse(Region region, std::uint64_t seed) {
    if (!normalize_region(region)) return;
    auto cheb = chebyshev_center(region);
    if (!cheb.feasible || cheb.radius == 0) return;

    AffineOptimizer opt;
    bool found = false;
    for (int attempt = 0; attempt < opts.max_sample_retries && !found; ++attempt) {
      SampleRng rng(splitmix64(seed ^ static_cast<std::uint64_t>(attempt)));
      std::vector<Rat> theta0 = sample_interior(region, rng);
      VertexSolution sol = simplex_solve(lp, theta0);
      found = optimizer_from_tight_rows(lp, sol.tight_rows, opt);
      if (!found) continue;
      // Guard: the sample must land strictly inside its own optimality
      // region, otherwise resample.
      std::vector<Rat> x0 = opt.at(theta0);
      std::vector<Rat> rhs = lp.rhs_at(theta0);
      std::vector<Rat> gx = mat_vec(lp.G, x0);
      for (std::size_t i = 0; i < gx.size() && found; ++i)
        if (gx[i] > rhs[i]) found = false;
    }
    if (!found) throw DegenerateSamplingExhausted();

    // Slack rows of the optimizer become the candidate region rows:
    // G_i (E theta + e) <= w_i + F_i theta.
    std::vector<std::vector<Rat>> new_rows;
    std::vector<Rat> new_rhs;
    {
      Mat ge(lp.G.rows, lp.F.cols);
      for (std::size_t i = 0; i < lp.G.rows; ++i)
        for (std::size_t j = 0; j < lp.F.cols; ++j) {
          Rat v(0);
          for (std::size_t t = 0; t < lp.num_vars(); ++t)
            if (lp.G(i, t) != 0 && opt.E(t, j) != 0) v += lp.G(i, t) * opt.E(t, j);
          ge(i, j) = v - lp.F(i, j);
        }
      for (std::size_t i = 0; i < lp.G.rows; ++i) {
        std::vector<Rat> row = ge.row(i);
        Rat rhs = lp.w[i] - dot(lp.G.row(i), opt.e);
        bool zero = std::all_of(row.begin(), row.end(), [](const Rat& v) { return v == 0; });
        if (zero) continue;  // holds identically (tight row or constant slack)
        new_rows.push_back(std::move(row));
        new_rhs.push_back(rhs);
      }
    }

    // Contextual redundancy filter over (region rows + other new rows).
    std::vector<std::size_t> kept;
    {
      std::vector<bool> dropped(new_rows.size(), false);
      for (std::size_t i = 0; i < new_rows.size(); ++i) {
        Region rest = region;
        for (std::size_t j = 0; j < new_rows.size(); ++j)
          if (j != i && !dropped[j]) rest.add_row(new_rows[j], new_rhs[j]);
        std::vector<Rat> c = new_rows[i];
        for (auto& v : c) v = -v;
        LPSolution sol = solve_inequality_lp(rest.A, rest.b, c);
        if (sol.status == LPStatus::Optimal && -sol.objective <= new_rhs[i])
          dropped[i] = true;
      }
      for (std::size_t i = 0; i < new_rows.size(); ++i)
        if (!dropped[i]) kept.push_back(i);
    }

    Region piece_region = region;
    for (std::size_t i : kept) piece_region.add_row(new_rows[i], new_rhs[i]);
    piece_region = remove_redundant_rows(piece_region);
    if (!region_is_full_dim(piece_region))
      throw std::logic_error("mpLP piece collapsed to lower dimension");
    pieces.push_back({piece_region, opt});
    if (pieces.size() > opts.piece_cap)
      throw std::logic_error("mpLP piece cap exceeded");

    // Complement cells: violate the i-th kept row, satisfy rows before it,
    // inside the current region. Closed complements overlap on facets only.
    for (std::size_t ci = 0; ci < kept.size(); ++ci) {
      Region cell = region;
      for (std::size_t cj = 0; cj < ci; ++cj)
        cell.add_row(new_rows[kept[cj]], new_rhs[kept[cj]]);
      std::vector<Rat> neg = new_rows[kept[ci]];
      for (auto& v : neg) v = -v;
      cell.add_row(neg, -new_rhs[kept[ci]]);
      recurse(std::move(cell), splitmix64(seed + 0x517cc1b727220a95ULL * (ci + 1)));
    }
  }
};

}  // namespace

Partition partition_parameter_space(const LPInstance& lp, const Region& parent,
                                    std::uint64_t rng_seed, const PartitionOptions& opts) {
  PartitionWorker worker{lp, opts, {}};
  worker.recurse(parent, splitmix64(rng_seed));
  return {parent, std::move(worker.pieces)};
}

std::vector<AffineForm> log_bound_forms(KernelKind kind) {
  enum : std::size_t { TB = 0, TC, TK, TW, TH, TR, TS, TSW, TSH };
  auto make = [](std::initializer_list<std::pair<std::size_t, Rat>> terms, Rat constant) {
    AffineForm f;
    f.coeffs.assign(9, Rat(0));
    for (auto& [j, v] : terms) f.coeffs[j] += v;
    f.constant = constant;
    return f;
  };
  Rat one(1), half(1, 2);
  std::vector<AffineForm> forms;
  forms.push_back(make({{TB, one}, {TK, one}, {TW, one}, {TH, one}}, Rat(0)));
  forms.push_back(
      make({{TSW, one}, {TSH, one}, {TB, one}, {TC, one}, {TW, one}, {TH, one}}, Rat(0)));
  if (kind == KernelKind::Convolution)
    forms.push_back(make({{TC, one}, {TK, one}, {TR, one}, {TS, one}}, Rat(0)));
  forms.push_back(make(
      {{TB, one}, {TC, one}, {TK, one}, {TW, one}, {TH, one}, {TR, one}, {TS, one}}, Rat(-1)));
  if (kind == KernelKind::Convolution)
    forms.push_back(make({{TB, one}, {TC, one}, {TK, one}, {TW, one}, {TH, one},
                          {TR, half}, {TS, half}, {TSW, half}, {TSH, half}},
                         Rat(-1, 2)));
  return forms;
}

AffineForm log_cost_form(const AffineOptimizer& opt) {
  const std::size_t dims = opt.E.cols;
  AffineForm f;
  f.coeffs.assign(dims, Rat(0));
  // Loop-bound logs B..S; the two stride coordinates do not enter Eq. 9.
  for (std::size_t j = 0; j < std::min<std::size_t>(7, dims); ++j) f.coeffs[j] = 1;
  f.constant = 1;
  for (std::size_t i = 0; i < opt.E.rows; ++i) {
    for (std::size_t j = 0; j < dims; ++j) f.coeffs[j] -= opt.E(i, j);
    f.constant -= opt.e[i];
  }
  return f;
}

VerificationReport verify_attainability(const Partition& part, KernelKind kind) {
  auto bounds = log_bound_forms(kind);
  VerificationReport report;
  report.num_regions = part.pieces.size();

  for (std::size_t pi = 0; pi < part.pieces.size(); ++pi) {
    const Piece& piece = part.pieces[pi];
    AffineForm cost = log_cost_form(piece.optimizer);
    for (std::size_t bi = 0; bi < bounds.size(); ++bi) {
      AffineForm diff;  // cost - bound_i
      diff.coeffs.assign(9, Rat(0));
      for (std::size_t j = 0; j < 9; ++j)
        diff.coeffs[j] = cost.coeffs[j] - bounds[bi].coeffs[j];
      diff.constant = cost.constant - bounds[bi].constant;

      GapEntry entry;
      entry.piece_index = pi;
      entry.bound_index = static_cast<int>(bi);

      // Sanity minimization over the whole piece: cost may never dip below
      // any bound.
      {
        LPSolution sol = solve_inequality_lp(piece.region.A, piece.region.b, diff.coeffs);
        if (sol.status != LPStatus::Optimal)
          throw std::logic_error("verify: piece LP not optimal");
        entry.min_gap = sol.objective + diff.constant;
        if (entry.min_gap < 0) report.all_min_gaps_nonneg = false;
      }

      // Max gap over the dominance set of bound i, excluding bounds below M
      // (log form: L_i >= 1).
      {
        Region dom = piece.region;
        for (std::size_t bj = 0; bj < bounds.size(); ++bj) {
          if (bj == bi) continue;
          std::vector<Rat> row(9);
          for (std::size_t j = 0; j < 9; ++j)
            row[j] = bounds[bj].coeffs[j] - bounds[bi].coeffs[j];
          dom.add_row(row, bounds[bi].constant - bounds[bj].constant);
        }
        std::vector<Rat> ge1(9);
        for (std::size_t j = 0; j < 9; ++j) ge1[j] = -bounds[bi].coeffs[j];
        dom.add_row(ge1, bounds[bi].constant - 1);

        std::vector<Rat> c(9);
        for (std::size_t j = 0; j < 9; ++j) c[j] = -diff.coeffs[j];
        LPSolution sol = solve_inequality_lp(dom.A, dom.b, c);
        if (sol.status == LPStatus::Optimal) {
          entry.max_gap = -sol.objective + diff.constant;
          if (*entry.max_gap != 0) report.all_max_gaps_zero = false;
        } else if (sol.status == LPStatus::Unbounded) {
          throw std::logic_error("verify: dominance LP unbounded");
        }
      }
      report.entries.push_back(std::move(entry));
    }
  }
  return report;
}

Region cnn_parent_region(int theta_max) {
  enum : std::size_t { TB = 0, TC, TK, TW, TH, TR, TS, TSW, TSH };
  Region r = Region::whole(9);
  for (std::size_t j = 0; j < 9; ++j) {
    std::vector<Rat> row(9, Rat(0));
    row[j] = -1;
    r.add_row(row, Rat(0));  // theta_j >= 0
  }
  for (std::size_t j = 0; j < 9; ++j) {
    std::vector<Rat> row(9, Rat(0));
    row[j] = 1;
    r.add_row(row, Rat(theta_max));
  }
  auto add = [&](std::initializer_list<std::pair<std::size_t, int>> terms, int rhs) {
    std::vector<Rat> row(9, Rat(0));
    for (auto [j, v] : terms) row[j] = v;
    r.add_row(row, Rat(rhs));
  };
  add({{TSW, 1}, {TR, -1}}, 0);             // log sw <= log R
  add({{TR, 1}, {TSW, -1}, {TW, -1}}, 0);   // log R <= log sw + log W
  add({{TSH, 1}, {TS, -1}}, 0);
  add({{TS, 1}, {TSH, -1}, {TH, -1}}, 0);
  return r;
}

}  // namespace convopt
