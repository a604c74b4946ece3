#include "convopt/bounds.hpp"

#include "convopt/lp.hpp"

namespace convopt {

const char* bound_term_name(BoundTerm t) {
  switch (t) {
    case BoundTerm::OutSize: return "out_size";
    case BoundTerm::ImageProxy: return "image_proxy";
    case BoundTerm::FilterSize: return "filter_size";
    case BoundTerm::Hbl: return "hbl_term";
    case BoundTerm::SmallFilter: return "small_filter_term";
  }
  return "?";
}

namespace {

// A term value is either an exact rational or the square root of one; all
// values are nonnegative, so comparisons go through the squares.
struct TermValue {
  Rat value;     // the rational itself, or the radicand when sqrt is set
  bool is_sqrt = false;

  bool less_than(const TermValue& o) const {
    if (!is_sqrt && !o.is_sqrt) return value < o.value;
    if (is_sqrt && o.is_sqrt) return value < o.value;
    if (is_sqrt) return value < o.value * o.value;
    return value * value < o.value;
  }
  Int floor_words() const { return is_sqrt ? rat_floor_sqrt(value) : rat_floor(value); }
};

}  // namespace

std::vector<std::pair<BoundTerm, Int>> BoundBreakdown::applicable_terms() const {
  std::vector<std::pair<BoundTerm, Int>> out;
  out.emplace_back(BoundTerm::OutSize, out_size);
  out.emplace_back(BoundTerm::ImageProxy, image_proxy);
  if (filter_size) out.emplace_back(BoundTerm::FilterSize, *filter_size);
  out.emplace_back(BoundTerm::Hbl, hbl_term);
  if (small_filter_term) out.emplace_back(BoundTerm::SmallFilter, *small_filter_term);
  return out;
}

BoundBreakdown lower_bound(const ConvParams& p, const CacheModel& m) {
  validate_params(p);
  if (m.M < 1) throw std::domain_error("cache capacity must be positive");

  const Int bkwh = p.B * p.K * p.W * p.H;
  const Int bcwh = p.B * p.C * p.W * p.H;
  const Int flops = total_flops(p);
  const bool pooling = p.kind == KernelKind::Pooling;

  std::vector<std::pair<BoundTerm, TermValue>> terms;
  terms.push_back({BoundTerm::OutSize, {Rat(bkwh), false}});
  terms.push_back({BoundTerm::ImageProxy, {Rat(p.sigma_w * p.sigma_h * bcwh), false}});
  if (!pooling)
    terms.push_back({BoundTerm::FilterSize, {Rat(p.C * p.K * p.R * p.S), false}});
  terms.push_back({BoundTerm::Hbl, {Rat(flops, m.M), false}});
  if (!pooling) {
    const Int bckwh = bcwh * p.K;
    // (BCKWH)^2 * RS*sw*sh / M under the square root.
    Rat radicand(bckwh * bckwh * p.R * p.S * p.sigma_w * p.sigma_h, m.M);
    terms.push_back({BoundTerm::SmallFilter, {radicand, true}});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < terms.size(); ++i)
    if (terms[best].second.less_than(terms[i].second)) best = i;

  BoundBreakdown b;
  b.kind = p.kind;
  b.out_size = bkwh;
  b.image_proxy = p.sigma_w * p.sigma_h * bcwh;
  if (!pooling) b.filter_size = p.C * p.K * p.R * p.S;
  b.hbl_term = floor_div(flops, m.M);
  if (!pooling) b.small_filter_term = terms.back().second.floor_words();
  b.max_term = terms[best].second.floor_words();
  b.dominant = terms[best].first;
  return b;
}

Int matmul_lower_bound(const Int& n, const Int& k, const CacheModel& m) {
  if (k < 1 || k > n) throw std::domain_error("matmul bound requires 1 <= k <= n");
  if (m.M < 1) throw std::domain_error("cache capacity must be positive");
  Int sq = n * n;
  Int second = rat_floor_sqrt(Rat(sq * sq * k * k, m.M));
  return std::max(sq, second);
}

Int max_ops_per_round(const ConvParams& p, const CacheModel& m) {
  validate_params(p);
  if (m.M < 1) throw std::domain_error("cache capacity must be positive");
  Int msq = m.M * m.M;
  Int small = rat_floor_sqrt(Rat(p.R * p.S * m.M * m.M * m.M, p.sigma_w * p.sigma_h));
  return std::min(msq, small);
}

ExponentSolution hbl_exponents(const std::vector<Projection>& projections,
                               const std::vector<Subgroup>& subgroups) {
  if (projections.empty() || subgroups.empty())
    throw std::invalid_argument("hbl_exponents: empty input");
  const std::size_t k = projections.size();

  ExponentSolution sol;
  Mat A(0, k);
  std::vector<Rat> b;
  for (const auto& h : subgroups) {
    ExponentConstraint con;
    con.subgroup_rank = subgroup_rank(h);
    bool any = con.subgroup_rank != 0;
    for (const auto& phi : projections) {
      con.image_ranks.push_back(image_rank(phi, h));
      if (con.image_ranks.back() != 0) any = true;
    }
    if (!any) continue;  // trivial 0 <= 0
    sol.constraints_used.push_back(con);
    // rank(H) <= sum s_i rank(phi_i H)  ->  -sum r_i s_i <= -rank(H)
    std::vector<Rat> row(k);
    for (std::size_t i = 0; i < k; ++i) row[i] = -Rat(Int(con.image_ranks[i]));
    A.append_row(row);
    b.push_back(-Rat(Int(con.subgroup_rank)));
  }
  for (std::size_t i = 0; i < k; ++i) {  // s_i >= 0
    std::vector<Rat> row(k, Rat(0));
    row[i] = -1;
    A.append_row(row);
    b.push_back(Rat(0));
  }

  std::vector<Rat> c(k, Rat(1));
  LPSolution lp = solve_inequality_lp(A, b, c);
  if (lp.status != LPStatus::Optimal) throw LPError(lp.status);
  sol.s = lp.x;
  sol.total = lp.objective;
  return sol;
}

}  // namespace convopt
