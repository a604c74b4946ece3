#include "convopt/tiling.hpp"

#include <algorithm>

namespace convopt {

namespace {

// Variable order in the LP: (l_b, l_c, l_k, l_w, l_h, l_r', l_r'', l_s', l_s'').
enum : std::size_t { LB = 0, LC, LK, LW, LH, LR1, LR2, LS1, LS2 };
// theta order: log_M of (B, C, K, W, H, R, S, sigma_w, sigma_h).
enum : std::size_t { TB = 0, TC, TK, TW, TH, TR, TS, TSW, TSH };

Int out_tile(const Tiling& t) { return t.b_b * t.b_k * t.b_w * t.b_h; }
Int filter_tile(const Tiling& t) {
  return t.b_c * t.b_k * t.b_r1 * t.b_r2 * t.b_s1 * t.b_s2;
}
// Four-term split form of the Image tile; the feasibility budget is 4M.
Int image_tile_bound(const Tiling& t) {
  return t.b_b * t.b_c * (t.b_w + t.b_r1) * (t.b_h + t.b_s1) * t.b_r2 * t.b_s2;
}

}  // namespace

std::array<Int, 9> lifted_bounds(const ConvParams& p) {
  return {p.B, p.C, p.K, p.W, p.H,
          ceil_div(p.R, p.sigma_w), p.sigma_w,
          ceil_div(p.S, p.sigma_h), p.sigma_h};
}

bool tiling_feasible(const Tiling& t, const ConvParams& p, const CacheModel& m) {
  auto bounds = lifted_bounds(p);
  auto fs = t.fields();
  for (std::size_t i = 0; i < 9; ++i)
    if (*fs[i] < 1 || *fs[i] > bounds[i]) return false;
  if (out_tile(t) > m.M) return false;
  if (p.kind == KernelKind::Convolution && filter_tile(t) > m.M) return false;
  if (image_tile_bound(t) > 4 * m.M) return false;
  return true;
}

LPInstance build_tiling_lp(KernelKind kind) {
  LPInstance lp;
  lp.c.assign(9, Rat(-1));  // min -sum l_x == max block product
  lp.theta_names = {"log_B", "log_C", "log_K", "log_W", "log_H",
                    "log_R", "log_S", "log_sigma_w", "log_sigma_h"};
  lp.G = Mat(0, 9);
  lp.F = Mat(0, 9);
  auto add_row = [&](std::initializer_list<std::pair<std::size_t, int>> g, const Rat& w,
                     std::initializer_list<std::pair<std::size_t, int>> f) {
    std::vector<Rat> gr(9, Rat(0)), fr(9, Rat(0));
    for (auto [j, v] : g) gr[j] = v;
    for (auto [j, v] : f) fr[j] = v;
    lp.G.append_row(gr);
    lp.F.append_row(fr);
    lp.w.push_back(w);
  };

  for (std::size_t j = 0; j < 9; ++j) add_row({{j, -1}}, Rat(0), {});  // l_x >= 0
  add_row({{LB, 1}}, Rat(0), {{TB, 1}});
  add_row({{LC, 1}}, Rat(0), {{TC, 1}});
  add_row({{LK, 1}}, Rat(0), {{TK, 1}});
  add_row({{LW, 1}}, Rat(0), {{TW, 1}});
  add_row({{LH, 1}}, Rat(0), {{TH, 1}});
  add_row({{LR2, 1}}, Rat(0), {{TSW, 1}});                 // l_r'' <= log sw
  add_row({{LS2, 1}}, Rat(0), {{TSH, 1}});                 // l_s'' <= log sh
  add_row({{LR1, 1}}, Rat(0), {{TR, 1}, {TSW, -1}});       // log sw + l_r' <= log R
  add_row({{LS1, 1}}, Rat(0), {{TS, 1}, {TSH, -1}});
  add_row({{LB, 1}, {LK, 1}, {LW, 1}, {LH, 1}}, Rat(1), {});  // Out
  if (kind == KernelKind::Convolution)
    add_row({{LC, 1}, {LK, 1}, {LR1, 1}, {LR2, 1}, {LS1, 1}, {LS2, 1}}, Rat(1), {});
  add_row({{LB, 1}, {LC, 1}, {LW, 1}, {LH, 1}, {LR2, 1}, {LS2, 1}}, Rat(1), {});
  add_row({{LB, 1}, {LC, 1}, {LW, 1}, {LS1, 1}, {LR2, 1}, {LS2, 1}}, Rat(1), {});
  add_row({{LB, 1}, {LC, 1}, {LR1, 1}, {LH, 1}, {LR2, 1}, {LS2, 1}}, Rat(1), {});
  add_row({{LB, 1}, {LC, 1}, {LR1, 1}, {LS1, 1}, {LR2, 1}, {LS2, 1}}, Rat(1), {});
  return lp;
}

LPInstance build_tiling_lp(const ConvParams& p) { return build_tiling_lp(p.kind); }

std::vector<Rat> tiling_theta(const ConvParams& p, const CacheModel& m) {
  if (m.M < 2) throw std::domain_error("log base must be at least 2");
  const Int* vals[9] = {&p.B, &p.C, &p.K, &p.W, &p.H, &p.R, &p.S, &p.sigma_w, &p.sigma_h};
  std::vector<Rat> theta(9);
  for (std::size_t i = 0; i < 9; ++i) theta[i] = log_approx(*vals[i], m.M);
  return theta;
}

Tiling solve_tiling(const ConvParams& p, const CacheModel& m) {
  validate_params(p);
  if (m.M < 1) throw std::domain_error("cache capacity must be positive");
  Tiling t;  // all ones
  if (m.M == 1) return t;

  LPInstance lp = build_tiling_lp(p.kind);
  VertexSolution sol = simplex_solve(lp, tiling_theta(p, m));

  auto bounds = lifted_bounds(p);
  auto fs = t.fields();
  std::array<Int, 9> cap;
  for (std::size_t i = 0; i < 9; ++i) {
    long double v = pow_approx(m.M, sol.x[i]);
    Int fl(static_cast<long long>(std::floor(v)));
    if (fl < 1) fl = 1;
    *fs[i] = std::min(bounds[i], fl);
    cap[i] = std::min(bounds[i], fl + 1);
  }

  // Flooring cannot break the capacity rows, but repair defensively: halve
  // the largest block until feasible (at most one halving per dimension).
  std::array<bool, 9> halved{};
  while (!tiling_feasible(t, p, m)) {
    std::size_t worst = 9;
    for (std::size_t i = 0; i < 9; ++i)
      if (!halved[i] && *fs[i] > 1 && (worst == 9 || *fs[i] > *fs[worst])) worst = i;
    if (worst == 9) throw std::logic_error("tiling repair failed");
    *fs[worst] = std::max(Int(1), *fs[worst] / 2);
    halved[worst] = true;
  }

  // Integer growth: round-robin single steps, capped by ceil(M^l) so the
  // result stays aligned with the LP vertex instead of soaking up slack in
  // one dimension.
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < 9; ++i) {
      if (*fs[i] >= cap[i]) continue;
      *fs[i] += 1;
      if (tiling_feasible(t, p, m)) {
        grew = true;
      } else {
        *fs[i] -= 1;
      }
    }
  }
  return t;
}

Rat tiling_comm_cost(const Tiling& t, const ConvParams& p, const CacheModel& m) {
  if (!tiling_feasible(t, p, m))
    throw std::domain_error("tiling_comm_cost: infeasible tiling");
  return Rat(total_flops(p) * m.M, t.block_product());
}

std::pair<Rat, Rat> split2(const Rat& xbar, const Rat& ybar, const Rat& s) {
  if (xbar < 0 || ybar < 0 || s < 0 || xbar + ybar < s)
    throw std::domain_error("split2 preconditions violated");
  Rat x = std::min(xbar, s);
  return {x, s - x};
}

std::array<Rat, 3> split3(const Rat& xbar, const Rat& ybar, const Rat& zbar, const Rat& s) {
  if (xbar < 0 || ybar < 0 || zbar < 0 || s < 0 || xbar + ybar + zbar < s)
    throw std::domain_error("split3 preconditions violated");
  Rat x = std::min(xbar, s);
  Rat y = std::min(ybar, s - x);
  return {x, y, s - x - y};
}

namespace {

// Exponentiated counterparts of split2/split3 used by the decision tree:
// greedy multiplicative fill with the same x-then-y(-then-z) order, exact in
// integers. Products stay <= target.
std::pair<Int, Int> mul_split2(const Int& xmax, const Int& ymax, const Int& target) {
  Int x = std::max(Int(1), std::min(xmax, target));
  Int y = std::max(Int(1), std::min(ymax, floor_div(target, x)));
  return {x, y};
}

// Fill x in [1, xmax], then y in [ylo, ymax], then z in [zlo, zmax], keeping
// x * y * z <= target; assumes target >= ylo * zlo.
std::array<Int, 3> mul_split3_offset(const Int& xmax, const Int& ylo, const Int& ymax,
                                     const Int& zlo, const Int& zmax, const Int& target) {
  Int x = std::max(Int(1), std::min(xmax, floor_div(target, ylo * zlo)));
  Int y = std::max(ylo, std::min(ymax, floor_div(target, x * zlo)));
  Int z = std::max(zlo, std::min(zmax, floor_div(target, x * y)));
  return {x, y, z};
}

Int clamp1(const Int& v, const Int& hi) { return std::max(Int(1), std::min(v, hi)); }

Tiling make_tiling(const Int& bB, const Int& bC, const Int& bK, const Int& bW,
                   const Int& bH, const Int& bR, const Int& bS) {
  Tiling t;
  t.b_b = bB; t.b_c = bC; t.b_k = bK; t.b_w = bW; t.b_h = bH;
  t.b_r1 = bR; t.b_r2 = 1; t.b_s1 = bS; t.b_s2 = 1;
  return t;
}

}  // namespace

DecisionTreeResult stride1_decision_tree(const ConvParams& p, const CacheModel& m) {
  validate_params(p);
  if (p.sigma_w != 1 || p.sigma_h != 1)
    throw std::domain_error("stride1_decision_tree requires unit strides");
  const Int M = m.M;
  if (M < 1) throw std::domain_error("cache capacity must be positive");

  const Int B = p.B, C = p.C, K = p.K, W = p.W, H = p.H, R = p.R, S = p.S;
  const Int out_s = K * H * W * B;
  const Int img_s = C * H * W * B;
  const Int fil_s = K * C * R * S;
  const Int hwb = H * W * B;
  const Int rs = R * S;
  const Int max3 = std::max({out_s, img_s, fil_s});
  const Int flops = total_flops(p);

  DecisionTreeResult res;

  // Greedy (bB, bH, bW) fill with bH >= S and bW >= R, product <= budget;
  // mirrors the f3(lB, lH-lS, lW-lR, .) calls in the case lemmas.
  auto fill_bhw = [&](const Int& budget) {
    return mul_split3_offset(B, S, H, R, W, budget);
  };

  if (std::min({img_s, fil_s, out_s}) <= M) {
    const bool img_fits = img_s <= M, fil_fits = fil_s <= M, out_fits = out_s <= M;
    if (img_fits && fil_fits && out_fits) {
      res.case_label = "1.1";
      res.tiling = make_tiling(B, C, K, W, H, R, S);
    } else if (!img_fits && fil_fits && out_fits) {
      res.case_label = "1.2";
      res.tiling = make_tiling(Int(1), clamp1(floor_div(M, H * W), C), K, W, H, R, S);
    } else if (img_fits && fil_fits && !out_fits) {
      res.case_label = "1.3";
      res.tiling = make_tiling(Int(1), C, clamp1(floor_div(M, H * W), K), W, H, R, S);
    } else if (img_fits && !fil_fits && out_fits && K * C <= M) {
      res.case_label = "1.4";
      auto [bR, bS] = mul_split2(R, S, floor_div(M, K * C));
      res.tiling = make_tiling(B, C, K, W, H, bR, bS);
    } else if (img_fits && !fil_fits && out_fits) {  // K*C >= M
      res.case_label = "1.5";
      auto [bK, bC] = mul_split2(K, C, floor_div(M, rs));
      res.tiling = make_tiling(B, bC, bK, W, H, R, S);
    } else if (!img_fits && fil_fits && !out_fits) {
      res.case_label = "1.6";
      auto [bB, bH, bW] = fill_bhw(floor_div(M, std::max(C, K)));
      res.tiling = make_tiling(bB, C, K, bW, bH, R, S);
    } else if (!img_fits && !fil_fits && out_fits && K >= hwb) {
      res.case_label = "1.7";
      res.tiling = make_tiling(B, clamp1(floor_div(M, K), C), K, W, H, Int(1), Int(1));
    } else if (!img_fits && !fil_fits && out_fits) {  // K <= HWB
      res.case_label = "1.8";
      auto [bR, bS] = mul_split2(R, S, std::min(rs, floor_div(hwb, K)));
      res.tiling = make_tiling(B, clamp1(floor_div(M, hwb), C), K, W, H, bR, bS);
    } else if (img_fits && !fil_fits && !out_fits && C >= hwb) {
      res.case_label = "1.9";
      res.tiling = make_tiling(B, C, clamp1(floor_div(M, C), K), W, H, Int(1), Int(1));
    } else {  // img fits, filter and out do not, C <= HWB
      res.case_label = "1.10";
      auto [bR, bS] = mul_split2(R, S, std::min(rs, floor_div(hwb, C)));
      res.tiling = make_tiling(B, C, clamp1(floor_div(M, hwb), K), W, H, bR, bS);
    }
    res.alb_words = max3;
  } else if (rs >= M) {
    res.case_label = "2.1";
    auto [bR, bS] = mul_split2(R, S, M);
    res.tiling = make_tiling(Int(1), Int(1), Int(1), bR, bS, bR, bS);
    res.alb_words = floor_div(flops, M);
  } else if (M * rs >= hwb * hwb) {
    res.case_label = "2.2.1";
    Int bC = clamp1(floor_div(M, hwb), C);
    Int bK = clamp1(floor_div(hwb, rs), K);
    res.tiling = make_tiling(B, bC, bK, W, H, R, S);
    res.alb_words = fil_s;
  } else if (std::min(C, K) * std::min(C, K) * rs >= M) {  // min(C,K) >= sqrt(M/RS)
    res.case_label = "2.2.2.1";
    Int bKC = clamp1(isqrt(floor_div(M, rs)), std::min(C, K));
    auto [bB, bH, bW] = fill_bhw(isqrt(M * rs));
    res.tiling = make_tiling(bB, bKC, bKC, bW, bH, R, S);
    res.alb_words = rat_floor_sqrt(Rat(out_s * C * out_s * C * rs, M));
  } else {
    res.case_label = "2.2.2.2";
    Int small = std::min(C, K);
    auto [bB, bH, bW] = fill_bhw(floor_div(M, small));
    res.tiling = make_tiling(bB, small, small, bW, bH, R, S);
    res.alb_words = std::max(out_s, img_s);
  }
  return res;
}

}  // namespace convopt
