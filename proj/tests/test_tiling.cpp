#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>

#include "convopt/bounds.hpp"
#include "convopt/tiling.hpp"

using namespace convopt;

namespace {

ConvParams make(long long B, long long C, long long K, long long W, long long H,
                long long R, long long S, long long sw, long long sh,
                KernelKind kind = KernelKind::Convolution) {
  ConvParams p;
  p.B = B; p.C = C; p.K = K; p.W = W; p.H = H; p.R = R; p.S = S;
  p.sigma_w = sw; p.sigma_h = sh; p.kind = kind;
  return p;
}

// Exhaustive integer-tiling optimum over the Tiling invariants.
Int brute_force_best_product(const ConvParams& p, const CacheModel& m) {
  auto bounds = lifted_bounds(p);
  std::array<long long, 9> lim;
  for (int i = 0; i < 9; ++i) lim[i] = bounds[i].convert_to<long long>();
  Int best(0);
  Tiling t;
  auto fs = t.fields();
  std::array<long long, 9> v;
  auto rec = [&](auto&& self, int dim) -> void {
    if (dim == 9) {
      for (int i = 0; i < 9; ++i) *fs[i] = v[i];
      if (tiling_feasible(t, p, m)) best = std::max(best, t.block_product());
      return;
    }
    for (v[dim] = 1; v[dim] <= lim[dim]; ++v[dim]) self(self, dim + 1);
  };
  rec(rec, 0);
  return best;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

TEST_CASE("LP row counts and fixed ordering") {
  LPInstance conv = build_tiling_lp(KernelKind::Convolution);
  CHECK(conv.G.rows == 24);
  CHECK(conv.G.cols == 9);
  CHECK(conv.w.size() == 24);
  LPInstance pool = build_tiling_lp(KernelKind::Pooling);
  CHECK(pool.G.rows == 23);

  // Row 0 is -l_b <= 0; row 9 is l_b <= log B; row 18 is the Out capacity.
  CHECK(conv.G(0, 0) == -1);
  CHECK(conv.w[0] == 0);
  CHECK(conv.G(9, 0) == 1);
  CHECK(conv.F(9, 0) == 1);
  Rat out_row_sum(0);
  for (int j = 0; j < 9; ++j) out_row_sum += conv.G(18, j);
  CHECK(out_row_sum == 4);
  CHECK(conv.w[18] == 1);
  // Filter-extent row: log sw + l_r' <= log R.
  CHECK(conv.G(16, 5) == 1);
  CHECK(conv.F(16, 5) == 1);
  CHECK(conv.F(16, 7) == -1);
}

TEST_CASE("unit loop bounds force the all-ones tiling") {
  ConvParams p = make(1, 1, 1, 1, 1, 1, 1, 1, 1);
  Tiling t = solve_tiling(p, CacheModel{64});
  CHECK(t.block_product() == 1);
}

TEST_CASE("AlexNet tile at M=1024 matches the closed forms") {
  ConvParams p = alexnet_params();
  CacheModel m{1024};
  Tiling t = solve_tiling(p, m);
  CHECK(tiling_feasible(t, p, m));
  CHECK((t.b_b == 11 || t.b_b == 12));
  CHECK((t.b_k == 11 || t.b_k == 12));
  CHECK(t.b_c == 3);
  for (const Int* v : {&t.b_w, &t.b_h, &t.b_r1, &t.b_s1}) CHECK((*v == 2 || *v == 3));
  // Communication within the documented factor-4 window of the bound.
  Rat cost = tiling_comm_cost(t, p, m);
  BoundBreakdown b = lower_bound(p, m);
  CHECK(cost <= Rat(4 * b.max_term));
  CHECK(cost >= Rat(b.max_term, 4));
}

TEST_CASE("a cache larger than all arrays takes the whole iteration space") {
  ConvParams p = make(4, 3, 5, 6, 7, 2, 3, 1, 1);
  ArraySizes s = array_sizes(p);
  Int m_big = std::max({s.out_words, s.image_words, s.filter_words}) * 2;
  Tiling t = solve_tiling(p, CacheModel{m_big});
  auto bounds = lifted_bounds(p);
  auto fs = t.fields();
  for (int i = 0; i < 9; ++i) CHECK(*fs[i] == bounds[i]);
}

TEST_CASE("tiny instances stay within half of the brute-force optimum") {
  for (long long B : {1, 3})
    for (long long K : {1, 2})
      for (long long W : {2, 3})
        for (long long M : {4, 16}) {
          ConvParams p = make(B, 2, K, W, W, 2, 2, 1, 1);
          CacheModel m{M};
          Tiling t = solve_tiling(p, m);
          CHECK(tiling_feasible(t, p, m));
          Int best = brute_force_best_product(p, m);
          CHECK(2 * t.block_product() >= best);
        }
}

TEST_CASE("comm cost closed forms") {
  ConvParams p = make(2, 3, 4, 5, 6, 2, 3, 1, 1);
  CacheModel m{1 << 20};
  Tiling full = solve_tiling(p, m);
  CHECK(tiling_comm_cost(full, p, m) == Rat(m.M));  // one round

  Tiling ones;
  CHECK(tiling_comm_cost(ones, p, CacheModel{7}) == Rat(total_flops(p) * 7));

  Tiling bad = ones;
  bad.b_b = 100;  // beyond the loop bound
  CHECK_THROWS_AS(tiling_comm_cost(bad, p, CacheModel{7}), std::domain_error);
}

TEST_CASE("split helpers fill greedily and check domains") {
  auto [x, y] = split2(Rat(3), Rat(3), Rat(4));
  CHECK(x == 3);
  CHECK(y == 1);
  auto [x2, y2] = split2(Rat(5), Rat(0), Rat(5));
  CHECK(x2 == 5);
  CHECK(y2 == 0);
  auto xyz = split3(Rat(1), Rat(1), Rat(1), Rat(3));
  CHECK(xyz[0] == 1);
  CHECK(xyz[1] == 1);
  CHECK(xyz[2] == 1);
  CHECK_THROWS_AS(split2(Rat(1), Rat(1), Rat(3)), std::domain_error);
  CHECK_THROWS_AS(split3(Rat(-1), Rat(1), Rat(1), Rat(1)), std::domain_error);
}

TEST_CASE("decision tree: filter-dominated case 2.1") {
  // RS >= M with every array bigger than M.
  ConvParams p = make(2, 2, 2, 8, 8, 4, 4, 1, 1);
  CacheModel m{16};
  DecisionTreeResult res = stride1_decision_tree(p, m);
  CHECK(res.case_label == "2.1");
  CHECK(res.alb_words == floor_div(total_flops(p), m.M));
  CHECK(res.tiling.b_r1 * res.tiling.b_s1 == 16);
  CHECK(res.tiling.b_w * res.tiling.b_h == 16);
  CHECK(tiling_feasible(res.tiling, p, m));
}

TEST_CASE("decision tree: everything fits is case 1.1") {
  ConvParams p = make(2, 2, 2, 3, 3, 2, 2, 1, 1);
  CacheModel m{10000};
  DecisionTreeResult res = stride1_decision_tree(p, m);
  CHECK(res.case_label == "1.1");
  Int out = 2 * 3 * 3 * 2, img = 2 * 3 * 3 * 2, fil = 2 * 2 * 2 * 2;
  CHECK(res.alb_words == std::max({out, img, fil}));
  CHECK(res.tiling.block_product() ==
        lifted_bounds(p)[0] * lifted_bounds(p)[1] * lifted_bounds(p)[2] * 3 * 3 * 2 * 2);
}

TEST_CASE("decision tree: balanced case 2.2.2.1") {
  // Arrays >> M, RS <= M, MRS <= (HWB)^2, min(C,K) >= sqrt(M/RS).
  ConvParams p = make(8, 16, 16, 8, 8, 2, 2, 1, 1);
  CacheModel m{16};
  DecisionTreeResult res = stride1_decision_tree(p, m);
  CHECK(res.case_label == "2.2.2.1");
  CHECK(res.tiling.b_k == 2);  // sqrt(M/RS) = 2
  CHECK(res.tiling.b_c == 2);
  CHECK(tiling_feasible(res.tiling, p, m));
  // ALB = KCHWB*sqrt(RS/M) = 16*16*8*8*8*(1/2).
  CHECK(res.alb_words == Int(16) * 16 * 8 * 8 * 8 / 2);
}

TEST_CASE("decision tree rejects strided layers") {
  CHECK_THROWS_AS(stride1_decision_tree(make(1, 1, 1, 2, 2, 2, 2, 2, 2), CacheModel{8}),
                  std::domain_error);
}

TEST_CASE("random unit-stride layers: tree agrees with the bound and the LP") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto dim = [&](int salt, long long hi) {
      return 1 + static_cast<long long>(mix(seed * 97 + salt) % hi);
    };
    long long W = dim(1, 24), H = dim(2, 24);
    ConvParams p = make(dim(0, 32), dim(3, 32), dim(4, 32), W, H,
                        dim(5, W), dim(6, H), 1, 1);
    CacheModel m{Int(1) << (2 + mix(seed) % 12)};
    DecisionTreeResult res = stride1_decision_tree(p, m);
    BoundBreakdown b = lower_bound(p, m);
    CHECK(res.alb_words <= 4 * b.max_term);
    CHECK(b.max_term <= 4 * res.alb_words);
    CHECK(tiling_feasible(res.tiling, p, m));

    Rat tree_cost = tiling_comm_cost(res.tiling, p, m);
    Rat lp_cost = tiling_comm_cost(solve_tiling(p, m), p, m);
    // Costs agree within the documented constant once the bound clears M.
    if (b.max_term >= m.M) {
      CHECK(tree_cost <= Rat(64) * Rat(std::max(res.alb_words, m.M)));
      CHECK(lp_cost <= Rat(64) * tree_cost);
      CHECK(tree_cost <= Rat(64) * lp_cost);
      ++checked;
    }
  }
  CHECK(checked > 40);
}

TEST_CASE("solve_tiling always returns a feasible tiling") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto dim = [&](int salt, long long hi) {
      return 1 + static_cast<long long>(mix(seed * 131 + salt) % hi);
    };
    long long sw = 1 + mix(seed + 7) % 3, sh = 1 + mix(seed + 11) % 3;
    long long W = dim(1, 20), H = dim(2, 20);
    long long R = sw + static_cast<long long>(mix(seed + 13) % (sw * W - sw + 1));
    long long S = sh + static_cast<long long>(mix(seed + 17) % (sh * H - sh + 1));
    ConvParams p = make(dim(0, 40), dim(3, 12), dim(4, 40), W, H, R, S, sw, sh,
                        seed % 3 == 0 ? KernelKind::Pooling : KernelKind::Convolution);
    CacheModel m{Int(1) << (mix(seed + 19) % 14)};
    Tiling t = solve_tiling(p, m);
    CHECK(tiling_feasible(t, p, m));
  }
}
