// Acceptance suite: one line per criterion, exit 0 only if every criterion
// holds. Heavier checks print their measured sizes so CI logs show scale.

#include <array>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "convopt/bounds.hpp"
#include "convopt/json_io.hpp"
#include "convopt/mplp.hpp"
#include "convopt/sim.hpp"
#include "convopt/tiling.hpp"

using namespace convopt;

namespace {

bool g_all_pass = true;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  g_all_pass = g_all_pass && pass;
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << idx << " (" << name << ")";
  if (!detail.empty()) std::cout << " — " << detail;
  std::cout << std::endl;
}

template <typename F>
void run(int idx, const std::string& name, F&& body) {
  auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << detail << (detail.empty() ? "" : ", ") << std::fixed;
  d.precision(1);
  d << secs << "s";
  report(idx, name, pass, d.str());
}

ConvParams make(long long B, long long C, long long K, long long W, long long H,
                long long R, long long S, long long sw, long long sh,
                KernelKind kind = KernelKind::Convolution) {
  ConvParams p;
  p.B = B; p.C = C; p.K = K; p.W = W; p.H = H; p.R = R; p.S = S;
  p.sigma_w = sw; p.sigma_h = sh; p.kind = kind;
  return p;
}

std::vector<Subgroup> table_subgroups(const std::vector<SubgroupTableRow>& rows) {
  std::vector<Subgroup> subs;
  for (const auto& r : rows) subs.push_back(r.subgroup);
  return subs;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// System rows a1 s1 + a2 s2 + a3 s3 >= rhs over s >= 0; true when `sys`
// implies every row of `rows` (minimum of the row form stays >= rhs).
bool implies(const std::vector<std::array<long long, 4>>& sys,
             const std::vector<std::array<long long, 4>>& rows) {
  Mat A(0, 3);
  std::vector<Rat> b;
  for (const auto& r : sys) {
    A.append_row({Rat(-r[0]), Rat(-r[1]), Rat(-r[2])});
    b.push_back(Rat(-r[3]));
  }
  for (int i = 0; i < 3; ++i) {
    std::vector<Rat> row(3, Rat(0));
    row[i] = -1;
    A.append_row(row);
    b.push_back(Rat(0));
  }
  for (const auto& r : rows) {
    LPSolution sol = solve_inequality_lp(A, b, {Rat(r[0]), Rat(r[1]), Rat(r[2])});
    if (sol.status != LPStatus::Optimal || sol.objective < Rat(r[3])) return false;
  }
  return true;
}

bool criterion1(std::string& detail) {
  auto table = cnn_subgroup_table(4, 4);
  auto sol = hbl_exponents(cnn_projections(4, 4), table_subgroups(table));
  if (sol.total != 2) {
    detail = "total = " + rat_to_string(sol.total);
    return false;
  }
  std::vector<std::array<long long, 4>> generated;
  for (const auto& c : sol.constraints_used)
    generated.push_back({(long long)c.image_ranks[0], (long long)c.image_ranks[1],
                         (long long)c.image_ranks[2], (long long)c.subgroup_rank});
  std::vector<std::array<long long, 4>> reduced = {
      {1, 1, 0, 1}, {1, 0, 1, 1}, {0, 1, 1, 1}, {1, 1, 1, 2}};
  bool equiv = implies(generated, reduced) && implies(reduced, generated);
  detail = "total = 2, generated system <=> the four reduced inequalities";
  return equiv;
}

bool criterion2(std::string& detail) {
  const std::array<std::array<std::size_t, 4>, 11> expected = {{
      {1, 1, 0, 1}, {1, 1, 1, 0}, {1, 0, 1, 1}, {1, 1, 0, 1}, {2, 1, 1, 1},
      {1, 1, 1, 0}, {1, 0, 1, 1}, {1, 1, 0, 1}, {2, 1, 1, 1}, {1, 0, 1, 1},
      {1, 1, 1, 0},
  }};
  for (auto [sw, sh] : std::array<std::array<long long, 2>, 3>{{{1, 1}, {4, 4}, {2, 3}}}) {
    auto table = cnn_subgroup_table(sw, sh);
    auto phis = cnn_projections(sw, sh);
    if (table.size() != 11) return false;
    for (std::size_t i = 0; i < 11; ++i) {
      if (subgroup_rank(table[i].subgroup) != expected[i][0]) return false;
      for (std::size_t k = 0; k < 3; ++k)
        if (image_rank(phis[k], table[i].subgroup) != expected[i][k + 1]) return false;
    }
  }
  detail = "11 rank tuples match for sigma in {(1,1),(4,4),(2,3)}";
  return true;
}

bool criterion3(std::string& detail) {
  for (auto [sw, sh] : std::array<std::array<long long, 2>, 3>{{{1, 1}, {4, 4}, {3, 2}}}) {
    auto sol = hbl_exponents(pooling_projections(sw, sh),
                             table_subgroups(pooling_subgroup_table(sw, sh)));
    if (sol.total != 2) {
      detail = "total = " + rat_to_string(sol.total);
      return false;
    }
  }
  detail = "pooling C' construction gives total = 2";
  return true;
}

bool criterion4(std::string& detail) {
  std::uint64_t seed = 1;
  if (const char* env = std::getenv("CONVOPT_SEED")) seed = std::strtoull(env, nullptr, 10);
  LPInstance lp = build_tiling_lp(KernelKind::Convolution);
  Partition part = partition_parameter_space(lp, cnn_parent_region(), seed);
  VerificationReport rep = verify_attainability(part, KernelKind::Convolution);
  std::size_t restricted = 0;
  for (const auto& e : rep.entries)
    if (e.max_gap) ++restricted;
  std::ostringstream d;
  d << part.pieces.size() << " regions, " << restricted
    << " dominance cells, max gaps all zero: " << (rep.all_max_gaps_zero ? "yes" : "no")
    << ", min gaps nonneg: " << (rep.all_min_gaps_nonneg ? "yes" : "no");
  detail = d.str();
  return rep.ok();
}

bool criterion5(std::string& detail) {
  ConvParams p = alexnet_params();
  // (a) Dominance leaves the small-filter term at exactly M = C^2*R*S*sw*sh.
  Int crossover = p.C * p.C * p.R * p.S * p.sigma_w * p.sigma_h;
  if (crossover != 17424) return false;
  BoundBreakdown below = lower_bound(p, CacheModel{crossover - 1});
  BoundBreakdown at = lower_bound(p, CacheModel{crossover});
  bool a = below.dominant == BoundTerm::SmallFilter && at.max_term == at.out_size &&
           *at.small_filter_term == at.out_size;

  // (b) matmul-reuse cost over the optimal bound is exactly sqrt(RS/(sw*sh))
  // = 11/4 wherever the small-filter term dominates.
  bool b = Rat(p.R * p.S, p.sigma_w * p.sigma_h) == Rat(121, 16) &&
           isqrt(Int(121)) * 4 == 11 * isqrt(Int(16));
  Int flops = total_flops(p);
  Int bckwh = p.B * p.C * p.K * p.W * p.H;
  for (long long m : {8LL, 64LL, 1024LL, 17424LL}) {
    BoundBreakdown bb = lower_bound(p, CacheModel{m});
    if (m < 17424 && bb.dominant != BoundTerm::SmallFilter) b = false;
    // ratio^2 = (F^2/M) / ((BCKWH)^2 RS sw sh / M) must be exactly 121/16.
    Rat ratio_sq = Rat(flops * flops) /
                   Rat(bckwh * bckwh * p.R * p.S * p.sigma_w * p.sigma_h);
    if (ratio_sq != Rat(121, 16)) b = false;
  }

  // (c) LP tile at M = 1024 vs the closed forms, within +-1 per dimension
  // (interval comparison on squares keeps it exact).
  CacheModel m{1024};
  Tiling t = solve_tiling(p, m);
  auto within1 = [](const Int& v, const Rat& form_sq) {
    Rat lo((v - 1) * (v - 1)), hi((v + 1) * (v + 1));
    return lo <= form_sq && form_sq <= hi;
  };
  Rat bk_sq(m.M * p.sigma_w * p.sigma_h, p.R * p.S);   // (sqrt(M sw sh / RS))^2
  Rat c_sq(p.C * p.C);
  Rat h_sq(p.S * p.S, p.sigma_h * p.sigma_h);          // (S / sh)^2
  Rat w_sq(p.R * p.R, p.sigma_w * p.sigma_w);
  bool c = within1(t.b_b, bk_sq) && within1(t.b_k, bk_sq) && within1(t.b_c, c_sq) &&
           within1(t.b_h, h_sq) && within1(t.b_w, w_sq) && within1(t.b_s1, h_sq) &&
           within1(t.b_r1, w_sq);

  std::ostringstream d;
  d << "crossover@17424: " << (a ? "ok" : "BAD") << ", ratio 2.75 exact: "
    << (b ? "ok" : "BAD") << ", tile forms +-1: " << (c ? "ok" : "BAD");
  detail = d.str();
  return a && b && c;
}

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

bool criterion6(std::string& detail) {
  int instances = 0, failures = 0;
  for (long long B = 1; B <= 3; ++B)
    for (long long C = 1; C <= 3; ++C)
      for (long long K = 1; K <= 3; ++K)
        for (long long W = 1; W <= 3; ++W)
          for (long long sigma = 1; sigma <= 2; ++sigma)
            for (long long R = sigma; R <= std::min(3LL, sigma * W); ++R)
              for (long long M : {2, 4, 8, 16}) {
                ConvParams p = make(B, C, K, W, W, R, R, sigma, sigma);
                CacheModel m{M};
                ++instances;
                Tiling t = solve_tiling(p, m);
                Int best = brute_force_best_product(p, m);
                if (!tiling_feasible(t, p, m) || 2 * t.block_product() < best) ++failures;
              }
  std::ostringstream d;
  d << instances << " instances, " << failures << " below half of brute force";
  detail = d.str();
  return failures == 0 && instances >= 200;
}

bool criterion7(std::string& detail) {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto dim = [&](int salt, long long hi) {
      return 1 + static_cast<long long>(mix(seed * 1009 + salt) % hi);
    };
    long long W = dim(1, 48), H = dim(2, 48);
    ConvParams p = make(dim(0, 64), dim(3, 64), dim(4, 64), W, H, dim(5, W),
                        dim(6, H), 1, 1);
    CacheModel m{Int(1) << (1 + mix(seed * 31) % 16)};
    DecisionTreeResult res = stride1_decision_tree(p, m);
    BoundBreakdown b = lower_bound(p, m);
    bool ok = res.alb_words <= 4 * b.max_term && b.max_term <= 4 * res.alb_words &&
              tiling_feasible(res.tiling, p, m);
    if (ok) {
      Rat cost = tiling_comm_cost(res.tiling, p, m);
      Int budget = std::max(res.alb_words, m.M);  // Eq. 9 charges M per round
      ok = cost <= Rat(64 * budget) && Rat(res.alb_words) <= 64 * cost;
    }
    if (!ok) ++failures;
  }
  std::ostringstream d;
  d << "1000 seeded unit-stride instances, " << failures << " failures";
  detail = d.str();
  return failures == 0;
}

bool criterion8(std::string& detail) {
  int instances = 0, failures = 0;
  auto run_one = [&](const ConvParams& p, long long M) {
    CacheModel m{M};
    BoundBreakdown b = lower_bound(p, m);
    if (b.max_term < m.M) return;
    ++instances;
    SimConfig cfg;
    cfg.params = p;
    cfg.tiling = solve_tiling(p, m);
    cfg.M = m.M;
    cfg.policy = CachePolicy::LRU;
    cfg.element_tracking = true;
    cfg.data_seed = 7 + instances;
    TrafficReport rep = simulate(cfg);
    bool ok = rep.total_words >= compulsory_traffic(p) &&
              rep.total_words <= 16 * b.max_term && rep.tracking_ok && *rep.tracking_ok;
    if (!ok) ++failures;
  };
  for (long long B : {1, 2})
    for (long long C : {1, 2})
      for (long long K : {1, 2})
        for (long long W : {3, 4})
          for (long long M : {4, 8, 16})
            run_one(make(B, C, K, W, W, 2, 2, 1, 1), M);
  for (long long M : {4, 8, 16}) run_one(make(2, 2, 2, 3, 3, 2, 2, 2, 2), M);
  std::ostringstream d;
  d << instances << " instances with bound >= M, " << failures << " failures";
  detail = d.str();
  return failures == 0 && instances >= 20;
}

bool criterion9(std::string& detail) {
  LPInstance lp;
  lp.c = {Rat(-1)};
  lp.G = Mat(0, 1);
  lp.G.append_row({Rat(1)});
  lp.G.append_row({Rat(1)});
  lp.w = {Rat(1), Rat(0)};
  lp.F = Mat(0, 1);
  lp.F.append_row({Rat(0)});
  lp.F.append_row({Rat(1)});
  lp.theta_names = {"theta"};
  Region parent = Region::whole(1);
  parent.add_row({Rat(-1)}, Rat(0));
  parent.add_row({Rat(1)}, Rat(2));

  Partition part = partition_parameter_space(lp, parent, 3);
  if (part.pieces.size() != 2) {
    detail = "expected 2 pieces, got " + std::to_string(part.pieces.size());
    return false;
  }
  // Canonical row sets after redundancy removal must match the hand-derived
  // regions exactly.
  auto rows_of = [](const Region& r) {
    std::set<std::pair<std::vector<Rat>, Rat>> rows;
    for (std::size_t i = 0; i < r.A.rows; ++i) rows.insert({r.A.row(i), r.b[i]});
    return rows;
  };
  using RowSet = std::set<std::pair<std::vector<Rat>, Rat>>;
  RowSet low_expected = {{{Rat(-1)}, Rat(0)}, {{Rat(1)}, Rat(1)}};
  RowSet high_expected = {{{Rat(-1)}, Rat(-1)}, {{Rat(1)}, Rat(2)}};
  bool ok = true;
  for (const auto& piece : part.pieces) {
    RowSet rows = rows_of(remove_redundant_rows(piece.region));
    if (rows == low_expected) {
      ok = ok && piece.optimizer.E(0, 0) == 1 && piece.optimizer.e[0] == 0;  // x = theta
    } else if (rows == high_expected) {
      ok = ok && piece.optimizer.E(0, 0) == 0 && piece.optimizer.e[0] == 1;  // x = 1
    } else {
      ok = false;
    }
  }
  detail = "two pieces with exact hand-derived regions and optimizers";
  return ok;
}

}  // namespace

int main() {
  run(1, "HBL exponent optimum", criterion1);
  run(2, "rank table reproduction", criterion2);
  run(3, "pooling exponent", criterion3);
  run(4, "attainability verification", criterion4);
  run(5, "Figure 2 reproduction", criterion5);
  run(6, "brute-force tiling optimality", criterion6);
  run(7, "decision-tree oracle consistency", criterion7);
  run(8, "simulator attainability", criterion8);
  run(9, "mpLP toy oracle", criterion9);
  std::cout << (g_all_pass ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED") << std::endl;
  return g_all_pass ? 0 : 1;
}
