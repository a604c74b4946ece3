#include "convopt/sim.hpp"

#include <algorithm>
#include <limits>
#include <list>
#include <set>
#include <unordered_map>

namespace convopt {

Footprint tile_footprint(const Tiling& t, const ConvParams& p) {
  Footprint f;
  f.out = t.b_k * t.b_h * t.b_w * t.b_b;
  f.filter = p.kind == KernelKind::Pooling
                 ? Int(0)
                 : t.b_c * t.b_k * t.b_r1 * t.b_r2 * t.b_s1 * t.b_s2;
  f.image = t.b_b * t.b_c * (t.b_w + t.b_r1 - 1) * (t.b_h + t.b_s1 - 1) * t.b_r2 * t.b_s2;
  return f;
}

Int compulsory_traffic(const ConvParams& p) {
  Int out = p.K * p.H * p.W * p.B;
  Int image = p.C * p.B * (p.sigma_w * p.W + p.R - p.sigma_w) *
              (p.sigma_h * p.H + p.S - p.sigma_h);
  Int filter = p.kind == KernelKind::Pooling ? Int(0) : p.K * p.C * p.R * p.S;
  return 2 * out + image + filter;
}

Tensor4 make_image(const ConvParams& p) {
  return Tensor4((p.sigma_w * p.W + p.R).convert_to<std::int64_t>(),
                 (p.sigma_h * p.H + p.S).convert_to<std::int64_t>(),
                 p.C.convert_to<std::int64_t>(), p.B.convert_to<std::int64_t>());
}

Tensor4 make_filter(const ConvParams& p) {
  if (p.kind == KernelKind::Pooling) return Tensor4(1, 1, 1, 1);
  return Tensor4(p.K.convert_to<std::int64_t>(), p.R.convert_to<std::int64_t>(),
                 p.S.convert_to<std::int64_t>(), p.C.convert_to<std::int64_t>());
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void fill_random(Tensor4& t, std::uint64_t seed, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
  for (std::size_t i = 0; i < t.data.size(); ++i)
    t.data[i] = lo + static_cast<std::int64_t>(mix64(seed + i) % span);
}

Tensor4 reference_convolution(const ConvParams& p, const Tensor4& image,
                              const Tensor4& filter, PoolMode mode) {
  validate_params(p);
  const auto B = p.B.convert_to<std::int64_t>(), C = p.C.convert_to<std::int64_t>(),
             K = p.K.convert_to<std::int64_t>(), W = p.W.convert_to<std::int64_t>(),
             H = p.H.convert_to<std::int64_t>(), R = p.R.convert_to<std::int64_t>(),
             S = p.S.convert_to<std::int64_t>(), sw = p.sigma_w.convert_to<std::int64_t>(),
             sh = p.sigma_h.convert_to<std::int64_t>();
  const bool conv = p.kind == KernelKind::Convolution;
  if (image.dims != make_image(p).dims) throw std::invalid_argument("image shape mismatch");
  if (conv && filter.dims != make_filter(p).dims)
    throw std::invalid_argument("filter shape mismatch");

  Tensor4 out(K, H, W, B);
  if (!conv && mode == PoolMode::Max)
    std::fill(out.data.begin(), out.data.end(), std::numeric_limits<std::int64_t>::min());
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t c = 0; c < C; ++c)
      for (std::int64_t k = 0; k < K; ++k)
        for (std::int64_t w = 0; w < W; ++w)
          for (std::int64_t h = 0; h < H; ++h)
            for (std::int64_t r = 0; r < R; ++r)
              for (std::int64_t s = 0; s < S; ++s) {
                std::int64_t img = image.at(r + sw * w, s + sh * h, c, b);
                std::int64_t& o = out.at(k, h, w, b);
                if (conv)
                  o += img * filter.at(k, r, s, c);
                else if (mode == PoolMode::Max)
                  o = std::max(o, img);
                else
                  o += img;
              }
  return out;
}

namespace {

struct LruCache {
  std::uint64_t capacity;
  std::list<std::int64_t> order;  // front = most recent
  struct Entry {
    std::list<std::int64_t>::iterator pos;
    bool dirty;
  };
  std::unordered_map<std::int64_t, Entry> lines;

  // Returns {miss, evicted dirty word tag or -1}.
  std::pair<bool, std::int64_t> access(std::int64_t word, bool write) {
    auto it = lines.find(word);
    if (it != lines.end()) {
      order.splice(order.begin(), order, it->second.pos);
      it->second.dirty |= write;
      return {false, -1};
    }
    std::int64_t evicted = -1;
    if (lines.size() >= capacity) {
      std::int64_t victim = order.back();
      order.pop_back();
      auto vit = lines.find(victim);
      if (vit->second.dirty) evicted = victim;
      lines.erase(vit);
    }
    order.push_front(word);
    lines[word] = {order.begin(), write};
    return {true, evicted};
  }
};

constexpr std::int64_t kOutTag = std::int64_t(0) << 60;
constexpr std::int64_t kImageTag = std::int64_t(1) << 60;
constexpr std::int64_t kFilterTag = std::int64_t(2) << 60;

}  // namespace

TrafficReport simulate(const SimConfig& cfg) {
  const ConvParams& p = validate_params(cfg.params);
  CacheModel m{cfg.M};
  if (!tiling_feasible(cfg.tiling, p, m))
    throw std::domain_error("simulate: tiling violates its invariants");

  auto bounds = lifted_bounds(p);
  Int iter_space(1);
  for (const auto& b : bounds) iter_space *= b;
  if (iter_space > cfg.iteration_cap) throw CapExceeded();

  const auto B = p.B.convert_to<std::int64_t>(), C = p.C.convert_to<std::int64_t>(),
             K = p.K.convert_to<std::int64_t>(), W = p.W.convert_to<std::int64_t>(),
             H = p.H.convert_to<std::int64_t>(), R = p.R.convert_to<std::int64_t>(),
             S = p.S.convert_to<std::int64_t>(), sw = p.sigma_w.convert_to<std::int64_t>(),
             sh = p.sigma_h.convert_to<std::int64_t>();
  const std::int64_t R1 = bounds[5].convert_to<std::int64_t>();
  const std::int64_t S1 = bounds[7].convert_to<std::int64_t>();
  const bool conv = p.kind == KernelKind::Convolution;
  const bool lru = cfg.policy == CachePolicy::LRU;
  const bool track = cfg.element_tracking;

  std::array<std::int64_t, 9> dims = {B, C, K, W, H, R1, sw, S1, sh};
  std::array<std::int64_t, 9> blk;
  {
    auto fs = cfg.tiling.fields();
    for (std::size_t i = 0; i < 9; ++i) blk[i] = fs[i]->convert_to<std::int64_t>();
  }

  TrafficReport rep;
  rep.rounds = 1;
  for (std::size_t i = 0; i < 9; ++i)
    rep.rounds *= ceil_div(Int(dims[i]), Int(blk[i]));

  const std::int64_t imgH = sh * H + S;
  auto out_word = [&](std::int64_t k, std::int64_t h, std::int64_t w, std::int64_t b) {
    return kOutTag | (((k * H + h) * W + w) * B + b);
  };
  auto image_word = [&](std::int64_t x, std::int64_t y, std::int64_t c, std::int64_t b) {
    return kImageTag | (((x * imgH + y) * C + c) * B + b);
  };
  auto filter_word = [&](std::int64_t k, std::int64_t r, std::int64_t s, std::int64_t c) {
    return kFilterTag | (((k * R + r) * S + s) * C + c);
  };

  LruCache cache;
  cache.capacity = 1;
  if (lru) {
    if (cfg.M > Int(200000000)) throw CapExceeded();
    cache.capacity = cfg.M.convert_to<std::uint64_t>();
  }
  auto lru_access = [&](std::int64_t word, bool write, ArrayTraffic& arr) {
    auto [miss, evicted] = cache.access(word, write);
    if (miss) {
      ++rep.loads;
      ++arr.loads;
    }
    if (evicted >= 0) {  // only Out words are ever dirty
      ++rep.stores;
      ++rep.out.stores;
    }
  };

  Tensor4 image, filter, out;
  std::optional<Tensor4> expected;
  if (track) {
    image = make_image(p);
    filter = make_filter(p);
    fill_random(image, cfg.data_seed);
    if (conv) fill_random(filter, cfg.data_seed ^ 0xabcdef12345ULL);
    out = Tensor4(K, H, W, B);
    if (!conv && cfg.pool_mode == PoolMode::Max)
      std::fill(out.data.begin(), out.data.end(), std::numeric_limits<std::int64_t>::min());
    expected = reference_convolution(p, image, filter, cfg.pool_mode);
  }

  // Outer tiles in the fixed nest order (b, c, k, w, h, r', r'', s', s'').
  std::array<std::int64_t, 9> base;
  std::set<std::int64_t> xs, ys, rs_set, ss_set;

  auto run_tile = [&]() {
    std::array<std::int64_t, 9> ext;
    for (std::size_t i = 0; i < 9; ++i)
      ext[i] = std::min(blk[i], dims[i] - base[i]);

    // Valid lifted r/s offsets within this tile: sw*r' + r'' must stay
    // inside the original filter extent.
    rs_set.clear();
    ss_set.clear();
    for (std::int64_t r1 = base[5]; r1 < base[5] + ext[5]; ++r1)
      for (std::int64_t r2 = base[6]; r2 < base[6] + ext[6]; ++r2)
        if (sw * r1 + r2 < R) rs_set.insert(sw * r1 + r2);
    for (std::int64_t s1 = base[7]; s1 < base[7] + ext[7]; ++s1)
      for (std::int64_t s2 = base[8]; s2 < base[8] + ext[8]; ++s2)
        if (sh * s1 + s2 < S) ss_set.insert(sh * s1 + s2);
    if (rs_set.empty() || ss_set.empty()) return;  // nothing executes here

    if (cfg.policy == CachePolicy::IdealPerTile) {
      Int out_n = Int(ext[2]) * ext[4] * ext[3] * ext[0];
      Int img_n, fil_n(0);
      xs.clear();
      ys.clear();
      for (std::int64_t r : rs_set)
        for (std::int64_t w = base[3]; w < base[3] + ext[3]; ++w) xs.insert(r + sw * w);
      for (std::int64_t s : ss_set)
        for (std::int64_t h = base[4]; h < base[4] + ext[4]; ++h) ys.insert(s + sh * h);
      img_n = Int(xs.size()) * Int(ys.size()) * ext[1] * ext[0];
      if (conv) fil_n = Int(ext[2]) * ext[1] * Int(rs_set.size()) * Int(ss_set.size());
      rep.out.loads += out_n;
      rep.out.stores += out_n;
      rep.image.loads += img_n;
      rep.filter.loads += fil_n;
      rep.loads += out_n + img_n + fil_n;
      rep.stores += out_n;
    }

    if (!lru && !track) return;
    for (std::int64_t b = base[0]; b < base[0] + ext[0]; ++b)
      for (std::int64_t c = base[1]; c < base[1] + ext[1]; ++c)
        for (std::int64_t k = base[2]; k < base[2] + ext[2]; ++k)
          for (std::int64_t w = base[3]; w < base[3] + ext[3]; ++w)
            for (std::int64_t h = base[4]; h < base[4] + ext[4]; ++h)
              for (std::int64_t r1 = base[5]; r1 < base[5] + ext[5]; ++r1)
                for (std::int64_t r2 = base[6]; r2 < base[6] + ext[6]; ++r2) {
                  std::int64_t r = sw * r1 + r2;
                  if (r >= R) continue;
                  for (std::int64_t s1 = base[7]; s1 < base[7] + ext[7]; ++s1)
                    for (std::int64_t s2 = base[8]; s2 < base[8] + ext[8]; ++s2) {
                      std::int64_t s = sh * s1 + s2;
                      if (s >= S) continue;
                      std::int64_t x = r + sw * w, y = s + sh * h;
                      if (lru) {
                        lru_access(image_word(x, y, c, b), false, rep.image);
                        if (conv) lru_access(filter_word(k, r, s, c), false, rep.filter);
                        lru_access(out_word(k, h, w, b), true, rep.out);
                      }
                      if (track) {
                        std::int64_t img = image.at(x, y, c, b);
                        std::int64_t& o = out.at(k, h, w, b);
                        if (conv)
                          o += img * filter.at(k, r, s, c);
                        else if (cfg.pool_mode == PoolMode::Max)
                          o = std::max(o, img);
                        else
                          o += img;
                      }
                    }
                }
  };

  for (base[0] = 0; base[0] < dims[0]; base[0] += blk[0])
    for (base[1] = 0; base[1] < dims[1]; base[1] += blk[1])
      for (base[2] = 0; base[2] < dims[2]; base[2] += blk[2])
        for (base[3] = 0; base[3] < dims[3]; base[3] += blk[3])
          for (base[4] = 0; base[4] < dims[4]; base[4] += blk[4])
            for (base[5] = 0; base[5] < dims[5]; base[5] += blk[5])
              for (base[6] = 0; base[6] < dims[6]; base[6] += blk[6])
                for (base[7] = 0; base[7] < dims[7]; base[7] += blk[7])
                  for (base[8] = 0; base[8] < dims[8]; base[8] += blk[8]) run_tile();

  if (lru) {
    // Write back whatever is still dirty.
    for (const auto& [word, entry] : cache.lines) {
      if (!entry.dirty) continue;
      ++rep.stores;
      ++rep.out.stores;  // only Out words are ever written
      (void)word;
    }
  }
  rep.total_words = rep.loads + rep.stores;
  if (track) rep.tracking_ok = (out.data == expected->data);
  return rep;
}

}  // namespace convopt
