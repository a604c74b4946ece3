#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "convopt/model.hpp"
#include "convopt/tiling.hpp"

namespace convopt {

enum class CachePolicy { IdealPerTile, LRU };
enum class PoolMode { Average, Max };

struct SimConfig {
  ConvParams params;
  Tiling tiling;
  Int M = 1;
  CachePolicy policy = CachePolicy::IdealPerTile;
  bool element_tracking = false;
  PoolMode pool_mode = PoolMode::Average;
  std::uint64_t data_seed = 1;        // test-tensor contents for tracking
  Int iteration_cap = Int(100000000);  // desk-scale guard
};

struct ArrayTraffic {
  Int loads = 0;
  Int stores = 0;
};

struct TrafficReport {
  Int loads = 0;
  Int stores = 0;
  Int total_words = 0;
  Int rounds = 0;  // product over the nine dimensions of ceil(bound / block)
  ArrayTraffic out, image, filter;
  std::optional<bool> tracking_ok;  // set when element_tracking is on
};

struct Footprint {
  Int out = 0;
  Int image = 0;
  Int filter = 0;
};

/// Distinct words touched by one origin-anchored tile: Out = bk*bh*bw*bb,
/// Filter = bc*bk*br'*br''*bs'*bs'', Image = bb*bc*(bw+br'-1)(bh+bs'-1)*br''*bs''
/// (the exact extent of the strided window union; the +1-free form is what
/// the 4M feasibility budget bounds).
Footprint tile_footprint(const Tiling& t, const ConvParams& p);

/// Words every execution must move: each touched input read once, each
/// output written once (and read once for accumulation).
Int compulsory_traffic(const ConvParams& p);

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded() : std::runtime_error("simulation exceeds iteration cap") {}
};

/// Executes the blocked nine-loop nest (intra-tile order b,c,k,w,h,r',r'',
/// s',s'') and counts words moved. IdealPerTile charges each tile's distinct
/// words once per visit; LRU replays the element trace through a fully
/// associative cache of M words, counting misses and dirty write-backs.
TrafficReport simulate(const SimConfig& cfg);

/// Plain dense 4-d tensor of 64-bit integers; integer data keeps blocked and
/// reference executions bit-identical under reassociation.
struct Tensor4 {
  std::array<std::int64_t, 4> dims{1, 1, 1, 1};
  std::vector<std::int64_t> data;

  Tensor4() = default;
  Tensor4(std::int64_t d0, std::int64_t d1, std::int64_t d2, std::int64_t d3)
      : dims{d0, d1, d2, d3},
        data(static_cast<std::size_t>(d0 * d1 * d2 * d3), 0) {}
  std::int64_t& at(std::int64_t i0, std::int64_t i1, std::int64_t i2, std::int64_t i3) {
    return data[static_cast<std::size_t>(((i0 * dims[1] + i1) * dims[2] + i2) * dims[3] + i3)];
  }
  std::int64_t at(std::int64_t i0, std::int64_t i1, std::int64_t i2, std::int64_t i3) const {
    return data[static_cast<std::size_t>(((i0 * dims[1] + i1) * dims[2] + i2) * dims[3] + i3)];
  }
};

/// Image is indexed (x, y, c, b) with x of extent sw*W+R, y of extent
/// sh*H+S; Out is (k, h, w, b); Filter is (k, r, s, c).
Tensor4 make_image(const ConvParams& p);
Tensor4 make_filter(const ConvParams& p);
void fill_random(Tensor4& t, std::uint64_t seed, int lo = -4, int hi = 4);

/// The straightforward seven-loop execution; the arithmetic oracle for
/// element tracking. For pooling, Average accumulates the plain window sum
/// (scaled once at the end by the caller if desired) and Max takes maxima.
Tensor4 reference_convolution(const ConvParams& p, const Tensor4& image,
                              const Tensor4& filter, PoolMode mode = PoolMode::Average);

}  // namespace convopt
