#include "convopt/json_io.hpp"

#include <fstream>

namespace convopt {

Json int_to_json(const Int& v) {
  static const Int kSafeMax = (Int(1) << 53);
  if (v <= kSafeMax && v >= -kSafeMax) return v.convert_to<std::int64_t>();
  return v.str();
}

Int int_from_json(const Json& j) {
  if (j.is_string()) return Int(j.get<std::string>());
  return Int(j.get<std::int64_t>());
}

ConvParams params_from_json(const Json& j) {
  ConvParams p;
  p.B = int_from_json(j.at("B"));
  p.C = int_from_json(j.at("C"));
  p.K = int_from_json(j.at("K"));
  p.W = int_from_json(j.at("W"));
  p.H = int_from_json(j.at("H"));
  p.R = int_from_json(j.at("R"));
  p.S = int_from_json(j.at("S"));
  p.sigma_w = int_from_json(j.at("sigma_w"));
  p.sigma_h = int_from_json(j.at("sigma_h"));
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "conv")
    p.kind = KernelKind::Convolution;
  else if (kind == "pool")
    p.kind = KernelKind::Pooling;
  else
    throw std::invalid_argument("layer kind must be \"conv\" or \"pool\"");
  return p;
}

Json params_to_json(const ConvParams& p) {
  return Json{{"B", int_to_json(p.B)},
              {"C", int_to_json(p.C)},
              {"K", int_to_json(p.K)},
              {"W", int_to_json(p.W)},
              {"H", int_to_json(p.H)},
              {"R", int_to_json(p.R)},
              {"S", int_to_json(p.S)},
              {"sigma_w", int_to_json(p.sigma_w)},
              {"sigma_h", int_to_json(p.sigma_h)},
              {"kind", p.kind == KernelKind::Pooling ? "pool" : "conv"}};
}

ConvParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layer file: " + path);
  Json j;
  in >> j;
  return params_from_json(j);
}

Json tiling_to_json(const Tiling& t) {
  return Json{{"b_b", int_to_json(t.b_b)},   {"b_c", int_to_json(t.b_c)},
              {"b_k", int_to_json(t.b_k)},   {"b_w", int_to_json(t.b_w)},
              {"b_h", int_to_json(t.b_h)},   {"b_r1", int_to_json(t.b_r1)},
              {"b_r2", int_to_json(t.b_r2)}, {"b_s1", int_to_json(t.b_s1)},
              {"b_s2", int_to_json(t.b_s2)}};
}

Tiling tiling_from_json(const Json& j) {
  Tiling t;
  t.b_b = int_from_json(j.at("b_b"));
  t.b_c = int_from_json(j.at("b_c"));
  t.b_k = int_from_json(j.at("b_k"));
  t.b_w = int_from_json(j.at("b_w"));
  t.b_h = int_from_json(j.at("b_h"));
  t.b_r1 = int_from_json(j.at("b_r1"));
  t.b_r2 = int_from_json(j.at("b_r2"));
  t.b_s1 = int_from_json(j.at("b_s1"));
  t.b_s2 = int_from_json(j.at("b_s2"));
  return t;
}

Json bound_to_json(const BoundBreakdown& b) {
  Json terms;
  terms["out_size"] = int_to_json(b.out_size);
  terms["image_proxy"] = int_to_json(b.image_proxy);
  if (b.filter_size) terms["filter_size"] = int_to_json(*b.filter_size);
  terms["hbl_term"] = int_to_json(b.hbl_term);
  if (b.small_filter_term) terms["small_filter_term"] = int_to_json(*b.small_filter_term);
  return Json{{"kind", b.kind == KernelKind::Pooling ? "pool" : "conv"},
              {"terms", terms},
              {"max_term", int_to_json(b.max_term)},
              {"dominant_index", static_cast<int>(b.dominant) + 1},
              {"dominant", bound_term_name(b.dominant)}};
}

Json traffic_to_json(const TrafficReport& r) {
  Json j{{"loads", int_to_json(r.loads)},
         {"stores", int_to_json(r.stores)},
         {"total_words", int_to_json(r.total_words)},
         {"rounds", int_to_json(r.rounds)},
         {"per_array",
          Json{{"out", Json{{"loads", int_to_json(r.out.loads)},
                            {"stores", int_to_json(r.out.stores)}}},
               {"image", Json{{"loads", int_to_json(r.image.loads)},
                              {"stores", int_to_json(r.image.stores)}}},
               {"filter", Json{{"loads", int_to_json(r.filter.loads)},
                               {"stores", int_to_json(r.filter.stores)}}}}}};
  if (r.tracking_ok) j["tracking_ok"] = *r.tracking_ok;
  return j;
}

Json exponent_solution_to_json(const ExponentSolution& s) {
  Json witness = Json::array();
  for (const auto& v : s.s) witness.push_back(rat_to_string(v));
  Json cons = Json::array();
  for (const auto& c : s.constraints_used) {
    Json ranks = Json::array();
    for (auto r : c.image_ranks) ranks.push_back(r);
    cons.push_back(Json{{"subgroup_rank", c.subgroup_rank}, {"image_ranks", ranks}});
  }
  return Json{{"total", rat_to_string(s.total)}, {"witness", witness}, {"constraints", cons}};
}

namespace {

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(rat_to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const Json& j, std::size_t cols_hint) {
  Mat m(0, cols_hint);
  for (const auto& row : j) {
    std::vector<Rat> r;
    for (const auto& v : row) r.push_back(rat_from_string(v.get<std::string>()));
    m.append_row(r);
  }
  return m;
}

Json vec_to_json(const std::vector<Rat>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(rat_to_string(x));
  return out;
}

std::vector<Rat> vec_from_json(const Json& j) {
  std::vector<Rat> v;
  for (const auto& x : j) v.push_back(rat_from_string(x.get<std::string>()));
  return v;
}

Json region_to_json(const Region& r) {
  return Json{{"A", mat_to_json(r.A)}, {"b", vec_to_json(r.b)}, {"dim", r.dim}};
}

Region region_from_json(const Json& j) {
  Region r;
  r.dim = j.at("dim").get<std::size_t>();
  r.A = mat_from_json(j.at("A"), r.dim);
  r.b = vec_from_json(j.at("b"));
  return r;
}

}  // namespace

Json partition_to_json(const Partition& part, KernelKind kind) {
  Json pieces = Json::array();
  for (const auto& piece : part.pieces) {
    AffineForm cost = log_cost_form(piece.optimizer);
    pieces.push_back(Json{{"region", region_to_json(piece.region)},
                          {"optimizer", Json{{"E", mat_to_json(piece.optimizer.E)},
                                             {"e", vec_to_json(piece.optimizer.e)}}},
                          {"cost_formula", Json{{"coeffs", vec_to_json(cost.coeffs)},
                                                {"constant", rat_to_string(cost.constant)}}}});
  }
  return Json{{"kind", kind == KernelKind::Pooling ? "pool" : "conv"},
              {"parent", region_to_json(part.parent)},
              {"pieces", pieces}};
}

std::pair<Partition, KernelKind> partition_from_json(const Json& j) {
  Partition part;
  part.parent = region_from_json(j.at("parent"));
  for (const auto& pj : j.at("pieces")) {
    Piece piece;
    piece.region = region_from_json(pj.at("region"));
    piece.optimizer.E = mat_from_json(pj.at("optimizer").at("E"), piece.region.dim);
    piece.optimizer.e = vec_from_json(pj.at("optimizer").at("e"));
    part.pieces.push_back(std::move(piece));
  }
  std::string kind = j.at("kind").get<std::string>();
  return {std::move(part),
          kind == "pool" ? KernelKind::Pooling : KernelKind::Convolution};
}

Json verification_report_to_json(const VerificationReport& rep) {
  Json entries = Json::array();
  for (const auto& e : rep.entries) {
    Json ej{{"piece", e.piece_index},
            {"bound_index", e.bound_index},
            {"min_gap", rat_to_string(e.min_gap)}};
    if (e.max_gap) ej["max_gap"] = rat_to_string(*e.max_gap);
    entries.push_back(ej);
  }
  return Json{{"num_regions", rep.num_regions},
              {"all_max_gaps_zero", rep.all_max_gaps_zero},
              {"all_min_gaps_nonneg", rep.all_min_gaps_nonneg},
              {"entries", entries}};
}

}  // namespace convopt
