#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "convopt/json_io.hpp"

namespace {

using namespace convopt;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitBadInput = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CONVOPT_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

std::vector<Int> parse_m_values(const std::string& list, double m_min, double m_max,
                                int points) {
  std::vector<Int> ms;
  if (!list.empty()) {
    std::size_t pos = 0;
    while (pos < list.size()) {
      std::size_t comma = list.find(',', pos);
      if (comma == std::string::npos) comma = list.size();
      ms.emplace_back(list.substr(pos, comma - pos));
      pos = comma + 1;
    }
  } else if (points > 0) {
    if (m_min < 1 || m_max < m_min) throw std::invalid_argument("bad M range");
    for (int i = 0; i < points; ++i) {
      double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      double v = std::exp(std::log(m_min) + t * (std::log(m_max) - std::log(m_min)));
      Int m(static_cast<long long>(std::llround(v)));
      if (ms.empty() || ms.back() != m) ms.push_back(m);
    }
  }
  if (ms.empty()) throw std::invalid_argument("no M values given");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i] < 1) throw std::invalid_argument("M values must be positive");
    if (i > 0 && ms[i] <= ms[i - 1])
      throw std::invalid_argument("M values must be strictly increasing");
  }
  return ms;
}

int cmd_bound(const std::string& layer_path, const std::string& m_str) {
  ConvParams p = validate_params(load_params_file(layer_path));
  BoundBreakdown b = lower_bound(p, CacheModel{Int(m_str)});
  std::cout << bound_to_json(b).dump(2) << "\n";
  return kExitOk;
}

int cmd_tile(const std::string& layer_path, const std::string& m_str) {
  ConvParams p = validate_params(load_params_file(layer_path));
  CacheModel m{Int(m_str)};
  Tiling t = solve_tiling(p, m);
  Json j = tiling_to_json(t);
  j["block_product"] = int_to_json(t.block_product());
  j["comm_cost_words"] = int_to_json(rat_floor(tiling_comm_cost(t, p, m)));
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_oracle(const std::string& layer_path, const std::string& m_str) {
  ConvParams p = validate_params(load_params_file(layer_path));
  CacheModel m{Int(m_str)};
  DecisionTreeResult res = stride1_decision_tree(p, m);
  Json j{{"case", res.case_label},
         {"alb_words", int_to_json(res.alb_words)},
         {"tiling", tiling_to_json(res.tiling)}};
  j["comm_cost_words"] = int_to_json(rat_floor(tiling_comm_cost(res.tiling, p, m)));
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& layer_path, const std::string& m_list, double m_min,
              double m_max, int points, const std::string& out_path) {
  ConvParams p = validate_params(load_params_file(layer_path));
  std::vector<Int> ms = parse_m_values(m_list, m_min, m_max, points);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot open output file: " + out_path);
    os = &file;
  }
  *os << "M,lb_term1,lb_term2,lb_term3,lb_term4,lb_term5,lb_max,"
         "lp_tiling_cost,matmul_reuse_cost,decision_tree_cost\n";
  const Int flops = total_flops(p);
  const bool stride1 = p.sigma_w == 1 && p.sigma_h == 1;
  for (const Int& M : ms) {
    CacheModel m{M};
    BoundBreakdown b = lower_bound(p, m);
    Tiling t = solve_tiling(p, m);
    Int lp_cost = rat_floor(tiling_comm_cost(t, p, m));
    Int matmul_reuse = rat_floor_sqrt(Rat(flops * flops, M));
    *os << M.str() << "," << b.out_size.str() << "," << b.image_proxy.str() << ","
        << (b.filter_size ? b.filter_size->str() : "") << "," << b.hbl_term.str() << ","
        << (b.small_filter_term ? b.small_filter_term->str() : "") << ","
        << b.max_term.str() << "," << lp_cost.str() << "," << matmul_reuse.str() << ",";
    if (stride1) {
      DecisionTreeResult res = stride1_decision_tree(p, m);
      *os << rat_floor(tiling_comm_cost(res.tiling, p, m)).str();
    }
    *os << "\n";
  }
  return kExitOk;
}

int cmd_partition(const std::string& kind_str, std::uint64_t seed, int theta_max,
                  const std::string& out_path) {
  KernelKind kind;
  if (kind_str == "conv")
    kind = KernelKind::Convolution;
  else if (kind_str == "pool")
    kind = KernelKind::Pooling;
  else
    throw std::invalid_argument("--kind must be conv or pool");

  LPInstance lp = build_tiling_lp(kind);
  Partition part = partition_parameter_space(lp, cnn_parent_region(theta_max), seed);
  Json j = partition_to_json(part, kind);
  j["seed"] = seed;
  j["num_regions"] = part.pieces.size();
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream file(out_path);
    if (!file) throw std::runtime_error("cannot open output file: " + out_path);
    file << j.dump(2) << "\n";
    std::cout << "{\"num_regions\": " << part.pieces.size() << "}\n";
  }
  return kExitOk;
}

int cmd_verify(const std::string& partition_path) {
  std::ifstream in(partition_path);
  if (!in) throw std::runtime_error("cannot open partition file: " + partition_path);
  Json j;
  in >> j;
  auto [part, kind] = partition_from_json(j);
  VerificationReport rep = verify_attainability(part, kind);
  std::cout << verification_report_to_json(rep).dump(2) << "\n";
  return rep.ok() ? kExitOk : kExitVerifyFailed;
}

int cmd_simulate(const std::string& layer_path, const std::string& m_str,
                 const std::string& tiling_path, bool auto_tile,
                 const std::string& policy_str, bool track) {
  ConvParams p = validate_params(load_params_file(layer_path));
  CacheModel m{Int(m_str)};
  SimConfig cfg;
  cfg.params = p;
  cfg.M = m.M;
  if (auto_tile) {
    cfg.tiling = solve_tiling(p, m);
  } else if (!tiling_path.empty()) {
    std::ifstream in(tiling_path);
    if (!in) throw std::runtime_error("cannot open tiling file: " + tiling_path);
    Json j;
    in >> j;
    cfg.tiling = tiling_from_json(j);
  } else {
    throw std::invalid_argument("simulate needs --tiling FILE or --auto");
  }
  if (policy_str == "lru")
    cfg.policy = CachePolicy::LRU;
  else if (policy_str == "ideal")
    cfg.policy = CachePolicy::IdealPerTile;
  else
    throw std::invalid_argument("--policy must be lru or ideal");
  cfg.element_tracking = track;
  cfg.data_seed = default_seed();
  TrafficReport rep = simulate(cfg);
  Json j = traffic_to_json(rep);
  j["tiling"] = tiling_to_json(cfg.tiling);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Communication lower bounds and optimal tilings for convolution/pooling layers"};
  app.require_subcommand(1);

  std::string layer_path, m_str = "1024", tiling_path, out_path, m_list;
  std::string kind_str = "conv", policy_str = "lru", partition_path;
  double m_min = 0, m_max = 0;
  int points = 0, theta_max = 8;
  std::uint64_t seed = default_seed();
  bool auto_tile = false, track = false;

  auto* bound = app.add_subcommand("bound", "Print the lower-bound breakdown for a layer");
  bound->add_option("layer", layer_path, "layer JSON file")->required();
  bound->add_option("--m", m_str, "cache size in words")->required();

  auto* tile = app.add_subcommand("tile", "Solve the tiling LP and print integer block sizes");
  tile->add_option("layer", layer_path)->required();
  tile->add_option("--m", m_str)->required();

  auto* oracle = app.add_subcommand("oracle-stride1", "Unit-stride decision-tree oracle");
  oracle->add_option("layer", layer_path)->required();
  oracle->add_option("--m", m_str)->required();

  auto* sweep = app.add_subcommand("sweep", "CSV sweep of bounds and tiling costs over M");
  sweep->add_option("layer", layer_path)->required();
  sweep->add_option("--m-list", m_list, "comma-separated M values");
  sweep->add_option("--m-min", m_min);
  sweep->add_option("--m-max", m_max);
  sweep->add_option("--points", points, "geometric range point count");
  sweep->add_option("--out", out_path, "CSV output path (stdout if omitted)");

  auto* partition = app.add_subcommand("partition", "Partition parameter space (multiparametric LP)");
  partition->add_option("--kind", kind_str, "conv or pool");
  partition->add_option("--seed", seed);
  partition->add_option("--theta-max", theta_max, "box bound on log_M parameters");
  partition->add_option("--out", out_path, "partition JSON output path");

  auto* verify = app.add_subcommand("verify", "Re-verify attainability of a partition file");
  verify->add_option("--partition", partition_path)->required();

  auto* simulate = app.add_subcommand("simulate", "Run the cache simulator on a tiling");
  simulate->add_option("layer", layer_path)->required();
  simulate->add_option("--m", m_str)->required();
  simulate->add_option("--tiling", tiling_path, "tiling JSON file");
  simulate->add_flag("--auto", auto_tile, "use the LP tiling");
  simulate->add_option("--policy", policy_str, "lru or ideal");
  simulate->add_flag("--track", track, "verify blocked arithmetic against the reference loop");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bound->parsed()) return cmd_bound(layer_path, m_str);
    if (tile->parsed()) return cmd_tile(layer_path, m_str);
    if (oracle->parsed()) return cmd_oracle(layer_path, m_str);
    if (sweep->parsed()) return cmd_sweep(layer_path, m_list, m_min, m_max, points, out_path);
    if (partition->parsed()) return cmd_partition(kind_str, seed, theta_max, out_path);
    if (verify->parsed()) return cmd_verify(partition_path);
    if (simulate->parsed())
      return cmd_simulate(layer_path, m_str, tiling_path, auto_tile, policy_str, track);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
