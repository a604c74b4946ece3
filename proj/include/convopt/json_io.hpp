#pragma once

#include <string>

#include "json.hpp"

#include "convopt/bounds.hpp"
#include "convopt/model.hpp"
#include "convopt/mplp.hpp"
#include "convopt/sim.hpp"
#include "convopt/tiling.hpp"

namespace convopt {

using Json = nlohmann::json;

/// {"B":..,"C":..,"K":..,"W":..,"H":..,"R":..,"S":..,
///  "sigma_w":..,"sigma_h":..,"kind":"conv"|"pool"}
ConvParams params_from_json(const Json& j);
Json params_to_json(const ConvParams& p);
ConvParams load_params_file(const std::string& path);

Json tiling_to_json(const Tiling& t);
Tiling tiling_from_json(const Json& j);

Json bound_to_json(const BoundBreakdown& b);
Json traffic_to_json(const TrafficReport& r);
Json exponent_solution_to_json(const ExponentSolution& s);

/// Partition files carry the kernel kind, the parent region and every
/// (region, optimizer, cost formula) triple; rationals are "p/q" strings so
/// the round trip is bit-exact.
Json partition_to_json(const Partition& part, KernelKind kind);
std::pair<Partition, KernelKind> partition_from_json(const Json& j);

Json verification_report_to_json(const VerificationReport& rep);

/// JSON integer when the value is safely representable, decimal string
/// otherwise (counts routinely exceed 2^53).
Json int_to_json(const Int& v);
Int int_from_json(const Json& j);

}  // namespace convopt
