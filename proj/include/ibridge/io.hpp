#pragma once

#include "ibridge/bridge.hpp"
#include "ibridge/eval.hpp"
#include "ibridge/simgen.hpp"
#include "ibridge/tune.hpp"

#include <json.hpp>

#include <string>

namespace ibridge {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

nlohmann::json to_json(const BridgeConfig& config);
/// Config, selected pairs, per-block L2 norms, coefficients and objective trace.
nlohmann::json to_json(const FitResult& fit, const GeneStructure& structure,
                       const std::vector<std::string>& subtype_ids);
nlohmann::json to_json(const TuningReport& report);
nlohmann::json to_json(const SimDesign& design);
nlohmann::json to_json(const TruthSet& truth, const GeneStructure& structure,
                       const std::vector<std::string>& subtype_ids);
nlohmann::json to_json(const FitDiagnostics& diagnostics);

} // namespace ibridge
