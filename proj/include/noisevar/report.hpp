#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "noisevar/estimator.hpp"
#include "noisevar/generators.hpp"
#include "noisevar/scan.hpp"

namespace noisevar {

/// JSON views of the reports. `significant_digits` > 0 rounds every real
/// number; 0 keeps full round-trip precision.
nlohmann::json report_to_json(const EstimateReport& report, int significant_digits = 0);
nlohmann::json scan_to_json(const ScanReport& report, int significant_digits = 0);
ScanReport scan_from_json(const nlohmann::json& j);

nlohmann::json grid_config_to_json(const GridConfig& config);
nlohmann::json options_to_json(const AnalysisOptions& options);

nlohmann::json config_to_json(const IkedaConfig& cfg);
nlohmann::json config_to_json(const LorenzConfig& cfg);
nlohmann::json config_to_json(const HenonConfig& cfg);

const char* to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& s);

}  // namespace noisevar
