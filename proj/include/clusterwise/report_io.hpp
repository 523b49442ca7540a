#pragma once

// Report serialization: McReport and fit results as JSON, wide CSV rows per
// (scenario, estimator) in the simulation-table column layout, and tidy
// long-format CSV for plotting. Every file carries the config hash and seed;
// a rerun with the same hash is byte-identical.

#include <json.hpp>

#include <string>
#include <vector>

#include "clusterwise/estimators.hpp"
#include "clusterwise/inference.hpp"
#include "clusterwise/montecarlo.hpp"

namespace clusterwise {

// FNV-1a over the canonical (sorted-key) JSON dump.
std::uint64_t fnv1a_hash(const std::string& bytes);
std::string config_hash_hex(const nlohmann::json& config);

nlohmann::json to_json(const McConfig& cfg);
nlohmann::json to_json(const McReport& report, const std::string& config_hash);
nlohmann::json to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

// Wide CSV: one row per estimator with MSE_intercept, MSE_slope, size, cv,
// power, sc_power columns.
std::string mc_report_csv(const McReport& report, const std::string& config_hash);
// Tidy long format: scenario, G, estimator, metric, value.
std::string mc_report_long_csv(const McReport& report, const std::string& config_hash);

std::string coef_table_csv(const std::vector<CoefRow>& pooled, const std::vector<CoefRow>& averaged,
                           const std::string& config_hash);
std::string gof_csv(const GofMetrics& pooled, const GofMetrics& averaged,
                    const std::string& config_hash);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace clusterwise
