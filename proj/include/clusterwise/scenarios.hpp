#pragma once

// Named Monte Carlo scenarios: one entry per simulation-table cell plus the
// efficiency, measurement-error and calibration studies. Cell names look like
// "table2:G100" or "table4:G25N500"; family names ("table2") combine with a
// --G / --N1 override.

#include <optional>
#include <string>
#include <vector>

#include "clusterwise/montecarlo.hpp"

namespace clusterwise {

enum class StudyKind { SizePower, Efficiency, MeasurementError, Calibration };

struct ScenarioEntry {
  std::string name;
  std::string family;
  StudyKind study = StudyKind::SizePower;
  McConfig config;
};

// The full catalog (every cell of the simulation tables at desk-scale
// defaults: R = 2000, seed 42).
const std::vector<ScenarioEntry>& scenario_catalog();

// Resolve "family" or "family:cell" with optional G / N1 overrides.
ScenarioEntry resolve_scenario(const std::string& name, std::optional<int> g_override = {},
                               std::optional<int> n1_override = {});

McReport run_study(const ScenarioEntry& entry);

}  // namespace clusterwise
