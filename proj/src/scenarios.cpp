#include "clusterwise/scenarios.hpp"

#include <algorithm>

#include "clusterwise/errors.hpp"

namespace clusterwise {

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

McConfig base_config() {
  McConfig cfg;
  cfg.beta_null = vec2(1.0, 0.0);
  cfg.level = 0.05;
  cfg.replications = 2000;
  cfg.seed = 42;
  cfg.workers = 1;
  return cfg;
}

std::vector<ScenarioEntry> build_catalog() {
  std::vector<ScenarioEntry> catalog;

  const int balanced_g[] = {25, 50, 100, 200, 500};
  for (const int g : balanced_g) {
    ScenarioEntry e;
    e.family = "table2";
    e.name = "table2:G" + std::to_string(g);
    e.config = base_config();
    e.config.scenario_name = e.name;
    e.config.design = DesignSpec::balanced(g);
    e.config.omega = OmegaSpec::random_strong();
    e.config.beta_alt = vec2(1.0, 0.08);
    catalog.push_back(e);

    e.family = "table3";
    e.name = "table3:G" + std::to_string(g);
    e.config.scenario_name = e.name;
    e.config.omega = OmegaSpec::scaled_strong();
    e.config.beta_alt = vec2(1.0, 0.003);
    catalog.push_back(e);
  }

  struct Cell { int g, n1; };
  const Cell first_half[] = {{25, 500}, {25, 1500}, {50, 500}, {50, 1500}, {100, 500}};
  const Cell second_half[] = {{100, 1500}, {200, 500}, {200, 1500}, {500, 500}, {500, 1500}};
  auto add_unbalanced = [&](const char* family, const Cell& cell, bool scaled) {
    ScenarioEntry e;
    e.family = family;
    e.name = std::string(family) + ":G" + std::to_string(cell.g) + "N" + std::to_string(cell.n1);
    e.config = base_config();
    e.config.scenario_name = e.name;
    e.config.design = DesignSpec::unbalanced_one_large(cell.g, cell.n1);
    e.config.omega = scaled ? OmegaSpec::scaled_strong() : OmegaSpec::random_strong();
    e.config.beta_alt = vec2(1.0, scaled ? 0.003 : 0.08);
    catalog.push_back(e);
  };
  for (const auto& c : first_half) add_unbalanced("table4", c, false);
  for (const auto& c : second_half) add_unbalanced("table5", c, false);
  for (const auto& c : first_half) add_unbalanced("table6", c, true);
  for (const auto& c : second_half) add_unbalanced("table7", c, true);

  {
    // One dominating cluster with equicorrelated errors; small clusters keep
    // the paper's {4..10} sizes.
    ScenarioEntry e;
    e.family = "efficiency";
    e.name = "efficiency:N1eqG100";
    e.study = StudyKind::Efficiency;
    e.config = base_config();
    e.config.scenario_name = e.name;
    e.config.design = DesignSpec::unbalanced_one_large(100, 100);
    e.config.omega = OmegaSpec::equicorrelated(2.0, 1.0);
    catalog.push_back(e);

    // Homoskedastic sanity cell: equal sizes, iid errors, mostly
    // between-cluster regressor variation; both estimators are comparable LS.
    e.name = "efficiency:homoskedastic";
    e.config.scenario_name = e.name;
    e.config.design = DesignSpec::balanced(100, 30, 30);
    e.config.design.w2_lo = 50.0;
    e.config.design.w2_hi = 60.0;
    e.config.omega = OmegaSpec::identity(25.0);
    catalog.push_back(e);
  }

  {
    // Measurement-error split; scaled errors keep the Monte Carlo noise well
    // below the biases being measured.
    ScenarioEntry e;
    e.family = "me";
    e.name = "me:weak";
    e.study = StudyKind::MeasurementError;
    e.config = base_config();
    e.config.scenario_name = e.name;
    e.config.design = DesignSpec::balanced(500);
    e.config.omega = OmegaSpec::scaled_strong();
    e.config.beta_null = vec2(1.0, 1.0);
    e.config.me = MeasurementErrorSpec{{OmegaSpec::identity(300.0)}};
    catalog.push_back(e);

    e.name = "me:strong";
    e.config.scenario_name = e.name;
    e.config.me = MeasurementErrorSpec{{OmegaSpec::equicorrelated(2.0, 1.0)}};
    catalog.push_back(e);
  }

  for (const int g : {25, 200, 500}) {
    ScenarioEntry e;
    e.family = "calibration";
    e.name = "calibration:G" + std::to_string(g);
    e.study = StudyKind::Calibration;
    e.config = base_config();
    e.config.scenario_name = e.name;
    e.config.design = DesignSpec::balanced(g);
    e.config.omega = OmegaSpec::random_strong();
    catalog.push_back(e);
  }

  return catalog;
}

}  // namespace

const std::vector<ScenarioEntry>& scenario_catalog() {
  static const std::vector<ScenarioEntry> catalog = build_catalog();
  return catalog;
}

ScenarioEntry resolve_scenario(const std::string& name, std::optional<int> g_override,
                               std::optional<int> n1_override) {
  const auto& catalog = scenario_catalog();
  const auto exact = std::find_if(catalog.begin(), catalog.end(),
                                  [&](const ScenarioEntry& e) { return e.name == name; });
  ScenarioEntry entry;
  if (exact != catalog.end()) {
    entry = *exact;
  } else {
    // Family name: pick the first member, then apply overrides.
    const auto fam = std::find_if(catalog.begin(), catalog.end(),
                                  [&](const ScenarioEntry& e) { return e.family == name; });
    if (fam == catalog.end())
      throw ConfigError("unknown scenario '" + name + "' (see --list-scenarios)");
    entry = *fam;
  }
  if (g_override) entry.config.design.n_clusters = *g_override;
  if (n1_override) {
    if (entry.config.design.kind != DesignSpec::Kind::UnbalancedOneLarge)
      throw ConfigError("--N1 applies only to one-large-cluster scenarios");
    entry.config.design.large_size = *n1_override;
  }
  if (g_override || n1_override) {
    entry.name = entry.family + ":G" + std::to_string(entry.config.design.n_clusters);
    if (entry.config.design.kind == DesignSpec::Kind::UnbalancedOneLarge)
      entry.name += "N" + std::to_string(entry.config.design.large_size);
    entry.config.scenario_name = entry.name;
  }
  return entry;
}

McReport run_study(const ScenarioEntry& entry) {
  switch (entry.study) {
    case StudyKind::SizePower: return run_size_power(entry.config);
    case StudyKind::Efficiency: return run_efficiency(entry.config);
    case StudyKind::MeasurementError: return run_me_study(entry.config);
    case StudyKind::Calibration: return variance_calibration(entry.config);
  }
  throw DomainError("unknown study kind");
}

}  // namespace clusterwise
