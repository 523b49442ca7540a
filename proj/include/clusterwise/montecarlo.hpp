#pragma once

// Replication engine: empirical size and power at the asymptotic critical
// value, size-corrected critical values and power, componentwise MSE,
// variance-estimator calibration, efficiency ratios and measurement-error
// bias studies.
//
// Determinism: replication z draws from Rng::stream(seed, z) only and the
// design from a reserved stream, so reports are bit-identical for any worker
// count. Workers fill per-replication slots; aggregation is a single
// sequential compensated reduction over the slots.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clusterwise/dgp.hpp"
#include "clusterwise/estimators.hpp"
#include "clusterwise/inference.hpp"

namespace clusterwise {

struct McConfig {
  std::string scenario_name;
  DesignSpec design;
  OmegaSpec omega;
  std::optional<MeasurementErrorSpec> me;
  Vector beta_null;
  std::optional<Vector> beta_alt;
  // Defaulted to the single-coefficient slope hypothesis when R is empty.
  LinearHypothesis hypothesis;
  double level = 0.05;
  int replications = 2000;
  std::uint64_t seed = 42;
  int workers = 1;
  // When > 1 the scenario is regenerated this many times with derived seeds
  // and MSE/bias aggregates average over designs (trend studies); rate
  // estimates always come from the first design.
  int design_redraws = 1;
};

struct EstimatorReport {
  Vector mse;                      // componentwise, at beta_null
  Vector mean_beta;
  double empirical_size = 0.0;     // fraction of null statistics > asymptotic cv
  double power = 0.0;              // alt statistics > asymptotic cv
  double size_corrected_cv = 0.0;  // type-7 (1-level) quantile of null statistics
  double size_corrected_power = 0.0;
  Matrix mean_vhat;                // mean robust covariance over replications
  Matrix mc_var;                   // sample covariance of the estimates
};

struct EfficiencyBlock {
  Vector variance_ratio;  // diag(mc_var pooled) ./ diag(mc_var averaged)
  std::string regime;     // flags the no-cluster-correlation regime
};

struct MeBiasBlock {
  Vector bias_pooled;        // mean(beta_P) - beta
  Vector bias_averaged;      // mean(beta_A) - beta
  Vector oracle_plim;        // plim of pooled OLS from the realized design
  Vector oracle_bias;        // oracle_plim - beta
  Vector mc_se_pooled;       // MC standard error of mean(beta_P)
  Vector mc_se_averaged;
};

struct CalibrationBlock {
  Matrix true_var_averaged;
  Matrix true_var_pooled;
  double rel_fro_mean_vhat_averaged = 0.0;  // ||mean Vhat - V|| / ||V||
  double rel_fro_mean_vhat_pooled = 0.0;
  double rel_fro_mc_var_averaged = 0.0;     // ||mc_var - V|| / ||V||
  double rel_fro_mc_var_pooled = 0.0;
};

struct McReport {
  std::string scenario;
  int g_clusters = 0;
  int replications = 0;
  std::uint64_t seed = 0;
  double asymptotic_cv = 0.0;
  double level = 0.05;
  int failed_replications = 0;
  double runtime_seconds = 0.0;
  EstimatorReport averaged;
  EstimatorReport pooled;
  std::optional<EfficiencyBlock> efficiency;
  std::optional<MeBiasBlock> me_bias;
  std::optional<CalibrationBlock> calibration;
};

// Size/power plus MSE and covariance aggregates in one pass.
McReport run_size_power(const McConfig& cfg);

// MSE-focused run (no alternative needed).
McReport run_mse(const McConfig& cfg);

// Monte Carlo variance ratio Var(beta_P)/Var(beta_A) per component.
McReport run_efficiency(const McConfig& cfg);

// Mean bias of both estimators against beta and against the pooled plim
// oracle; requires cfg.me.
McReport run_me_study(const McConfig& cfg);

// Mean Vhat and MC covariance against the known-Omega variance oracles.
McReport variance_calibration(const McConfig& cfg);

// Empirical quantile, linear interpolation of order statistics (type 7).
double quantile_type7(std::vector<double> values, double p);

}  // namespace clusterwise
