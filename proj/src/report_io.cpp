#include "clusterwise/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clusterwise/errors.hpp"

namespace clusterwise {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Matrix matrix_from_json(const json& rows) {
  const auto r = static_cast<Index>(rows.size());
  const auto c = r == 0 ? 0 : static_cast<Index>(rows[0].size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  return m;
}

json estimator_json(const EstimatorReport& e) {
  return json{{"mse", vector_json(e.mse)},
              {"mean_beta", vector_json(e.mean_beta)},
              {"empirical_size", e.empirical_size},
              {"power", e.power},
              {"size_corrected_cv", e.size_corrected_cv},
              {"size_corrected_power", e.size_corrected_power},
              {"mean_vhat", matrix_json(e.mean_vhat)},
              {"mc_var", matrix_json(e.mc_var)}};
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string config_hash_hex(const json& config) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(config.dump())));
  return buf;
}

json to_json(const McConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario_name;
  j["design"] = {{"kind", cfg.design.kind == DesignSpec::Kind::Balanced ? "balanced" : "unbalanced_one_large"},
                 {"G", cfg.design.n_clusters},
                 {"size_lo", cfg.design.size_lo},
                 {"size_hi", cfg.design.size_hi},
                 {"N1", cfg.design.large_size},
                 {"small_lo", cfg.design.small_lo},
                 {"small_hi", cfg.design.small_hi},
                 {"n_regressors", cfg.design.n_regressors},
                 {"mu_lo", cfg.design.mu_lo},
                 {"mu_hi", cfg.design.mu_hi},
                 {"w2_lo", cfg.design.w2_lo},
                 {"w2_hi", cfg.design.w2_hi}};
  auto omega_json = [](const OmegaSpec& o) {
    const char* kind = "identity";
    switch (o.kind) {
      case OmegaSpec::Kind::RandomStrong: kind = "random_strong"; break;
      case OmegaSpec::Kind::ScaledStrong: kind = "scaled_strong"; break;
      case OmegaSpec::Kind::Equicorrelated: kind = "equicorrelated"; break;
      case OmegaSpec::Kind::SemiStrongBlock: kind = "semistrong_block"; break;
      case OmegaSpec::Kind::WeakAr1: kind = "weak_ar1"; break;
      case OmegaSpec::Kind::Identity: kind = "identity"; break;
    }
    return json{{"kind", kind}, {"a", o.a},     {"b", o.b},
                {"q", o.q},     {"rho", o.rho}, {"variance", o.variance}};
  };
  j["omega"] = omega_json(cfg.omega);
  if (cfg.me) {
    json lambdas = json::array();
    for (const auto& l : cfg.me->lambda) lambdas.push_back(omega_json(l));
    j["measurement_error"] = lambdas;
  }
  j["beta_null"] = vector_json(cfg.beta_null);
  if (cfg.beta_alt) j["beta_alt"] = vector_json(*cfg.beta_alt);
  j["level"] = cfg.level;
  j["R"] = cfg.replications;
  j["seed"] = cfg.seed;
  j["design_redraws"] = cfg.design_redraws;
  return j;
}

json to_json(const McReport& r, const std::string& config_hash) {
  json j;
  j["meta"] = {{"config_hash", config_hash},
               {"seed", r.seed},
               {"scenario", r.scenario},
               {"G", r.g_clusters},
               {"R", r.replications},
               {"level", r.level},
               {"asymptotic_cv", r.asymptotic_cv},
               {"failed_replications", r.failed_replications}};
  j["averaged"] = estimator_json(r.averaged);
  j["pooled"] = estimator_json(r.pooled);
  if (r.efficiency)
    j["efficiency"] = {{"variance_ratio", vector_json(r.efficiency->variance_ratio)},
                       {"regime", r.efficiency->regime}};
  if (r.me_bias)
    j["me_bias"] = {{"bias_pooled", vector_json(r.me_bias->bias_pooled)},
                    {"bias_averaged", vector_json(r.me_bias->bias_averaged)},
                    {"oracle_plim", vector_json(r.me_bias->oracle_plim)},
                    {"oracle_bias", vector_json(r.me_bias->oracle_bias)},
                    {"mc_se_pooled", vector_json(r.me_bias->mc_se_pooled)},
                    {"mc_se_averaged", vector_json(r.me_bias->mc_se_averaged)}};
  if (r.calibration)
    j["calibration"] = {{"true_var_averaged", matrix_json(r.calibration->true_var_averaged)},
                        {"true_var_pooled", matrix_json(r.calibration->true_var_pooled)},
                        {"rel_fro_mean_vhat_averaged", r.calibration->rel_fro_mean_vhat_averaged},
                        {"rel_fro_mean_vhat_pooled", r.calibration->rel_fro_mean_vhat_pooled},
                        {"rel_fro_mc_var_averaged", r.calibration->rel_fro_mc_var_averaged},
                        {"rel_fro_mc_var_pooled", r.calibration->rel_fro_mc_var_pooled}};
  return j;
}

json to_json(const FitResult& fit) {
  return json{{"estimator", fit.kind == EstimatorKind::Pooled ? "pooled" : "averaged"},
              {"beta_hat", vector_json(fit.beta_hat)},
              {"cov_hat", matrix_json(fit.cov_hat)},
              {"se", vector_json(fit.se)},
              {"residuals", vector_json(fit.residuals)},
              {"n_effective", fit.n_effective},
              {"df_model", fit.df_model},
              {"has_intercept", fit.has_intercept},
              {"ssr", fit.ssr}};
}

FitResult fit_from_json(const json& j) {
  FitResult fit;
  fit.kind = j.at("estimator").get<std::string>() == "pooled" ? EstimatorKind::Pooled
                                                              : EstimatorKind::Averaged;
  fit.beta_hat = vector_from_json(j.at("beta_hat"));
  fit.cov_hat = matrix_from_json(j.at("cov_hat"));
  fit.se = vector_from_json(j.at("se"));
  fit.residuals = vector_from_json(j.at("residuals"));
  fit.n_effective = j.at("n_effective").get<Index>();
  fit.df_model = j.at("df_model").get<Index>();
  fit.has_intercept = j.at("has_intercept").get<bool>();
  fit.ssr = j.at("ssr").get<double>();
  return fit;
}

std::string mc_report_csv(const McReport& r, const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << " seed=" << r.seed << "\n";
  out << "scenario,estimator,G,R,MSE_intercept,MSE_slope,size,cv,power,sc_cv,sc_power\n";
  auto row = [&](const char* name, const EstimatorReport& e) {
    out << r.scenario << ',' << name << ',' << r.g_clusters << ',' << r.replications;
    out << ',' << fmt(e.mse(0)) << ',' << fmt(e.mse.size() > 1 ? e.mse(1) : 0.0);
    out << ',' << fmt(e.empirical_size) << ',' << fmt(r.asymptotic_cv) << ',' << fmt(e.power)
        << ',' << fmt(e.size_corrected_cv) << ',' << fmt(e.size_corrected_power) << '\n';
  };
  row("averaged", r.averaged);
  row("pooled", r.pooled);
  return out.str();
}

std::string mc_report_long_csv(const McReport& r, const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << " seed=" << r.seed << "\n";
  out << "scenario,G,estimator,metric,value\n";
  auto rows = [&](const char* name, const EstimatorReport& e) {
    auto put = [&](const char* metric, double v) {
      out << r.scenario << ',' << r.g_clusters << ',' << name << ',' << metric << ',' << fmt(v)
          << '\n';
    };
    put("mse_intercept", e.mse(0));
    if (e.mse.size() > 1) put("mse_slope", e.mse(1));
    put("size", e.empirical_size);
    put("power", e.power);
    put("size_corrected_cv", e.size_corrected_cv);
    put("size_corrected_power", e.size_corrected_power);
  };
  rows("averaged", r.averaged);
  rows("pooled", r.pooled);
  if (r.efficiency)
    for (Index i = 0; i < r.efficiency->variance_ratio.size(); ++i)
      out << r.scenario << ',' << r.g_clusters << ",ratio,variance_ratio_" << i << ','
          << fmt(r.efficiency->variance_ratio(i)) << '\n';
  return out.str();
}

std::string coef_table_csv(const std::vector<CoefRow>& pooled, const std::vector<CoefRow>& averaged,
                           const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "predictor,estimate_pols,estimate_avg,se_pols,se_avg,t_pols,t_avg,p_pols,p_avg\n";
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const auto& p = pooled[i];
    const auto& a = averaged[i];
    out << p.name << ',' << fmt(p.estimate) << ',' << fmt(a.estimate) << ',' << fmt(p.se) << ','
        << fmt(a.se) << ',' << fmt(p.t_value) << ',' << fmt(a.t_value) << ',' << fmt(p.p_value)
        << ',' << fmt(a.p_value) << '\n';
  }
  return out.str();
}

std::string gof_csv(const GofMetrics& pooled, const GofMetrics& averaged,
                    const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "estimator,r2,adj_r2,pseudo_r2,aic,bic,n,perfect_fit\n";
  auto row = [&](const char* name, const GofMetrics& m) {
    out << name << ',' << fmt(m.r2) << ',' << fmt(m.adj_r2) << ',' << fmt(m.pseudo_r2) << ','
        << fmt(m.aic) << ',' << fmt(m.bic) << ',' << m.n_used << ',' << (m.perfect_fit ? 1 : 0)
        << '\n';
  };
  row("pooled", pooled);
  row("averaged", averaged);
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace clusterwise
