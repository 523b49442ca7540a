// clusterwise: cluster-robust regression and Monte Carlo studies.
//
//   clusterwise fit --input data.csv --cluster-col g --y-col y --x-cols a,b
//   clusterwise mc --scenario table4:G25N500 --R 2000 --seed 7 --out results
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clusterwise/csv.hpp"
#include "clusterwise/estimators.hpp"
#include "clusterwise/inference.hpp"
#include "clusterwise/report_io.hpp"
#include "clusterwise/scenarios.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace clusterwise;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::uint64_t env_seed_or(std::uint64_t fallback) {
  if (const char* env = std::getenv("CLUSTERWISE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("CLUSTERWISE_SEED is not an integer");
    }
  }
  return fallback;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

struct FitArgs {
  std::string input;
  CsvSchema schema;
  FitOptions options;
  std::string out_dir = ".";
  std::vector<std::string> estimators{"pooled", "averaged"};
};

void apply_fit_config(FitArgs& args, const json& cfg) {
  reject_unknown_keys(cfg, {"input", "cluster_col", "y_col", "x_cols", "add_intercept",
                            "min_cluster_size", "drop_na", "df_correction", "estimators", "out"},
                      "fit config");
  if (cfg.contains("input")) args.input = cfg["input"].get<std::string>();
  if (cfg.contains("cluster_col")) args.schema.cluster_col = cfg["cluster_col"].get<std::string>();
  if (cfg.contains("y_col")) args.schema.y_col = cfg["y_col"].get<std::string>();
  if (cfg.contains("x_cols")) args.schema.x_cols = cfg["x_cols"].get<std::vector<std::string>>();
  if (cfg.contains("add_intercept")) args.schema.add_intercept = cfg["add_intercept"].get<bool>();
  if (cfg.contains("min_cluster_size"))
    args.schema.min_cluster_size = cfg["min_cluster_size"].get<int>();
  if (cfg.contains("drop_na")) args.schema.drop_na = cfg["drop_na"].get<bool>();
  if (cfg.contains("df_correction")) args.options.df_correction = cfg["df_correction"].get<bool>();
  if (cfg.contains("estimators"))
    args.estimators = cfg["estimators"].get<std::vector<std::string>>();
  if (cfg.contains("out")) args.out_dir = cfg["out"].get<std::string>();
}

int run_fit(const FitArgs& args) {
  if (args.input.empty()) throw ConfigError("fit needs --input");
  if (args.schema.cluster_col.empty() || args.schema.y_col.empty())
    throw ConfigError("fit needs --cluster-col and --y-col");

  json cfg_json{{"command", "fit"},
                {"input", args.input},
                {"cluster_col", args.schema.cluster_col},
                {"y_col", args.schema.y_col},
                {"x_cols", args.schema.x_cols},
                {"add_intercept", args.schema.add_intercept},
                {"min_cluster_size", args.schema.min_cluster_size},
                {"drop_na", args.schema.drop_na},
                {"df_correction", args.options.df_correction}};
  const std::string hash = config_hash_hex(cfg_json);

  CsvLoadInfo info;
  const ClusteredDataset ds = load_csv(args.input, args.schema, &info);

  const FitResult pooled = fit_pooled(ds, args.options);
  const FitResult averaged = fit_averaged(ds, args.options);
  const AveragedDataset avg = cluster_average(ds);

  std::vector<std::string> names;
  if (args.schema.add_intercept) names.push_back("intercept");
  names.insert(names.end(), args.schema.x_cols.begin(), args.schema.x_cols.end());

  const auto rows_pooled = coef_table(pooled, names);
  const auto rows_averaged = coef_table(averaged, names);
  const GofMetrics gof_pooled = goodness_of_fit(pooled, stack_response(ds));
  const GofMetrics gof_averaged = goodness_of_fit(averaged, avg.Ybar);

  fs::create_directories(args.out_dir);
  write_text_file((fs::path(args.out_dir) / "coefficients.csv").string(),
                  coef_table_csv(rows_pooled, rows_averaged, hash));
  write_text_file((fs::path(args.out_dir) / "gof.csv").string(),
                  gof_csv(gof_pooled, gof_averaged, hash));

  json out;
  out["meta"] = {{"config_hash", hash},
                 {"config", cfg_json},
                 {"rows_read", info.rows_read},
                 {"rows_dropped_na", info.rows_dropped_na},
                 {"clusters_dropped_small", info.clusters_dropped_small},
                 {"G", ds.n_clusters()},
                 {"n_obs", ds.total_obs()}};
  for (const auto& name : args.estimators) {
    if (name == "pooled") out["pooled"] = to_json(pooled);
    else if (name == "averaged") out["averaged"] = to_json(averaged);
    else throw ConfigError("unknown estimator '" + name + "'");
  }
  auto gof_json = [](const GofMetrics& m) {
    return json{{"r2", m.r2},
                {"adj_r2", m.adj_r2},
                {"pseudo_r2", m.pseudo_r2},
                {"aic", m.perfect_fit ? json(nullptr) : json(m.aic)},
                {"bic", m.perfect_fit ? json(nullptr) : json(m.bic)},
                {"n", m.n_used},
                {"perfect_fit", m.perfect_fit}};
  };
  out["gof"] = {{"pooled", gof_json(gof_pooled)}, {"averaged", gof_json(gof_averaged)}};
  write_text_file((fs::path(args.out_dir) / "fit.json").string(), out.dump(2) + "\n");

  std::cout << "wrote " << args.out_dir << "/coefficients.csv, gof.csv, fit.json (G="
            << ds.n_clusters() << ", n=" << ds.total_obs();
  if (info.clusters_dropped_small > 0)
    std::cout << ", dropped " << info.clusters_dropped_small << " clusters below size "
              << args.schema.min_cluster_size;
  if (info.rows_dropped_na > 0) std::cout << ", dropped " << info.rows_dropped_na << " NA rows";
  std::cout << ")\n";
  return 0;
}

struct McArgs {
  std::string scenario;
  std::optional<int> g_override, n1_override;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir = ".";
};

void apply_mc_config(McArgs& args, const json& cfg) {
  reject_unknown_keys(cfg, {"scenario", "G", "N1", "R", "seed", "workers", "out"}, "mc config");
  if (cfg.contains("scenario")) args.scenario = cfg["scenario"].get<std::string>();
  if (cfg.contains("G")) args.g_override = cfg["G"].get<int>();
  if (cfg.contains("N1")) args.n1_override = cfg["N1"].get<int>();
  if (cfg.contains("R")) args.replications = cfg["R"].get<int>();
  if (cfg.contains("seed")) args.seed = cfg["seed"].get<std::uint64_t>();
  if (cfg.contains("workers")) args.workers = cfg["workers"].get<int>();
  if (cfg.contains("out")) args.out_dir = cfg["out"].get<std::string>();
}

int run_mc(const McArgs& args) {
  if (args.scenario.empty()) throw ConfigError("mc needs --scenario or a config file");
  ScenarioEntry entry = resolve_scenario(args.scenario, args.g_override, args.n1_override);
  if (args.replications) entry.config.replications = *args.replications;
  entry.config.seed = args.seed ? *args.seed : env_seed_or(entry.config.seed);
  if (args.workers) entry.config.workers = *args.workers;

  const json cfg_json = to_json(entry.config);
  const std::string hash = config_hash_hex(cfg_json);
  const McReport report = run_study(entry);

  fs::create_directories(args.out_dir);
  json out = to_json(report, hash);
  out["meta"]["config"] = cfg_json;
  write_text_file((fs::path(args.out_dir) / "report.json").string(), out.dump(2) + "\n");
  write_text_file((fs::path(args.out_dir) / "report.csv").string(), mc_report_csv(report, hash));
  write_text_file((fs::path(args.out_dir) / "report_long.csv").string(),
                  mc_report_long_csv(report, hash));

  std::cout << "scenario " << report.scenario << ": size(avg)=" << report.averaged.empirical_size
            << " size(pols)=" << report.pooled.empirical_size << " R=" << report.replications
            << " -> " << args.out_dir << "/report.{json,csv}\n";
  return 0;
}

void list_scenarios() {
  std::cout << "name,study,G,N1,omega,R\n";
  for (const auto& e : scenario_catalog()) {
    const char* study = e.study == StudyKind::SizePower ? "size_power"
                        : e.study == StudyKind::Efficiency ? "efficiency"
                        : e.study == StudyKind::MeasurementError ? "measurement_error"
                                                                 : "calibration";
    const auto& d = e.config.design;
    std::cout << e.name << ',' << study << ',' << d.n_clusters << ','
              << (d.kind == DesignSpec::Kind::UnbalancedOneLarge ? std::to_string(d.large_size)
                                                                 : std::string("-"))
              << ',' << to_json(e.config)["omega"]["kind"].get<std::string>() << ','
              << e.config.replications << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-robust regression: pooled OLS with CRVE and the cluster-averaging "
               "estimator, plus Monte Carlo size/power studies"};
  app.require_subcommand(1);

  FitArgs fit_args;
  std::string fit_config_path;
  std::string x_cols_joined;
  auto* fit_cmd = app.add_subcommand("fit", "fit both estimators to a clustered CSV");
  fit_cmd->add_option("--input", fit_args.input, "input CSV path");
  fit_cmd->add_option("--cluster-col", fit_args.schema.cluster_col, "cluster id column");
  fit_cmd->add_option("--y-col", fit_args.schema.y_col, "response column");
  fit_cmd->add_option("--x-cols", x_cols_joined, "comma-separated regressor columns");
  auto* no_intercept = fit_cmd->add_flag("--no-intercept", "do not prepend a column of ones");
  fit_cmd->add_option("--min-cluster-size", fit_args.schema.min_cluster_size,
                      "drop clusters smaller than this");
  fit_cmd->add_flag("--drop-na", fit_args.schema.drop_na, "drop rows with missing values");
  fit_cmd->add_flag("--df-correction", fit_args.options.df_correction,
                    "apply small-sample covariance factors");
  fit_cmd->add_option("--out", fit_args.out_dir, "output directory");
  fit_cmd->add_option("--config", fit_config_path, "JSON config file (flags override it)");

  McArgs mc_args;
  std::string mc_config_path;
  bool do_list = false;
  int mc_r = -1, mc_workers = -1, mc_g = -1, mc_n1 = -1;
  std::int64_t mc_seed = -1;
  auto* mc_cmd = app.add_subcommand("mc", "run a Monte Carlo scenario");
  mc_cmd->add_option("--scenario", mc_args.scenario, "scenario or family name");
  mc_cmd->add_option("--config", mc_config_path, "JSON config file (flags override it)");
  mc_cmd->add_option("--R", mc_r, "replications");
  mc_cmd->add_option("--seed", mc_seed, "RNG seed (CLUSTERWISE_SEED is the fallback)");
  mc_cmd->add_option("--workers", mc_workers, "worker threads");
  mc_cmd->add_option("--G", mc_g, "override the number of clusters");
  mc_cmd->add_option("--N1", mc_n1, "override the large-cluster size");
  mc_cmd->add_option("--out", mc_args.out_dir, "output directory");
  mc_cmd->add_flag("--list-scenarios", do_list, "list the scenario catalog and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (fit_cmd->parsed()) {
      if (!fit_config_path.empty()) {
        std::ifstream in(fit_config_path);
        if (!in) throw ConfigError("cannot open config '" + fit_config_path + "'");
        json cfg = json::parse(in);
        reject_unknown_keys(cfg, {"fit"}, "config file");
        if (!cfg.contains("fit")) throw ConfigError("config file has no 'fit' section");
        apply_fit_config(fit_args, cfg["fit"]);
      }
      if (!x_cols_joined.empty()) {
        fit_args.schema.x_cols.clear();
        std::stringstream ss(x_cols_joined);
        std::string item;
        while (std::getline(ss, item, ',')) fit_args.schema.x_cols.push_back(item);
      }
      if (no_intercept->count() > 0) fit_args.schema.add_intercept = false;
      return run_fit(fit_args);
    }
    if (mc_cmd->parsed()) {
      if (do_list) {
        list_scenarios();
        return 0;
      }
      if (!mc_config_path.empty()) {
        std::ifstream in(mc_config_path);
        if (!in) throw ConfigError("cannot open config '" + mc_config_path + "'");
        json cfg = json::parse(in);
        reject_unknown_keys(cfg, {"mc"}, "config file");
        if (!cfg.contains("mc")) throw ConfigError("config file has no 'mc' section");
        apply_mc_config(mc_args, cfg["mc"]);
      }
      if (mc_r >= 0) mc_args.replications = mc_r;
      if (mc_seed >= 0) mc_args.seed = static_cast<std::uint64_t>(mc_seed);
      if (mc_workers >= 0) mc_args.workers = mc_workers;
      if (mc_g >= 0) mc_args.g_override = mc_g;
      if (mc_n1 >= 0) mc_args.n1_override = mc_n1;
      return run_mc(mc_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const MissingColumn& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const EmptyFile& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NonFiniteData& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DimensionMismatch& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
