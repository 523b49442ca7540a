#include "clusterwise/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "clusterwise/distributions.hpp"

namespace clusterwise {

namespace {

// Stream id reserved for scenario construction; replications use 0..R-1.
constexpr std::uint64_t kDesignStream = 0x8000000000000000ULL;

struct RepSlot {
  Vector beta_a, beta_p;
  Matrix vhat_a, vhat_p;
  double t_null_a = 0.0, t_null_p = 0.0;
  double t_alt_a = 0.0, t_alt_p = 0.0;
  bool has_alt = false;
  bool failed = false;
};

struct Scenario {
  Design design;
  LinearHypothesis hypothesis;
  Vector beta_null;
  std::optional<Vector> beta_alt;
  std::optional<MeasurementErrorSpec> me;
};

Scenario build_scenario(const McConfig& cfg, std::uint64_t seed) {
  Scenario s;
  Rng rng = Rng::stream(seed, kDesignStream);
  s.design = gen_design(cfg.design, cfg.omega, rng);
  if (cfg.me) {
    s.me = cfg.me;
    attach_measurement_error(s.design, *cfg.me, rng);
  }
  s.beta_null = cfg.beta_null;
  s.beta_alt = cfg.beta_alt;
  s.hypothesis = cfg.hypothesis;
  if (s.hypothesis.R.size() == 0)
    s.hypothesis = LinearHypothesis::single_coefficient(1, s.design.k, cfg.beta_null(1));
  return s;
}

// One replication: draw eps (and Gamma when configured), fit both estimators
// at the null response, evaluate the Wald statistics; the alternative reuses
// the same eps draw (Y_alt = X beta_alt + eps), so per replication the rng is
// consumed by eps first, then Gamma.
void run_replication(const Scenario& s, std::uint64_t seed, int z, RepSlot& slot) {
  const Design& d = s.design;
  Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(z));
  try {
    std::vector<Vector> eps;
    eps.reserve(static_cast<std::size_t>(d.n_clusters()));
    for (Index g = 0; g < d.n_clusters(); ++g)
      eps.push_back(d.factor[static_cast<std::size_t>(g)].sample_zero_mean(rng));
    std::vector<Matrix> x_obs;
    if (s.me) x_obs = draw_contaminated_x(d, rng);

    std::vector<ClusterBlock> blocks;
    blocks.reserve(static_cast<std::size_t>(d.n_clusters()));
    for (Index g = 0; g < d.n_clusters(); ++g) {
      const auto gi = static_cast<std::size_t>(g);
      ClusterBlock b;
      b.cluster_id = "g" + std::to_string(g + 1);
      b.X = s.me ? x_obs[gi] : d.x[gi];
      b.Y = d.x[gi] * s.beta_null + eps[gi];
      blocks.push_back(std::move(b));
    }
    ClusteredDataset ds{std::move(blocks)};

    FitResult fit_a = fit_averaged(ds);
    FitResult fit_p = fit_pooled(ds);
    slot.beta_a = fit_a.beta_hat;
    slot.beta_p = fit_p.beta_hat;
    slot.vhat_a = fit_a.cov_hat;
    slot.vhat_p = fit_p.cov_hat;
    slot.t_null_a = wald_test(fit_a, s.hypothesis).statistic;
    slot.t_null_p = wald_test(fit_p, s.hypothesis).statistic;

    if (s.beta_alt) {
      const Vector shift = *s.beta_alt - s.beta_null;
      for (Index g = 0; g < d.n_clusters(); ++g)
        ds.blocks[static_cast<std::size_t>(g)].Y += d.x[static_cast<std::size_t>(g)] * shift;
      FitResult alt_a = fit_averaged(ds);
      FitResult alt_p = fit_pooled(ds);
      slot.t_alt_a = wald_test(alt_a, s.hypothesis).statistic;
      slot.t_alt_p = wald_test(alt_p, s.hypothesis).statistic;
      slot.has_alt = true;
    }
  } catch (const Error&) {
    slot.failed = true;
  }
}

class KahanAccumulator {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double sum() const { return sum_; }

 private:
  double sum_ = 0.0, carry_ = 0.0;
};

EstimatorReport summarize(const std::vector<RepSlot>& slots, bool averaged, const Vector& beta_null,
                          double level, double asymptotic_cv, int k) {
  EstimatorReport rep;
  rep.mse = Vector::Zero(k);
  rep.mean_beta = Vector::Zero(k);
  rep.mean_vhat = Matrix::Zero(k, k);
  rep.mc_var = Matrix::Zero(k, k);

  std::vector<const RepSlot*> ok;
  ok.reserve(slots.size());
  for (const auto& s : slots)
    if (!s.failed) ok.push_back(&s);
  const auto n = static_cast<double>(ok.size());
  if (ok.empty()) return rep;

  auto beta_of = [&](const RepSlot& s) -> const Vector& { return averaged ? s.beta_a : s.beta_p; };
  auto vhat_of = [&](const RepSlot& s) -> const Matrix& { return averaged ? s.vhat_a : s.vhat_p; };

  for (Index i = 0; i < k; ++i) {
    KahanAccumulator mean, mse;
    for (const auto* s : ok) {
      mean.add(beta_of(*s)(i));
      const double d = beta_of(*s)(i) - beta_null(i);
      mse.add(d * d);
    }
    rep.mean_beta(i) = mean.sum() / n;
    rep.mse(i) = mse.sum() / n;
  }
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) {
      KahanAccumulator vsum, csum;
      for (const auto* s : ok) {
        vsum.add(vhat_of(*s)(i, j));
        csum.add((beta_of(*s)(i) - rep.mean_beta(i)) * (beta_of(*s)(j) - rep.mean_beta(j)));
      }
      rep.mean_vhat(i, j) = vsum.sum() / n;
      rep.mc_var(i, j) = csum.sum() / n;
    }

  std::vector<double> t_null;
  t_null.reserve(ok.size());
  int rejected = 0;
  for (const auto* s : ok) {
    const double t = averaged ? s->t_null_a : s->t_null_p;
    t_null.push_back(t);
    if (t > asymptotic_cv) ++rejected;
  }
  rep.empirical_size = rejected / n;
  rep.size_corrected_cv = quantile_type7(t_null, 1.0 - level);

  if (ok.front()->has_alt) {
    int rej_asym = 0, rej_corrected = 0;
    for (const auto* s : ok) {
      const double t = averaged ? s->t_alt_a : s->t_alt_p;
      if (t > asymptotic_cv) ++rej_asym;
      if (t > rep.size_corrected_cv) ++rej_corrected;
    }
    rep.power = rej_asym / n;
    rep.size_corrected_power = rej_corrected / n;
  }
  return rep;
}

McReport run_core(const McConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.replications < 1) throw DomainError("replications must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw DomainError("level must be in (0,1)");

  McReport report;
  report.scenario = cfg.scenario_name;
  report.g_clusters = cfg.design.n_clusters;
  report.replications = cfg.replications * std::max(1, cfg.design_redraws);
  report.seed = cfg.seed;
  report.level = cfg.level;

  const int redraws = std::max(1, cfg.design_redraws);
  std::vector<RepSlot> all_slots;
  all_slots.reserve(static_cast<std::size_t>(cfg.replications) * redraws);
  std::optional<Scenario> first_scenario;

  for (int dr = 0; dr < redraws; ++dr) {
    // Design redraw `dr` derives its seed so a single-design run (dr = 0)
    // matches cfg.seed exactly.
    const std::uint64_t seed = dr == 0 ? cfg.seed : cfg.seed + 0x51ED270BULL * static_cast<std::uint64_t>(dr);
    Scenario scenario = build_scenario(cfg, seed);

    std::vector<RepSlot> slots(static_cast<std::size_t>(cfg.replications));
    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
      for (int z = 0; z < cfg.replications; ++z)
        run_replication(scenario, seed, z, slots[static_cast<std::size_t>(z)]);
    } else {
      std::vector<std::thread> pool;
      const int chunk = (cfg.replications + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(cfg.replications, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
          for (int z = lo; z < hi; ++z)
            run_replication(scenario, seed, z, slots[static_cast<std::size_t>(z)]);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (auto& s : slots) all_slots.push_back(std::move(s));
    if (dr == 0) first_scenario = std::move(scenario);
  }

  for (const auto& s : all_slots)
    if (s.failed) ++report.failed_replications;
  if (report.failed_replications * 1000 > report.replications)
    throw Error("scenario aborted: " + std::to_string(report.failed_replications) +
                " of " + std::to_string(report.replications) +
                " replications failed (limit 0.1%)");

  const int df = static_cast<int>(first_scenario->hypothesis.R.rows());
  report.asymptotic_cv = chi2_quantile(1.0 - cfg.level, df);
  const int k = first_scenario->design.k;
  report.averaged = summarize(all_slots, true, cfg.beta_null, cfg.level, report.asymptotic_cv, k);
  report.pooled = summarize(all_slots, false, cfg.beta_null, cfg.level, report.asymptotic_cv, k);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

ClusteredDataset design_dataset(const Design& d, const Vector& beta) {
  std::vector<ClusterBlock> blocks;
  for (Index g = 0; g < d.n_clusters(); ++g) {
    ClusterBlock b;
    b.cluster_id = "g" + std::to_string(g + 1);
    b.X = d.x[static_cast<std::size_t>(g)];
    b.Y = b.X * beta;
    blocks.push_back(std::move(b));
  }
  return ClusteredDataset{std::move(blocks)};
}

}  // namespace

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  if (n == 1) return values[0];
  const double h = (static_cast<double>(n) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, n - 1);
  const double w = h - std::floor(h);
  return values[lo] + w * (values[hi] - values[lo]);
}

McReport run_size_power(const McConfig& cfg) { return run_core(cfg); }

McReport run_mse(const McConfig& cfg) {
  McConfig c = cfg;
  c.beta_alt.reset();
  return run_core(c);
}

McReport run_efficiency(const McConfig& cfg) {
  McConfig c = cfg;
  c.beta_alt.reset();
  McReport report = run_core(c);
  EfficiencyBlock block;
  block.variance_ratio =
      report.pooled.mc_var.diagonal().cwiseQuotient(report.averaged.mc_var.diagonal());
  const bool clustered = (cfg.omega.kind == OmegaSpec::Kind::Equicorrelated && cfg.omega.b > 0.0) ||
                         cfg.omega.kind == OmegaSpec::Kind::RandomStrong ||
                         cfg.omega.kind == OmegaSpec::Kind::ScaledStrong;
  block.regime = clustered ? "clustered"
                           : "no-cluster-correlation (averaging may be less efficient)";
  report.efficiency = std::move(block);
  return report;
}

McReport run_me_study(const McConfig& cfg) {
  if (!cfg.me) throw DomainError("run_me_study needs a MeasurementErrorSpec");
  McConfig c = cfg;
  c.beta_alt.reset();
  McReport report = run_core(c);

  // Oracle from the realized fixed design (finite-sample analogues of the
  // population limits).
  Rng rng = Rng::stream(cfg.seed, kDesignStream);
  Design d = gen_design(cfg.design, cfg.omega, rng);
  attach_measurement_error(d, *cfg.me, rng);

  MeBiasBlock block;
  block.bias_pooled = report.pooled.mean_beta - cfg.beta_null;
  block.bias_averaged = report.averaged.mean_beta - cfg.beta_null;
  block.oracle_plim = plim_pols_me_oracle(realized_qstar0(d), me_c0(d, *cfg.me), cfg.beta_null);
  block.oracle_bias = block.oracle_plim - cfg.beta_null;
  const auto r_ok = static_cast<double>(report.replications - report.failed_replications);
  block.mc_se_pooled = (report.pooled.mc_var.diagonal() / r_ok).cwiseSqrt();
  block.mc_se_averaged = (report.averaged.mc_var.diagonal() / r_ok).cwiseSqrt();
  report.me_bias = std::move(block);
  return report;
}

McReport variance_calibration(const McConfig& cfg) {
  McConfig c = cfg;
  c.beta_alt.reset();
  McReport report = run_core(c);

  Rng rng = Rng::stream(cfg.seed, kDesignStream);
  const Design d = gen_design(cfg.design, cfg.omega, rng);
  const ClusteredDataset ds = design_dataset(d, cfg.beta_null);
  CalibrationBlock block;
  block.true_var_averaged = true_variance_averaged(ds, d.omega);
  block.true_var_pooled = true_variance_pooled(ds, d.omega);
  const double fa = block.true_var_averaged.norm();
  const double fp = block.true_var_pooled.norm();
  block.rel_fro_mean_vhat_averaged = (report.averaged.mean_vhat - block.true_var_averaged).norm() / fa;
  block.rel_fro_mean_vhat_pooled = (report.pooled.mean_vhat - block.true_var_pooled).norm() / fp;
  block.rel_fro_mc_var_averaged = (report.averaged.mc_var - block.true_var_averaged).norm() / fa;
  block.rel_fro_mc_var_pooled = (report.pooled.mc_var - block.true_var_pooled).norm() / fp;
  report.calibration = std::move(block);
  return report;
}

}  // namespace clusterwise
