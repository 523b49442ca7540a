#pragma once

// Pooled OLS with the cluster-robust sandwich covariance and the
// cluster-averaging estimator with its heteroskedasticity-robust covariance,
// plus the known-Omega variance oracles and goodness-of-fit metrics.
//
// Both fits factor the design with a column-pivoted thin QR rather than
// normal equations; the Gram inverse for the sandwiches is recovered from the
// R factor.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "clusterwise/dataset.hpp"
#include "clusterwise/errors.hpp"

namespace clusterwise {

enum class EstimatorKind { Pooled, Averaged };

template <class Scalar>
struct FitResultT {
  VectorX<Scalar> beta_hat;
  MatrixX<Scalar> cov_hat;   // robust covariance estimate, k x k
  VectorX<Scalar> se;        // sqrt of cov_hat diagonal
  VectorX<Scalar> residuals; // per observation (pooled) or per cluster (averaged)
  EstimatorKind kind = EstimatorKind::Pooled;
  Index n_effective = 0;     // sum N_g for pooled, G for averaged
  Index df_model = 0;        // k
  bool has_intercept = false;
  Scalar ssr = 0;
};

using FitResult = FitResultT<double>;

struct FitOptions {
  // Opt-in small-sample factor for comparisons: G/(G-1)*(n-1)/(n-k) on the
  // pooled CRVE, G/(G-k) on the averaged covariance. Off by default; the
  // estimators themselves are uncorrected.
  bool df_correction = false;
  double rank_tolerance = 1e-10;  // relative to the leading R-factor pivot
};

namespace detail {

// Least-squares solve plus (X'X)^{-1} from the pivoted R factor.
template <class Scalar>
struct QrFit {
  VectorX<Scalar> beta;
  MatrixX<Scalar> gram_inv;
};

template <class Scalar>
QrFit<Scalar> qr_solve(const MatrixX<Scalar>& design, const VectorX<Scalar>& response,
                       double rank_tolerance) {
  const Index k = design.cols();
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(design);
  const MatrixX<Scalar> rfac = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Scalar lead = std::abs(rfac(0, 0));
  Index rank = 0;
  for (Index i = 0; i < k; ++i)
    if (std::abs(rfac(i, i)) > lead * static_cast<Scalar>(rank_tolerance)) ++rank;
  if (rank < k)
    throw RankDeficient("design has effective rank " + std::to_string(rank) + " < k=" +
                        std::to_string(k));
  QrFit<Scalar> out;
  out.beta = qr.solve(response);
  // X P = Q R  =>  (X'X)^{-1} = P R^{-1} R^{-T} P'
  const MatrixX<Scalar> rinv =
      rfac.template triangularView<Eigen::Upper>().solve(MatrixX<Scalar>::Identity(k, k));
  MatrixX<Scalar> inner = rinv * rinv.transpose();
  out.gram_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  return out;
}

template <class Scalar>
MatrixX<Scalar> sandwich(const MatrixX<Scalar>& bread, const MatrixX<Scalar>& meat) {
  MatrixX<Scalar> v = bread * meat * bread;
  return ((v + v.transpose()) / Scalar(2)).eval();
}

}  // namespace detail

template <class Scalar>
FitResultT<Scalar> fit_pooled(const ClusteredDatasetT<Scalar>& ds, const FitOptions& opts = {}) {
  const Index k = ds.k();
  const Index n = ds.total_obs();
  if (n < k) throw RankDeficient("fewer observations than regressors");
  const MatrixX<Scalar> X = stack_design(ds);
  const VectorX<Scalar> y = stack_response(ds);
  auto qr = detail::qr_solve<Scalar>(X, y, opts.rank_tolerance);

  FitResultT<Scalar> fit;
  fit.kind = EstimatorKind::Pooled;
  fit.beta_hat = qr.beta;
  fit.residuals = y - X * qr.beta;
  fit.n_effective = n;
  fit.df_model = k;
  fit.has_intercept = has_constant_column(ds);
  fit.ssr = fit.residuals.squaredNorm();

  // CRVE meat: sum over clusters of (X_g' u_g)(X_g' u_g)'.
  MatrixX<Scalar> meat = MatrixX<Scalar>::Zero(k, k);
  Index row = 0;
  for (const auto& b : ds.blocks) {
    const VectorX<Scalar> score = b.X.transpose() * fit.residuals.segment(row, b.size());
    meat.noalias() += score * score.transpose();
    row += b.size();
  }
  fit.cov_hat = detail::sandwich<Scalar>(qr.gram_inv, meat);
  if (opts.df_correction) {
    const auto g_count = static_cast<Scalar>(ds.n_clusters());
    if (ds.n_clusters() > 1 && n > k)
      fit.cov_hat *= g_count / (g_count - 1) * static_cast<Scalar>(n - 1) /
                     static_cast<Scalar>(n - k);
  }
  fit.se = fit.cov_hat.diagonal().cwiseMax(Scalar(0)).cwiseSqrt();
  return fit;
}

template <class Scalar>
FitResultT<Scalar> fit_averaged(const ClusteredDatasetT<Scalar>& ds, const FitOptions& opts = {}) {
  const Index k = ds.k();
  const Index g_count = ds.n_clusters();
  if (g_count < k)
    throw InsufficientClusters("averaged fit needs G >= k, got G=" + std::to_string(g_count) +
                               ", k=" + std::to_string(k));
  const AveragedDatasetT<Scalar> avg = cluster_average(ds);
  auto qr = detail::qr_solve<Scalar>(avg.Xbar, avg.Ybar, opts.rank_tolerance);

  FitResultT<Scalar> fit;
  fit.kind = EstimatorKind::Averaged;
  fit.beta_hat = qr.beta;
  fit.residuals = avg.Ybar - avg.Xbar * qr.beta;  // e_g, one per cluster
  fit.n_effective = g_count;
  fit.df_model = k;
  fit.has_intercept = has_constant_column(ds);
  fit.ssr = fit.residuals.squaredNorm();

  // Robust meat: sum over clusters of Xbar_g' Xbar_g e_g^2.
  MatrixX<Scalar> meat = MatrixX<Scalar>::Zero(k, k);
  for (Index g = 0; g < g_count; ++g) {
    const Scalar e2 = fit.residuals(g) * fit.residuals(g);
    meat.noalias() += e2 * avg.Xbar.row(g).transpose() * avg.Xbar.row(g);
  }
  fit.cov_hat = detail::sandwich<Scalar>(qr.gram_inv, meat);
  if (opts.df_correction && g_count > k)
    fit.cov_hat *= static_cast<Scalar>(g_count) / static_cast<Scalar>(g_count - k);
  fit.se = fit.cov_hat.diagonal().cwiseMax(Scalar(0)).cwiseSqrt();
  return fit;
}

// Var(beta_A) for known within-cluster covariances: the averaged-model
// sandwich with per-cluster weights 1'Omega_g 1 / N_g^2.
template <class Scalar>
MatrixX<Scalar> true_variance_averaged(const ClusteredDatasetT<Scalar>& ds,
                                       const std::vector<MatrixX<Scalar>>& omegas) {
  const Index g_count = ds.n_clusters();
  if (static_cast<Index>(omegas.size()) != g_count)
    throw DimensionMismatch("need one Omega per cluster");
  const AveragedDatasetT<Scalar> avg = cluster_average(ds);
  auto qr = detail::qr_solve<Scalar>(avg.Xbar, VectorX<Scalar>::Zero(g_count).eval(), 1e-10);
  MatrixX<Scalar> meat = MatrixX<Scalar>::Zero(ds.k(), ds.k());
  for (Index g = 0; g < g_count; ++g) {
    const auto& omega = omegas[static_cast<std::size_t>(g)];
    const Index n_g = ds.blocks[static_cast<std::size_t>(g)].size();
    if (omega.rows() != n_g || omega.cols() != n_g)
      throw DimensionMismatch("Omega_" + std::to_string(g) + " is not N_g x N_g");
    const Scalar weight = omega.sum() / static_cast<Scalar>(n_g * n_g);
    meat.noalias() += weight * avg.Xbar.row(g).transpose() * avg.Xbar.row(g);
  }
  return detail::sandwich<Scalar>(qr.gram_inv, meat);
}

// Var(beta_P) = (X'X)^{-1} X' Omega X (X'X)^{-1} with block-diagonal Omega.
template <class Scalar>
MatrixX<Scalar> true_variance_pooled(const ClusteredDatasetT<Scalar>& ds,
                                     const std::vector<MatrixX<Scalar>>& omegas) {
  if (static_cast<Index>(omegas.size()) != ds.n_clusters())
    throw DimensionMismatch("need one Omega per cluster");
  const MatrixX<Scalar> X = stack_design(ds);
  auto qr = detail::qr_solve<Scalar>(X, VectorX<Scalar>::Zero(X.rows()).eval(), 1e-10);
  MatrixX<Scalar> meat = MatrixX<Scalar>::Zero(ds.k(), ds.k());
  for (std::size_t g = 0; g < omegas.size(); ++g) {
    const auto& b = ds.blocks[g];
    if (omegas[g].rows() != b.size() || omegas[g].cols() != b.size())
      throw DimensionMismatch("Omega_" + std::to_string(g) + " is not N_g x N_g");
    meat.noalias() += b.X.transpose() * omegas[g] * b.X;
  }
  return detail::sandwich<Scalar>(qr.gram_inv, meat);
}

struct GofMetrics {
  double r2 = 0;
  double adj_r2 = 0;
  double pseudo_r2 = 0;  // squared sample correlation of fitted vs observed
  double aic = 0;
  double bic = 0;
  Index n_used = 0;
  bool perfect_fit = false;  // SSR == 0; aic/bic reported as NaN
};

template <class Scalar>
GofMetrics goodness_of_fit(const FitResultT<Scalar>& fit, const VectorX<Scalar>& y_used) {
  if (y_used.size() != fit.residuals.size())
    throw DimensionMismatch("y_used must match the design the fit was computed on");
  const auto n = static_cast<double>(fit.n_effective);
  const auto k = static_cast<double>(fit.df_model);
  const double ssr = static_cast<double>(fit.ssr);
  const VectorX<Scalar> fitted = y_used - fit.residuals;

  double sst;
  if (fit.has_intercept) {
    const Scalar mean = y_used.mean();
    sst = (y_used.array() - mean).matrix().squaredNorm();
  } else {
    sst = y_used.squaredNorm();
  }
  const double y_scale = static_cast<double>(y_used.squaredNorm());
  if (sst <= y_scale * 1e-28 || (sst == 0.0 && y_scale == 0.0))
    throw DegenerateVariance("response has no variation about the fit baseline");

  GofMetrics m;
  m.n_used = fit.n_effective;
  m.r2 = 1.0 - ssr / sst;
  m.adj_r2 = (n > k) ? 1.0 - (1.0 - m.r2) * (n - 1.0) / (n - k) : std::numeric_limits<double>::quiet_NaN();

  // Squared correlation convention; constant fitted values give 0.
  const Scalar fbar = fitted.mean();
  const Scalar ybar = y_used.mean();
  const double var_f = static_cast<double>((fitted.array() - fbar).matrix().squaredNorm());
  const double var_y = static_cast<double>((y_used.array() - ybar).matrix().squaredNorm());
  if (var_f <= 1e-28 * std::max(1.0, static_cast<double>(fitted.squaredNorm())) || var_y <= 0) {
    m.pseudo_r2 = 0.0;
  } else {
    const double cov = static_cast<double>(((fitted.array() - fbar) * (y_used.array() - ybar)).sum());
    m.pseudo_r2 = cov * cov / (var_f * var_y);
  }

  if (ssr <= y_scale * 1e-24) {  // zero up to accumulated rounding
    m.perfect_fit = true;
    m.aic = std::numeric_limits<double>::quiet_NaN();
    m.bic = std::numeric_limits<double>::quiet_NaN();
  } else {
    // Concentrated Gaussian log-likelihood; n is each model's own sample size
    // (sum N_g pooled, G averaged), so pooled and averaged values are not
    // directly comparable.
    m.aic = n * std::log(ssr / n) + 2.0 * k;
    m.bic = n * std::log(ssr / n) + k * std::log(n);
  }
  return m;
}

}  // namespace clusterwise
