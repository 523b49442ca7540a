#pragma once

// Wald-type testing of H0: R beta = r with robust covariances, and coefficient
// tables with normal-reference p-values.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "clusterwise/distributions.hpp"
#include "clusterwise/errors.hpp"
#include "clusterwise/estimators.hpp"

namespace clusterwise {

struct LinearHypothesis {
  Matrix R;  // l x k, full row rank
  Vector r;  // l

  static LinearHypothesis single_coefficient(Index j, Index k, double value = 0.0) {
    LinearHypothesis h;
    h.R = Matrix::Zero(1, k);
    h.R(0, j) = 1.0;
    h.r = Vector::Constant(1, value);
    return h;
  }
};

struct WaldResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::map<double, bool> reject_at;
};

inline WaldResult wald_test(const FitResult& fit, const LinearHypothesis& hyp,
                            double level = 0.05) {
  const Index l = hyp.R.rows();
  const Index k = fit.beta_hat.size();
  if (hyp.R.cols() != k || hyp.r.size() != l)
    throw DimensionMismatch("hypothesis dimensions do not match the fit");
  if (l < 1 || l > k) throw RankDeficientR("hypothesis needs 1 <= l <= k rows");
  {
    Eigen::ColPivHouseholderQR<Matrix> qr(hyp.R.transpose());
    qr.setThreshold(1e-12);
    if (qr.rank() < l) throw RankDeficientR("restriction matrix R is row rank deficient");
  }

  const Vector diff = hyp.R * fit.beta_hat - hyp.r;
  const Matrix restricted = hyp.R * fit.cov_hat * hyp.R.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(restricted);
  const double lam_min = eig.eigenvalues().minCoeff();
  const double lam_max = eig.eigenvalues().maxCoeff();
  if (!(lam_min > 0.0) || lam_max / lam_min > 1e12)
    throw SingularRestrictedCov("R V R' is numerically singular (condition > 1e12)");

  WaldResult out;
  out.df = static_cast<int>(l);
  out.statistic = diff.dot(eig.eigenvectors() *
                           eig.eigenvalues().cwiseInverse().asDiagonal() *
                           eig.eigenvectors().transpose() * diff);
  if (out.statistic < 0.0) out.statistic = 0.0;
  out.p_value = 1.0 - chi2_cdf(out.statistic, out.df);
  for (const double alpha : {0.01, 0.05, 0.10, level})
    out.reject_at[alpha] = out.statistic > chi2_quantile(1.0 - alpha, out.df);
  return out;
}

struct CoefRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double t_value = 0.0;
  double p_value = 1.0;
};

// t = estimate/se with two-sided p from the standard normal reference
// (asymptotic normality of both estimators). se = 0 gives t = +-inf, p = 0.
inline std::vector<CoefRow> coef_table(const FitResult& fit,
                                       const std::vector<std::string>& names = {}) {
  std::vector<CoefRow> rows;
  rows.reserve(static_cast<std::size_t>(fit.beta_hat.size()));
  for (Index j = 0; j < fit.beta_hat.size(); ++j) {
    CoefRow row;
    row.name = j < static_cast<Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                    : "x" + std::to_string(j);
    row.estimate = fit.beta_hat(j);
    row.se = fit.se(j);
    if (row.se > 0.0) {
      row.t_value = row.estimate / row.se;
      row.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(row.t_value)));
    } else {
      row.t_value = row.estimate == 0.0
                        ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(), row.estimate);
      row.p_value = row.estimate == 0.0 ? 1.0 : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace clusterwise
