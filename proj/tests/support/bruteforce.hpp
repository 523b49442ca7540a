#pragma once

// Independent high-precision reference implementations used only by tests.
// Everything here is computed in long double with naive summation and
// explicit cofactor inverses (k <= 3); no Eigen, no shared code with the
// library under test.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bruteforce {

using LD = long double;
using Mat = std::vector<std::vector<LD>>;  // row major
using Vec = std::vector<LD>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0L)); }

inline Mat transpose(const Mat& a) {
  Mat t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.size(), 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

inline LD det(const Mat& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (n == 3)
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  throw std::invalid_argument("det: only k <= 3");
}

// Cofactor (adjugate) inverse for k <= 3.
inline Mat inverse(const Mat& a) {
  const std::size_t n = a.size();
  const LD d = det(a);
  if (d == 0.0L) throw std::domain_error("singular matrix");
  Mat inv = zeros(n, n);
  if (n == 1) {
    inv[0][0] = 1.0L / d;
    return inv;
  }
  if (n == 2) {
    inv[0][0] = a[1][1] / d;
    inv[0][1] = -a[0][1] / d;
    inv[1][0] = -a[1][0] / d;
    inv[1][1] = a[0][0] / d;
    return inv;
  }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t r1 = (i + 1) % 3, r2 = (i + 2) % 3;
      const std::size_t c1 = (j + 1) % 3, c2 = (j + 2) % 3;
      // adj(A)_{ji} with the cyclic-index trick (no explicit signs needed)
      inv[j][i] = (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) / d;
    }
  return inv;
}

struct Block {
  Mat x;  // N_g x k
  Vec y;  // N_g
};

struct Fit {
  Vec beta;
  Mat cov;
};

// Pooled OLS with the cluster-robust sandwich, straight from the formulas.
inline Fit fit_pooled(const std::vector<Block>& blocks) {
  const std::size_t k = blocks[0].x[0].size();
  Mat xtx = zeros(k, k);
  Vec xty(k, 0.0L);
  for (const auto& b : blocks)
    for (std::size_t i = 0; i < b.y.size(); ++i)
      for (std::size_t p = 0; p < k; ++p) {
        xty[p] += b.x[i][p] * b.y[i];
        for (std::size_t q = 0; q < k; ++q) xtx[p][q] += b.x[i][p] * b.x[i][q];
      }
  const Mat bread = inverse(xtx);
  const Vec beta = matvec(bread, xty);
  Mat meat = zeros(k, k);
  for (const auto& b : blocks) {
    Vec score(k, 0.0L);
    for (std::size_t i = 0; i < b.y.size(); ++i) {
      LD u = b.y[i];
      for (std::size_t p = 0; p < k; ++p) u -= b.x[i][p] * beta[p];
      for (std::size_t p = 0; p < k; ++p) score[p] += b.x[i][p] * u;
    }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) meat[p][q] += score[p] * score[q];
  }
  return {beta, matmul(matmul(bread, meat), bread)};
}

// Cluster-averaging estimator with its robust covariance.
inline Fit fit_averaged(const std::vector<Block>& blocks) {
  const std::size_t k = blocks[0].x[0].size();
  const std::size_t g_count = blocks.size();
  Mat xbar = zeros(g_count, k);
  Vec ybar(g_count, 0.0L);
  for (std::size_t g = 0; g < g_count; ++g) {
    const auto n = blocks[g].y.size();
    for (std::size_t i = 0; i < n; ++i) {
      ybar[g] += blocks[g].y[i];
      for (std::size_t p = 0; p < k; ++p) xbar[g][p] += blocks[g].x[i][p];
    }
    ybar[g] /= static_cast<LD>(n);
    for (std::size_t p = 0; p < k; ++p) xbar[g][p] /= static_cast<LD>(n);
  }
  Mat xtx = zeros(k, k);
  Vec xty(k, 0.0L);
  for (std::size_t g = 0; g < g_count; ++g)
    for (std::size_t p = 0; p < k; ++p) {
      xty[p] += xbar[g][p] * ybar[g];
      for (std::size_t q = 0; q < k; ++q) xtx[p][q] += xbar[g][p] * xbar[g][q];
    }
  const Mat bread = inverse(xtx);
  const Vec beta = matvec(bread, xty);
  Mat meat = zeros(k, k);
  for (std::size_t g = 0; g < g_count; ++g) {
    LD e = ybar[g];
    for (std::size_t p = 0; p < k; ++p) e -= xbar[g][p] * beta[p];
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) meat[p][q] += xbar[g][p] * xbar[g][q] * e * e;
  }
  return {beta, matmul(matmul(bread, meat), bread)};
}

// Wald statistic for a single-coefficient hypothesis beta_j = r.
inline LD wald_single(const Fit& fit, std::size_t j, LD r) {
  const LD d = fit.beta[j] - r;
  return d * d / fit.cov[j][j];
}

}  // namespace bruteforce
