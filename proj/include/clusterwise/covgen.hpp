#pragma once

// Within-cluster covariance constructions for the three dependence classes,
// a power-iteration eigensolver for the top eigenpair, a diagnostic
// dependence classifier, and PSD-tolerant multivariate normal sampling.

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "clusterwise/dataset.hpp"
#include "clusterwise/errors.hpp"
#include "clusterwise/rng.hpp"

namespace clusterwise {

struct OmegaSpec {
  enum class Kind { RandomStrong, ScaledStrong, Equicorrelated, SemiStrongBlock, WeakAr1, Identity };

  Kind kind = Kind::Identity;
  double a = 0.0;        // Equicorrelated diagonal, 0 < b < a
  double b = 0.0;        // Equicorrelated off-diagonal
  double q = 0.5;        // SemiStrongBlock exponent, in (0,1)
  double rho = 0.0;      // WeakAr1 coefficient, |rho| < 1
  double variance = 1.0; // Identity scale

  static OmegaSpec random_strong() { return {Kind::RandomStrong}; }
  static OmegaSpec scaled_strong() { return {Kind::ScaledStrong}; }
  static OmegaSpec equicorrelated(double a, double b) {
    OmegaSpec s{Kind::Equicorrelated};
    s.a = a;
    s.b = b;
    return s;
  }
  static OmegaSpec semistrong(double q) {
    OmegaSpec s{Kind::SemiStrongBlock};
    s.q = q;
    return s;
  }
  static OmegaSpec weak_ar1(double rho) {
    OmegaSpec s{Kind::WeakAr1};
    s.rho = rho;
    return s;
  }
  static OmegaSpec identity(double variance = 1.0) {
    OmegaSpec s{Kind::Identity};
    s.variance = variance;
    return s;
  }
};

// Top eigenpair of a symmetric PSD matrix. Random start from the supplied
// stream; stops when the Rayleigh quotient settles and the residual
// ||Av - lambda v|| drops below tol_residual * lambda.
struct PowerIterationResult {
  double lambda = 0.0;
  Vector vector;
  int iterations = 0;
};

inline PowerIterationResult power_iteration(const Matrix& a, Rng& rng, double tol = 1e-10,
                                            int max_iterations = 10000) {
  const Index n = a.rows();
  if (n != a.cols()) throw DimensionMismatch("power_iteration needs a square matrix");
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  double lambda = 0.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    Vector av = a * v;
    const double next = v.dot(av);
    const double norm = av.norm();
    if (norm == 0.0) {  // zero matrix (or v in the null space of a PSD zero)
      lambda = 0.0;
      break;
    }
    av /= norm;
    const double residual = (a * av - next * av).norm();
    const bool settled = std::fabs(next - lambda) <= tol * std::max(std::fabs(next), 1e-300);
    lambda = next;
    v = std::move(av);
    if (settled && residual <= 1e-7 * std::max(std::fabs(lambda), 1e-300)) break;
  }
  // Sign convention: the entry of largest magnitude is positive.
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
  return {lambda, std::move(v), it};
}

inline Matrix omega_random_strong(Index n, Rng& rng) {
  if (n < 1) throw DomainError("omega_random_strong: N >= 1");
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = rng.uniform(-5.0, 10.0);
  return m * m.transpose();
}

// Gram construction rescaled so the top eigenvalue is exactly N.
inline Matrix omega_scaled(Index n, Rng& rng) {
  Matrix omega = omega_random_strong(n, rng);
  const double lmax = power_iteration(omega, rng).lambda;
  omega *= static_cast<double>(n) / lmax;
  return omega;
}

inline Matrix omega_equicorrelated(Index n, double a, double b) {
  if (!(0.0 < b && b < a)) throw DomainError("equicorrelated needs 0 < b < a");
  Matrix omega = Matrix::Constant(n, n, b);
  omega.diagonal().setConstant(a);
  return omega;
}

// Identity plus one equicorrelated sub-block of size ceil(N^q) with
// correlation 0.9, so lambda_max = Theta(N^q).
inline Matrix omega_semistrong(Index n, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("semistrong exponent q must be in (0,1)");
  Matrix omega = Matrix::Identity(n, n);
  const Index block = std::min<Index>(n, static_cast<Index>(std::ceil(std::pow(double(n), q))));
  omega.topLeftCorner(block, block).setConstant(0.9);
  omega.topLeftCorner(block, block).diagonal().setConstant(1.0);
  return omega;
}

inline Matrix omega_weak_ar1(Index n, double rho) {
  if (!(std::fabs(rho) < 1.0)) throw DomainError("AR(1) needs |rho| < 1");
  Matrix omega(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) omega(i, j) = std::pow(rho, std::fabs(double(i - j)));
  return omega;
}

inline Matrix make_omega(const OmegaSpec& spec, Index n, Rng& rng) {
  switch (spec.kind) {
    case OmegaSpec::Kind::RandomStrong: return omega_random_strong(n, rng);
    case OmegaSpec::Kind::ScaledStrong: return omega_scaled(n, rng);
    case OmegaSpec::Kind::Equicorrelated: return omega_equicorrelated(n, spec.a, spec.b);
    case OmegaSpec::Kind::SemiStrongBlock: return omega_semistrong(n, spec.q);
    case OmegaSpec::Kind::WeakAr1: return omega_weak_ar1(n, spec.rho);
    case OmegaSpec::Kind::Identity: return spec.variance * Matrix::Identity(n, n);
  }
  throw DomainError("unknown OmegaSpec kind");
}

enum class DependenceLabel { Strong, SemiStrong, Weak };

struct DependenceClass {
  DependenceLabel label = DependenceLabel::Weak;
  double lambda_max = 0.0;
};

inline const char* to_string(DependenceLabel label) {
  switch (label) {
    case DependenceLabel::Strong: return "strong";
    case DependenceLabel::SemiStrong: return "semi-strong";
    case DependenceLabel::Weak: return "weak";
  }
  return "?";
}

// Diagnostic single-matrix heuristic (class membership is an order condition,
// not observable from one matrix). With d = mean diagonal and s = lambda/d:
// strong when s >= 0.2 N, weak when s <= max(3, 0.8 sqrt(N)), else
// semi-strong. Never used by the estimators.
inline DependenceClass classify_dependence(const Matrix& omega, Index n, Rng& rng) {
  DependenceClass out;
  out.lambda_max = power_iteration(omega, rng).lambda;
  const double d = std::max(omega.diagonal().mean(), 1e-300);
  const double s = out.lambda_max / d;
  if (s >= 0.2 * static_cast<double>(n)) out.label = DependenceLabel::Strong;
  else if (s <= std::max(3.0, 0.8 * std::sqrt(static_cast<double>(n)))) out.label = DependenceLabel::Weak;
  else out.label = DependenceLabel::SemiStrong;
  return out;
}

// Square-root factor of a PSD matrix via the pivoted LDL' decomposition,
// clamping trailing pivots in [-1e-8*||Omega||, 0] so rank-deficient
// covariances sample cleanly. Pivots below the clamp window raise NotPsd.
class MvnFactor {
 public:
  static MvnFactor from_covariance(const Matrix& omega) {
    if (omega.rows() != omega.cols()) throw DimensionMismatch("covariance must be square");
    Eigen::LDLT<Matrix> ldlt(omega);
    const double scale = omega.rows() == 0 ? 0.0 : omega.diagonal().cwiseAbs().maxCoeff();
    Vector d = ldlt.vectorD();
    for (Index i = 0; i < d.size(); ++i) {
      if (d(i) < -1e-8 * std::max(scale, 1e-300))
        throw NotPsd("covariance has pivot " + std::to_string(d(i)) + " below the PSD tolerance");
      if (d(i) < 0.0) d(i) = 0.0;
    }
    MvnFactor f;
    f.root_ = ldlt.transpositionsP().transpose() *
              (Matrix(ldlt.matrixL()) * d.cwiseSqrt().asDiagonal());
    return f;
  }

  // mean + L z with z iid standard normal, drawn in index order.
  Vector sample(const Vector& mean, Rng& rng) const {
    if (mean.size() != root_.rows()) throw DimensionMismatch("mean length mismatch");
    Vector z(root_.cols());
    for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return mean + root_ * z;
  }

  // L z alone; used by the replication engine.
  Vector sample_zero_mean(Rng& rng) const {
    Vector z(root_.cols());
    for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return root_ * z;
  }

  const Matrix& root() const { return root_; }

 private:
  Matrix root_;
};

inline Vector sample_mvn(const Vector& mean, const Matrix& omega, Rng& rng) {
  return MvnFactor::from_covariance(omega).sample(mean, rng);
}

// Dense row-major dump for debugging.
inline void dump_matrix_csv(const Matrix& m, std::ostream& out) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace clusterwise
