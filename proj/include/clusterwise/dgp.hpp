#pragma once

// Simulation designs: nearly balanced clusters, unbalanced with one dominating
// cluster, optional classical measurement error on the regressors, plus the
// pooled-OLS attenuation (plim) oracle.
//
// A Design is generated once per scenario and stays fixed: replications redraw
// only the errors (and measurement noise when enabled). All draw orders are
// fixed; identical (seed, spec) gives bit-identical designs.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clusterwise/covgen.hpp"
#include "clusterwise/dataset.hpp"
#include "clusterwise/errors.hpp"
#include "clusterwise/rng.hpp"

namespace clusterwise {

struct DesignSpec {
  enum class Kind { Balanced, UnbalancedOneLarge };

  Kind kind = Kind::Balanced;
  int n_clusters = 100;
  int size_lo = 25, size_hi = 50;      // balanced sizes (paper default)
  int large_size = 500;                // N_1 for the unbalanced design
  int small_lo = 4, small_hi = 10;     // sizes of clusters 2..G (paper default)
  int n_regressors = 1;                // slope columns; k = 1 + n_regressors
  double mu_lo = 10.0, mu_hi = 100.0;  // cluster mean range for slope columns
  double w2_lo = 200.0, w2_hi = 300.0; // cluster variance range

  static DesignSpec balanced(int g, int lo = 25, int hi = 50) {
    DesignSpec s;
    s.kind = Kind::Balanced;
    s.n_clusters = g;
    s.size_lo = lo;
    s.size_hi = hi;
    return s;
  }
  static DesignSpec unbalanced_one_large(int g, int n1, int small_lo = 4, int small_hi = 10) {
    DesignSpec s;
    s.kind = Kind::UnbalancedOneLarge;
    s.n_clusters = g;
    s.large_size = n1;
    s.small_lo = small_lo;
    s.small_hi = small_hi;
    return s;
  }

  int k() const { return 1 + n_regressors; }
};

// Per-regressor measurement-error covariances Lambda_{g,j}; the intercept
// column never receives error.
struct MeasurementErrorSpec {
  std::vector<OmegaSpec> lambda;  // one per slope column
};

struct Design {
  std::vector<Matrix> x;          // per-cluster true designs X*_g
  std::vector<Matrix> omega;      // per-cluster error covariances
  std::vector<MvnFactor> factor;  // square roots of omega
  std::vector<std::vector<MvnFactor>> me_factor;  // [cluster][slope column]
  Eigen::VectorXi sizes;
  int k = 0;

  Index n_clusters() const { return sizes.size(); }
  Index total_obs() const { return sizes.sum(); }
};

namespace detail {

inline Matrix balanced_x(Index n, const DesignSpec& spec, Rng& rng) {
  Matrix x(n, spec.k());
  x.col(0).setOnes();
  for (int j = 0; j < spec.n_regressors; ++j) {
    const double mu = rng.uniform(spec.mu_lo, spec.mu_hi);
    const double sd = std::sqrt(rng.uniform(spec.w2_lo, spec.w2_hi));
    for (Index i = 0; i < n; ++i) x(i, 1 + j) = rng.normal(mu, sd);
  }
  return x;
}

}  // namespace detail

// Per cluster the draw order is: size, then per slope column (mu, w2, N_g
// normals), then Omega.
inline Design gen_balanced_design(const DesignSpec& spec, const OmegaSpec& omega_spec, Rng& rng) {
  if (spec.kind != DesignSpec::Kind::Balanced) throw DomainError("spec is not a balanced design");
  Design d;
  d.k = spec.k();
  d.sizes.resize(spec.n_clusters);
  for (int g = 0; g < spec.n_clusters; ++g) {
    const auto n = static_cast<Index>(rng.uniform_int(spec.size_lo, spec.size_hi));
    d.sizes(g) = static_cast<int>(n);
    d.x.push_back(detail::balanced_x(n, spec, rng));
    d.omega.push_back(make_omega(omega_spec, n, rng));
    d.factor.push_back(MvnFactor::from_covariance(d.omega.back()));
  }
  return d;
}

// Cluster 1: Omega_1 first, then its top eigenvector p_1, then c_1j ~ U(2,10);
// the slope column is c_1 .* sgn(p_1) with sgn(0) := +1. Clusters 2..G follow
// the balanced recipe at the small sizes.
inline Design gen_unbalanced_design(const DesignSpec& spec, const OmegaSpec& omega_spec, Rng& rng) {
  if (spec.kind != DesignSpec::Kind::UnbalancedOneLarge)
    throw DomainError("spec is not an unbalanced design");
  if (spec.n_regressors != 1)
    throw DomainError("the one-large-cluster design is defined for a single slope column");
  Design d;
  d.k = spec.k();
  d.sizes.resize(spec.n_clusters);

  const auto n1 = static_cast<Index>(spec.large_size);
  d.sizes(0) = spec.large_size;
  Matrix omega1 = make_omega(omega_spec, n1, rng);
  const Vector p1 = power_iteration(omega1, rng).vector;
  Matrix x1(n1, 2);
  x1.col(0).setOnes();
  for (Index i = 0; i < n1; ++i) {
    const double sign = p1(i) < 0.0 ? -1.0 : 1.0;
    x1(i, 1) = rng.uniform(2.0, 10.0) * sign;
  }
  d.x.push_back(std::move(x1));
  d.omega.push_back(std::move(omega1));
  d.factor.push_back(MvnFactor::from_covariance(d.omega.back()));

  for (int g = 1; g < spec.n_clusters; ++g) {
    const auto n = static_cast<Index>(rng.uniform_int(spec.small_lo, spec.small_hi));
    d.sizes(g) = static_cast<int>(n);
    d.x.push_back(detail::balanced_x(n, spec, rng));
    d.omega.push_back(make_omega(omega_spec, n, rng));
    d.factor.push_back(MvnFactor::from_covariance(d.omega.back()));
  }
  return d;
}

inline Design gen_design(const DesignSpec& spec, const OmegaSpec& omega_spec, Rng& rng) {
  return spec.kind == DesignSpec::Kind::Balanced ? gen_balanced_design(spec, omega_spec, rng)
                                                 : gen_unbalanced_design(spec, omega_spec, rng);
}

// Realizes the measurement-error factors; call once after gen_design.
inline void attach_measurement_error(Design& d, const MeasurementErrorSpec& me, Rng& rng) {
  if (static_cast<int>(me.lambda.size()) != d.k - 1)
    throw DimensionMismatch("need one Lambda spec per slope column");
  d.me_factor.clear();
  for (Index g = 0; g < d.n_clusters(); ++g) {
    std::vector<MvnFactor> per_col;
    for (const auto& spec : me.lambda)
      per_col.push_back(MvnFactor::from_covariance(make_omega(spec, d.sizes(g), rng)));
    d.me_factor.push_back(std::move(per_col));
  }
}

// Y_g = X*_g beta + eps_g with eps_g ~ MVN(0, Omega_g), independent across
// clusters; eps is drawn cluster by cluster in block order.
inline ClusteredDataset gen_response(const Design& d, const Vector& beta, Rng& rng) {
  if (beta.size() != d.k) throw DimensionMismatch("beta length must equal k");
  std::vector<ClusterBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(d.n_clusters()));
  for (Index g = 0; g < d.n_clusters(); ++g) {
    ClusterBlock b;
    b.cluster_id = "g" + std::to_string(g + 1);
    b.X = d.x[static_cast<std::size_t>(g)];
    b.Y = b.X * beta + d.factor[static_cast<std::size_t>(g)].sample_zero_mean(rng);
    blocks.push_back(std::move(b));
  }
  return build_dataset(std::move(blocks));
}

// Observed regressors X = X* + Gamma, columns drawn independently per slope
// column and cluster (cluster order, then column order). The true design in
// `d` is untouched.
inline std::vector<Matrix> draw_contaminated_x(const Design& d, Rng& rng) {
  if (d.me_factor.empty()) throw DomainError("no measurement-error spec attached");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(d.n_clusters()));
  for (Index g = 0; g < d.n_clusters(); ++g) {
    Matrix x = d.x[static_cast<std::size_t>(g)];
    for (int j = 0; j + 1 < d.k; ++j)
      x.col(1 + j) += d.me_factor[static_cast<std::size_t>(g)][static_cast<std::size_t>(j)]
                          .sample_zero_mean(rng);
    out.push_back(std::move(x));
  }
  return out;
}

// Dataset-level contamination helper (keeps the input intact).
inline ClusteredDataset inject_measurement_error(const ClusteredDataset& ds,
                                                 const MeasurementErrorSpec& me, Rng& rng) {
  if (static_cast<Index>(me.lambda.size()) != ds.k() - 1)
    throw DimensionMismatch("need one Lambda spec per slope column");
  std::vector<ClusterBlock> blocks = ds.blocks;
  for (auto& b : blocks) {
    for (Index j = 0; j + 1 < ds.k(); ++j) {
      const Matrix lambda = make_omega(me.lambda[static_cast<std::size_t>(j)], b.size(), rng);
      b.X.col(1 + j) += MvnFactor::from_covariance(lambda).sample_zero_mean(rng);
    }
  }
  return build_dataset(std::move(blocks));
}

// Probability limit of pooled OLS under classical measurement error:
// beta - (Qstar0 + C0)^{-1} C0 beta.
inline Vector plim_pols_me_oracle(const Matrix& qstar0, const Matrix& c0, const Vector& beta) {
  if (qstar0.rows() != qstar0.cols() || c0.rows() != c0.cols() || qstar0.rows() != c0.rows() ||
      beta.size() != qstar0.rows())
    throw DimensionMismatch("plim oracle dimensions disagree");
  Eigen::FullPivLU<Matrix> lu(qstar0 + c0);
  if (!lu.isInvertible()) throw SingularMatrix("Qstar0 + C0 is singular");
  return beta - lu.solve(c0 * beta);
}

// Finite-sample analogues computed from the realized fixed design.
inline Matrix realized_qstar0(const Design& d) {
  Matrix q = Matrix::Zero(d.k, d.k);
  for (const auto& x : d.x) q.noalias() += x.transpose() * x;
  return q / static_cast<double>(d.total_obs());
}

// C0 = lim E[Gamma'Gamma]/sum N_g: diagonal with per-column mean of
// tr(Lambda_{g,j})/N_g weighted by cluster size.
inline Matrix me_c0(const Design& d, const MeasurementErrorSpec& me) {
  if (d.me_factor.empty()) throw DomainError("attach_measurement_error must run first");
  Matrix c = Matrix::Zero(d.k, d.k);
  for (std::size_t j = 0; j < me.lambda.size(); ++j) {
    double trace_sum = 0.0;
    for (Index g = 0; g < d.n_clusters(); ++g)
      trace_sum +=
          d.me_factor[static_cast<std::size_t>(g)][j].root().squaredNorm();  // tr(LL') = tr(Lambda)
    c(1 + static_cast<Index>(j), 1 + static_cast<Index>(j)) =
        trace_sum / static_cast<double>(d.total_obs());
  }
  return c;
}

// Averaged-model analogues: Qstar = (1/G) sum Xbar*' Xbar*, Cstar diagonal with
// (1/G) sum 1'Lambda_{g,j}1 / N_g^2.
inline Matrix realized_qstar_averaged(const Design& d) {
  Matrix q = Matrix::Zero(d.k, d.k);
  for (const auto& x : d.x) {
    const Eigen::RowVectorXd xbar = kahan_column_means(x).transpose();
    q.noalias() += xbar.transpose() * xbar;
  }
  return q / static_cast<double>(d.n_clusters());
}

inline Matrix me_cstar_averaged(const Design& d, const MeasurementErrorSpec& me) {
  if (d.me_factor.empty()) throw DomainError("attach_measurement_error must run first");
  Matrix c = Matrix::Zero(d.k, d.k);
  for (std::size_t j = 0; j < me.lambda.size(); ++j) {
    double acc = 0.0;
    for (Index g = 0; g < d.n_clusters(); ++g) {
      const auto& root = d.me_factor[static_cast<std::size_t>(g)][j].root();
      // 1' Lambda 1 / N^2 = ||L' 1||^2 / N^2
      const double n = static_cast<double>(d.sizes(g));
      acc += (root.transpose() * Vector::Ones(root.rows())).squaredNorm() / (n * n);
    }
    c(1 + static_cast<Index>(j), 1 + static_cast<Index>(j)) =
        acc / static_cast<double>(d.n_clusters());
  }
  return c;
}

}  // namespace clusterwise
