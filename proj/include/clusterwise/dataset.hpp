#pragma once

// Clustered data model: per-cluster blocks (X_g, Y_g), the averaged dataset of
// cluster means, and the balance profile. Blocks are immutable after
// build_dataset and safe to share across threads.

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

#include "clusterwise/errors.hpp"

namespace clusterwise {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

template <class Scalar>
struct ClusterBlockT {
  std::string cluster_id;
  MatrixX<Scalar> X;  // N_g x k, first column may be an explicit intercept
  VectorX<Scalar> Y;  // N_g

  Index size() const { return X.rows(); }
  Index k() const { return X.cols(); }
};

template <class Scalar>
struct ClusteredDatasetT {
  std::vector<ClusterBlockT<Scalar>> blocks;  // first-appearance order

  Index n_clusters() const { return static_cast<Index>(blocks.size()); }
  Index k() const { return blocks.empty() ? 0 : blocks.front().k(); }
  Index total_obs() const {
    Index n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }
};

template <class Scalar>
struct AveragedDatasetT {
  MatrixX<Scalar> Xbar;       // G x k rows of cluster means
  VectorX<Scalar> Ybar;       // G
  Eigen::VectorXi sizes;      // N_g of each source block
};

struct BalanceProfile {
  Index min_size = 0;
  Index max_size = 0;
  double ratio = 0.0;  // min/max, in (0,1]
};

using ClusterBlock = ClusterBlockT<double>;
using ClusteredDataset = ClusteredDatasetT<double>;
using AveragedDataset = AveragedDatasetT<double>;

// Compensated (Kahan) column sum; keeps cluster means reproducible to 1e-12
// relative regardless of block size.
template <class Derived>
VectorX<typename Derived::Scalar> kahan_column_means(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> sum = VectorX<Scalar>::Zero(m.cols());
  VectorX<Scalar> carry = VectorX<Scalar>::Zero(m.cols());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const Scalar y = m(i, j) - carry(j);
      const Scalar t = sum(j) + y;
      carry(j) = (t - sum(j)) - y;
      sum(j) = t;
    }
  }
  return sum / static_cast<Scalar>(m.rows());
}

template <class Scalar>
ClusteredDatasetT<Scalar> build_dataset(std::vector<ClusterBlockT<Scalar>> blocks) {
  if (blocks.empty()) throw DimensionMismatch("dataset needs at least one cluster block");
  const Index k = blocks.front().k();
  if (k < 1) throw DimensionMismatch("blocks must have at least one regressor column");
  for (std::size_t g = 0; g < blocks.size(); ++g) {
    const auto& b = blocks[g];
    if (b.X.rows() < 1)
      throw DimensionMismatch("cluster '" + b.cluster_id + "' is empty");
    if (b.X.rows() != b.Y.rows())
      throw DimensionMismatch("cluster '" + b.cluster_id + "': X has " +
                              std::to_string(b.X.rows()) + " rows but Y has " +
                              std::to_string(b.Y.rows()));
    if (b.k() != k)
      throw DimensionMismatch("cluster '" + b.cluster_id + "': k=" + std::to_string(b.k()) +
                              " differs from k=" + std::to_string(k) + " of the first block");
    if (!b.X.allFinite() || !b.Y.allFinite())
      throw NonFiniteData("cluster '" + b.cluster_id + "' contains non-finite entries");
  }
  return ClusteredDatasetT<Scalar>{std::move(blocks)};
}

template <class Scalar>
AveragedDatasetT<Scalar> cluster_average(const ClusteredDatasetT<Scalar>& ds) {
  const Index g_count = ds.n_clusters();
  AveragedDatasetT<Scalar> out;
  out.Xbar.resize(g_count, ds.k());
  out.Ybar.resize(g_count);
  out.sizes.resize(g_count);
  for (Index g = 0; g < g_count; ++g) {
    const auto& b = ds.blocks[static_cast<std::size_t>(g)];
    out.Xbar.row(g) = kahan_column_means(b.X).transpose();
    out.Ybar(g) = kahan_column_means(b.Y)(0);
    out.sizes(g) = static_cast<int>(b.size());
  }
  return out;
}

template <class Scalar>
BalanceProfile balance_profile(const ClusteredDatasetT<Scalar>& ds) {
  BalanceProfile p;
  p.min_size = ds.blocks.front().size();
  p.max_size = p.min_size;
  for (const auto& b : ds.blocks) {
    p.min_size = std::min(p.min_size, b.size());
    p.max_size = std::max(p.max_size, b.size());
  }
  p.ratio = static_cast<double>(p.min_size) / static_cast<double>(p.max_size);
  return p;
}

// Stacked (pooled) views of the dataset.
template <class Scalar>
MatrixX<Scalar> stack_design(const ClusteredDatasetT<Scalar>& ds) {
  MatrixX<Scalar> X(ds.total_obs(), ds.k());
  Index row = 0;
  for (const auto& b : ds.blocks) {
    X.middleRows(row, b.size()) = b.X;
    row += b.size();
  }
  return X;
}

template <class Scalar>
VectorX<Scalar> stack_response(const ClusteredDatasetT<Scalar>& ds) {
  VectorX<Scalar> y(ds.total_obs());
  Index row = 0;
  for (const auto& b : ds.blocks) {
    y.segment(row, b.size()) = b.Y;
    row += b.size();
  }
  return y;
}

// True when some column is identically a nonzero constant (an explicit
// intercept or a rescaled one); decides whether R^2 is computed about the mean.
template <class Scalar>
bool has_constant_column(const ClusteredDatasetT<Scalar>& ds) {
  for (Index j = 0; j < ds.k(); ++j) {
    bool constant = true;
    const Scalar v = ds.blocks.front().X(0, j);
    if (v == Scalar(0)) continue;
    for (const auto& b : ds.blocks) {
      if (!(b.X.col(j).array() == v).all()) {
        constant = false;
        break;
      }
    }
    if (constant) return true;
  }
  return false;
}

}  // namespace clusterwise
