#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "clusterwise/dataset.hpp"
#include "clusterwise/rng.hpp"

using namespace clusterwise;

namespace {

ClusterBlock make_block(const std::string& id, const Matrix& x, const Vector& y) {
  return ClusterBlock{id, x, y};
}

ClusteredDataset random_dataset(Rng& rng, int g_count, int max_n, int k) {
  std::vector<ClusterBlock> blocks;
  for (int g = 0; g < g_count; ++g) {
    const auto n = static_cast<Index>(rng.uniform_int(1, max_n));
    Matrix x(n, k);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      y(i) = rng.uniform(-10, 10);
      for (Index j = 0; j < k; ++j) x(i, j) = rng.uniform(-10, 10);
    }
    blocks.push_back(make_block("c" + std::to_string(g), x, y));
  }
  return build_dataset(std::move(blocks));
}

}  // namespace

TEST_CASE("build_dataset: minimal valid input") {
  Matrix x(1, 1);
  x << 1.0;
  Vector y(1);
  y << 2.0;
  const auto ds = build_dataset<double>({make_block("a", x, y)});
  CHECK(ds.n_clusters() == 1);
  CHECK(ds.k() == 1);
}

TEST_CASE("build_dataset: mismatched k across blocks") {
  Matrix x2 = Matrix::Ones(3, 2), x3 = Matrix::Ones(3, 3);
  Vector y = Vector::Zero(3);
  CHECK_THROWS_AS(build_dataset<double>({make_block("a", x2, y), make_block("b", x3, y)}),
                  DimensionMismatch);
}

TEST_CASE("build_dataset: bookkeeping over 3 blocks") {
  std::vector<ClusterBlock> blocks;
  int total = 0;
  for (const int n : {4, 5, 6}) {
    blocks.push_back(make_block("g" + std::to_string(n), Matrix::Ones(n, 2), Vector::Zero(n)));
    total += n;
  }
  const auto ds = build_dataset(std::move(blocks));
  CHECK(ds.n_clusters() == 3);
  CHECK(ds.total_obs() == total);
  CHECK(total == 15);
}

TEST_CASE("build_dataset rejects X/Y row mismatch and non-finite data") {
  Matrix x = Matrix::Ones(3, 1);
  CHECK_THROWS_AS(build_dataset<double>({make_block("a", x, Vector::Zero(2))}), DimensionMismatch);
  Vector y = Vector::Zero(3);
  y(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(build_dataset<double>({make_block("a", x, y)}), NonFiniteData);
}

TEST_CASE("cluster_average: arithmetic mean of a block") {
  Matrix x(2, 2);
  x << 1, 2, 1, 4;
  Vector y(2);
  y << 3, 5;
  const auto avg = cluster_average(build_dataset<double>({make_block("a", x, y)}));
  CHECK(avg.Xbar(0, 0) == doctest::Approx(1.0));
  CHECK(avg.Xbar(0, 1) == doctest::Approx(3.0));
  CHECK(avg.Ybar(0) == doctest::Approx(4.0));
  CHECK(avg.sizes(0) == 2);
}

TEST_CASE("cluster_average is the identity on singleton clusters") {
  Rng rng(11);
  std::vector<ClusterBlock> blocks;
  for (int g = 0; g < 10; ++g) {
    Matrix x(1, 3);
    Vector y(1);
    y(0) = rng.uniform(-5, 5);
    for (Index j = 0; j < 3; ++j) x(0, j) = rng.uniform(-5, 5);
    blocks.push_back(make_block("s" + std::to_string(g), x, y));
  }
  const auto ds = build_dataset(std::move(blocks));
  const auto avg = cluster_average(ds);
  for (Index g = 0; g < 10; ++g) {
    CHECK(avg.Ybar(g) == ds.blocks[static_cast<std::size_t>(g)].Y(0));
    for (Index j = 0; j < 3; ++j)
      CHECK(avg.Xbar(g, j) == ds.blocks[static_cast<std::size_t>(g)].X(0, j));
  }
}

TEST_CASE("cluster_average matches a one-pass summation oracle to 1e-12 relative") {
  Rng rng(7);
  const auto ds = random_dataset(rng, 5, 40, 3);
  const auto avg = cluster_average(ds);
  for (Index g = 0; g < ds.n_clusters(); ++g) {
    const auto& b = ds.blocks[static_cast<std::size_t>(g)];
    for (Index j = 0; j < ds.k(); ++j) {
      long double acc = 0.0L;
      for (Index i = 0; i < b.size(); ++i) acc += b.X(i, j);
      const double oracle = static_cast<double>(acc / b.size());
      CHECK(std::fabs(avg.Xbar(g, j) - oracle) <=
            1e-12 * std::max(1.0, std::fabs(oracle)));
    }
    long double acc = 0.0L;
    for (Index i = 0; i < b.size(); ++i) acc += b.Y(i);
    CHECK(std::fabs(avg.Ybar(g) - static_cast<double>(acc / b.size())) <=
          1e-12 * std::max(1.0, std::fabs(static_cast<double>(acc / b.size()))));
  }
}

TEST_CASE("cluster_average commutes with within-block row reordering to 1e-12") {
  Rng rng(13);
  auto ds = random_dataset(rng, 4, 30, 2);
  const auto before = cluster_average(ds);
  for (auto& b : ds.blocks) {
    // reverse rows
    b.X = b.X.colwise().reverse().eval();
    b.Y = b.Y.reverse().eval();
  }
  const auto after = cluster_average(ds);
  for (Index g = 0; g < before.Xbar.rows(); ++g) {
    CHECK(std::fabs(before.Ybar(g) - after.Ybar(g)) <=
          1e-12 * std::max(1.0, std::fabs(before.Ybar(g))));
    for (Index j = 0; j < before.Xbar.cols(); ++j)
      CHECK(std::fabs(before.Xbar(g, j) - after.Xbar(g, j)) <=
            1e-12 * std::max(1.0, std::fabs(before.Xbar(g, j))));
  }
}

TEST_CASE("column means sit between the column min and max") {
  Rng rng(17);
  const auto ds = random_dataset(rng, 6, 25, 3);
  const auto avg = cluster_average(ds);
  for (Index g = 0; g < ds.n_clusters(); ++g) {
    const auto& b = ds.blocks[static_cast<std::size_t>(g)];
    for (Index j = 0; j < ds.k(); ++j) {
      CHECK(avg.Xbar(g, j) >= b.X.col(j).minCoeff() - 1e-12);
      CHECK(avg.Xbar(g, j) <= b.X.col(j).maxCoeff() + 1e-12);
    }
  }
}

TEST_CASE("balance_profile") {
  SUBCASE("paper-style balanced sizes") {
    Rng rng(3);
    std::vector<ClusterBlock> blocks;
    for (int g = 0; g < 40; ++g) {
      const auto n = static_cast<Index>(rng.uniform_int(25, 50));
      blocks.push_back(make_block("g", Matrix::Ones(n, 1), Vector::Zero(n)));
    }
    const auto p = balance_profile(build_dataset(std::move(blocks)));
    CHECK(p.ratio >= 0.5);
    CHECK(p.min_size >= 25);
    CHECK(p.max_size <= 50);
  }
  SUBCASE("all equal is perfectly balanced") {
    std::vector<ClusterBlock> blocks(3, make_block("g", Matrix::Ones(8, 1), Vector::Zero(8)));
    CHECK(balance_profile(build_dataset(std::move(blocks))).ratio == 1.0);
  }
  SUBCASE("one dominating cluster") {
    std::vector<ClusterBlock> blocks;
    blocks.push_back(make_block("big", Matrix::Ones(500, 1), Vector::Zero(500)));
    Rng rng(4);
    for (int g = 0; g < 24; ++g) {
      const auto n = static_cast<Index>(rng.uniform_int(4, 10));
      blocks.push_back(make_block("s", Matrix::Ones(n, 1), Vector::Zero(n)));
    }
    const auto p = balance_profile(build_dataset(std::move(blocks)));
    CHECK(p.max_size == 500);
    CHECK(p.ratio == doctest::Approx(p.min_size / 500.0));
    CHECK(p.ratio <= 10.0 / 500.0);
  }
}
