#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clusterwise/csv.hpp"
#include "clusterwise/rng.hpp"

using namespace clusterwise;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& content) {
    path = fs::temp_directory_path() /
           ("cw_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_CASE("load_csv groups by first appearance and adds the intercept") {
  TempFile f("g,y,x\nA,1,2\nA,2,3\nB,3,4\nB,4,5\nA,5,6\nB,6,7\n");
  CsvSchema schema{"g", "y", {"x"}, true};
  const auto ds = load_csv(f.path.string(), schema);
  CHECK(ds.n_clusters() == 2);
  CHECK(ds.k() == 2);
  CHECK(ds.blocks[0].cluster_id == "A");
  CHECK(ds.blocks[0].size() == 3);
  CHECK(ds.blocks[1].cluster_id == "B");
  CHECK(ds.blocks[0].X.col(0).isOnes());
  CHECK(ds.blocks[0].X(2, 1) == 6.0);
  CHECK(ds.blocks[0].Y(2) == 5.0);
}

TEST_CASE("load_csv reports parse errors with the row") {
  TempFile f("g,y,x\nA,1,2\nA,oops,3\n");
  CsvSchema schema{"g", "y", {"x"}, true};
  try {
    load_csv(f.path.string(), schema);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row == 2);
    CHECK(e.column == "y");
  }
}

TEST_CASE("load_csv error taxonomy") {
  SUBCASE("missing column") {
    TempFile f("g,y\nA,1\n");
    CHECK_THROWS_AS(load_csv(f.path.string(), CsvSchema{"g", "y", {"x"}, true}), MissingColumn);
  }
  SUBCASE("empty file") {
    TempFile f("");
    CHECK_THROWS_AS(load_csv(f.path.string(), CsvSchema{"g", "y", {}, true}), EmptyFile);
  }
  SUBCASE("header only") {
    TempFile f("g,y,x\n");
    CHECK_THROWS_AS(load_csv(f.path.string(), CsvSchema{"g", "y", {"x"}, true}), EmptyFile);
  }
  SUBCASE("missing value without drop_na") {
    TempFile f("g,y,x\nA,1,\n");
    CHECK_THROWS_AS(load_csv(f.path.string(), CsvSchema{"g", "y", {"x"}, true}), ParseError);
  }
}

TEST_CASE("drop_na drops rows and counts them") {
  TempFile f("g,y,x\nA,1,2\nA,NA,3\nB,3,4\nB,4,\nB,5,6\n");
  CsvSchema schema{"g", "y", {"x"}, true};
  schema.drop_na = true;
  CsvLoadInfo info;
  const auto ds = load_csv(f.path.string(), schema, &info);
  CHECK(info.rows_read == 5);
  CHECK(info.rows_dropped_na == 2);
  CHECK(ds.total_obs() == 3);
}

TEST_CASE("min_cluster_size drops small clusters with a count") {
  TempFile f("g,y,x\nA,1,2\nA,2,3\nA,3,4\nB,4,5\nC,5,6\nC,6,7\nC,7,8\n");
  CsvSchema schema{"g", "y", {"x"}, true};
  schema.min_cluster_size = 3;
  CsvLoadInfo info;
  const auto ds = load_csv(f.path.string(), schema, &info);
  CHECK(ds.n_clusters() == 2);
  CHECK(info.clusters_dropped_small == 1);
  CHECK(info.observations_dropped_small == 1);
}

TEST_CASE("quoted fields and escaped quotes parse per RFC 4180") {
  std::istringstream in("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n");
  const auto rows = parse_csv(in);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "x,1");
  CHECK(rows[1][1] == "say \"hi\"");
}

TEST_CASE("write_csv/load_csv round-trips numeric content exactly") {
  Rng rng(21);
  std::vector<ClusterBlock> blocks;
  for (int g = 0; g < 4; ++g) {
    const auto n = static_cast<Index>(rng.uniform_int(2, 6));
    ClusterBlock b;
    b.cluster_id = "cl" + std::to_string(g);
    b.X.resize(n, 3);
    b.X.col(0).setOnes();
    b.Y.resize(n);
    for (Index i = 0; i < n; ++i) {
      b.Y(i) = rng.normal(0, 3);
      b.X(i, 1) = rng.normal(2, 5);
      b.X(i, 2) = rng.uniform(-1, 1);
    }
    blocks.push_back(std::move(b));
  }
  const auto ds = build_dataset(std::move(blocks));

  const auto path = fs::temp_directory_path() / "cw_roundtrip.csv";
  CsvSchema schema{"g", "y", {"x1", "x2"}, true};
  write_csv(ds, path.string(), schema);
  const auto back = load_csv(path.string(), schema);
  std::error_code ec;
  fs::remove(path, ec);

  REQUIRE(back.n_clusters() == ds.n_clusters());
  for (Index g = 0; g < ds.n_clusters(); ++g) {
    const auto& a = ds.blocks[static_cast<std::size_t>(g)];
    const auto& b = back.blocks[static_cast<std::size_t>(g)];
    REQUIRE(a.size() == b.size());
    CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.Y - b.Y).cwiseAbs().maxCoeff() == 0.0);
  }
}
