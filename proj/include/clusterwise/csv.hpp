#pragma once

// RFC-4180-style CSV ingestion: header row required, UTF-8, '.' decimal
// separator. Rows are grouped by the cluster column in order of first
// appearance.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "clusterwise/dataset.hpp"

namespace clusterwise {

struct CsvSchema {
  std::string cluster_col;
  std::string y_col;
  std::vector<std::string> x_cols;
  bool add_intercept = true;
  // Clusters with fewer observations are dropped (0 = keep everything).
  int min_cluster_size = 0;
  // When false, a missing value is a ParseError; when true the row is dropped
  // and counted.
  bool drop_na = false;
};

struct CsvLoadInfo {
  std::size_t rows_read = 0;
  std::size_t rows_dropped_na = 0;
  std::size_t clusters_dropped_small = 0;
  std::size_t observations_dropped_small = 0;
};

ClusteredDataset load_csv(const std::string& path, const CsvSchema& schema,
                          CsvLoadInfo* info = nullptr);

// Writes the dataset back in load_csv's column layout (cluster, y, x...),
// full round-trip precision. The intercept column, if flagged, is omitted.
void write_csv(const ClusteredDataset& ds, const std::string& path, const CsvSchema& schema);

// Low-level parser used by load_csv; exposed for tests. Returns rows of
// fields; handles quoted fields, escaped quotes and CRLF line ends.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

}  // namespace clusterwise
