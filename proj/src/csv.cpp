#include "clusterwise/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "clusterwise/errors.hpp"

namespace clusterwise {

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
        break;
    }
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

namespace {

bool is_na_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(row, col, "cannot parse '" + s + "' as a number");
  if (!std::isfinite(value)) throw ParseError(row, col, "non-finite value '" + s + "'");
  return value;
}

}  // namespace

ClusteredDataset load_csv(const std::string& path, const CsvSchema& schema, CsvLoadInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const auto rows = parse_csv(in);
  if (rows.empty()) throw EmptyFile("'" + path + "' is empty");

  const auto& header = rows.front();
  auto col_index = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumn("column '" + name + "' not found in '" + path + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cluster_idx = col_index(schema.cluster_col);
  const std::size_t y_idx = col_index(schema.y_col);
  std::vector<std::size_t> x_idx;
  x_idx.reserve(schema.x_cols.size());
  for (const auto& name : schema.x_cols) x_idx.push_back(col_index(name));
  if (rows.size() < 2) throw EmptyFile("'" + path + "' has a header but no data rows");

  const Index k = static_cast<Index>(schema.x_cols.size()) + (schema.add_intercept ? 1 : 0);
  if (k < 1) throw ConfigError("schema selects no regressor columns");

  struct Group {
    std::vector<double> y;
    std::vector<double> x;  // row-major, x_cols only
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  CsvLoadInfo local{};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r];
    if (fields.size() != header.size())
      throw ParseError(r, "", "expected " + std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    ++local.rows_read;
    bool has_na = is_na_token(fields[y_idx]);
    for (const auto idx : x_idx) has_na = has_na || is_na_token(fields[idx]);
    if (has_na) {
      if (schema.drop_na) {
        ++local.rows_dropped_na;
        continue;
      }
      std::string col = schema.y_col;
      if (!is_na_token(fields[y_idx])) {
        for (std::size_t j = 0; j < x_idx.size(); ++j)
          if (is_na_token(fields[x_idx[j]])) {
            col = schema.x_cols[j];
            break;
          }
      }
      throw ParseError(r, col, "missing value (use --drop-na to drop such rows)");
    }
    const std::string& key = fields[cluster_idx];
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.y.push_back(parse_number(fields[y_idx], r, schema.y_col));
    for (std::size_t j = 0; j < x_idx.size(); ++j)
      it->second.x.push_back(parse_number(fields[x_idx[j]], r, schema.x_cols[j]));
  }
  if (order.empty()) throw EmptyFile("'" + path + "' has no usable data rows");

  std::vector<ClusterBlock> blocks;
  blocks.reserve(order.size());
  for (const auto& key : order) {
    const Group& grp = groups.at(key);
    const auto n = static_cast<Index>(grp.y.size());
    if (schema.min_cluster_size > 0 && n < schema.min_cluster_size) {
      ++local.clusters_dropped_small;
      local.observations_dropped_small += grp.y.size();
      continue;
    }
    ClusterBlock b;
    b.cluster_id = key;
    b.Y = Eigen::Map<const Vector>(grp.y.data(), n);
    b.X.resize(n, k);
    Index col0 = 0;
    if (schema.add_intercept) {
      b.X.col(0).setOnes();
      col0 = 1;
    }
    const auto p = static_cast<Index>(schema.x_cols.size());
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) b.X(i, col0 + j) = grp.x[static_cast<std::size_t>(i * p + j)];
    blocks.push_back(std::move(b));
  }
  if (blocks.empty())
    throw Error("all clusters were dropped by --min-cluster-size " +
                std::to_string(schema.min_cluster_size));
  if (info) *info = local;
  return build_dataset(std::move(blocks));
}

void write_csv(const ClusteredDataset& ds, const std::string& path, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << schema.cluster_col << ',' << schema.y_col;
  for (const auto& name : schema.x_cols) out << ',' << name;
  out << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  const Index col0 = schema.add_intercept ? 1 : 0;
  for (const auto& b : ds.blocks) {
    for (Index i = 0; i < b.size(); ++i) {
      out << b.cluster_id << ',';
      put(b.Y(i));
      for (Index j = col0; j < b.k(); ++j) {
        out << ',';
        put(b.X(i, j));
      }
      out << '\n';
    }
  }
}

}  // namespace clusterwise
