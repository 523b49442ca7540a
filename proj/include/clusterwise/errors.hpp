#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clusterwise {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NonFiniteData : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct InsufficientClusters : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct SingularRestrictedCov : Error { using Error::Error; };
struct RankDeficientR : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NotPsd : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

struct MissingColumn : Error { using Error::Error; };
struct EmptyFile : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct ParseError : Error {
  ParseError(std::size_t row, const std::string& column, const std::string& what_arg)
      : Error("row " + std::to_string(row) + ", column '" + column + "': " + what_arg),
        row(row),
        column(column) {}
  std::size_t row;      // 1-based data row (excluding the header)
  std::string column;
};

struct ConfigError : Error { using Error::Error; };

}  // namespace clusterwise
