#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdloc {

/// Base class for all hdloc errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input data failed validation (bad matrix, bad labels, bad config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NonFiniteEntry : public ValidationError {
 public:
  NonFiniteEntry(std::size_t row, std::size_t col)
      : ValidationError("non-finite entry at row " + std::to_string(row) +
                        ", column " + std::to_string(col)),
        row(row),
        col(col) {}
  std::size_t row;
  std::size_t col;
};

class GroupTooSmall : public ValidationError {
 public:
  explicit GroupTooSmall(int group, std::size_t size)
      : ValidationError("group " + std::to_string(group) + " has " +
                        std::to_string(size) + " observations, need at least 2"),
        group(group) {}
  int group;
};

class SingleGroup : public ValidationError {
 public:
  SingleGroup() : ValidationError("need at least 2 groups") {}
};

class DimensionMismatch : public ValidationError {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs)
      : ValidationError("vector lengths differ: " + std::to_string(lhs) +
                        " vs " + std::to_string(rhs)) {}
};

class LabelMismatch : public ValidationError {
 public:
  LabelMismatch(std::size_t labels, std::size_t rows)
      : ValidationError("got " + std::to_string(labels) + " labels for " +
                        std::to_string(rows) + " rows") {}
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, std::size_t col, const std::string& detail)
      : ValidationError("parse error at line " + std::to_string(line) +
                        ", field " + std::to_string(col) + ": " + detail),
        line(line),
        col(col) {}
  std::size_t line;
  std::size_t col;
};

class ShapeMismatch : public ValidationError {
 public:
  explicit ShapeMismatch(const std::string& what) : ValidationError(what) {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure while computing a result.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrum : public NumericError {
 public:
  explicit DegenerateSpectrum(const std::string& what =
                                  "estimated null spectrum is degenerate")
      : NumericError(what) {}
};

class QuadratureFailure : public NumericError {
 public:
  explicit QuadratureFailure(const std::string& what)
      : NumericError(what) {}
};

class InvalidMoments : public NumericError {
 public:
  explicit InvalidMoments(const std::string& what) : NumericError(what) {}
};

class SingularCovariance : public NumericError {
 public:
  explicit SingularCovariance(const std::string& what)
      : NumericError(what) {}
};

}  // namespace hdloc
