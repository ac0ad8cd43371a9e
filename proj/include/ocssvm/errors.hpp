#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ocssvm {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter problems: the CLI maps these to the usage exit code.
class ParamError : public Error {
 public:
  using Error::Error;
};

class InvalidRange : public ParamError {
 public:
  using ParamError::ParamError;
};

class InfeasibleParams : public ParamError {
 public:
  using ParamError::ParamError;
};

// Input data problems.
class DataError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : DataError("parse error at row " + std::to_string(row) + " col " +
                  std::to_string(col) + ": " + what),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class RaggedRows : public DataError {
 public:
  using DataError::DataError;
};

class NonFiniteValue : public DataError {
 public:
  using DataError::DataError;
};

class NonAscendingIndex : public DataError {
 public:
  using DataError::DataError;
};

class NotTwoDimensional : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class VersionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class CorruptModel : public DataError {
 public:
  using DataError::DataError;
};

// k_aa + k_bb - 2 k_ab vanishes: the pair has no curvature.
class DegeneratePair : public Error {
 public:
  using Error::Error;
};

// The reference QP has an empty feasible set.
class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace ocssvm
