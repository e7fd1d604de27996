#pragma once

#include <stdexcept>
#include <string>

namespace tvec {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files (CSV grids, PGM, manifests, model files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid sizes, parameters, or configuration values.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that cannot be processed (single-class data,
/// degenerate filterbanks, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace tvec
