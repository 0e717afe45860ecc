#ifndef MODAL_ERROR_HPP
#define MODAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace modal {

/// Base of every error raised by the library.  Precondition violations on
/// plain arguments use std::invalid_argument / std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or out-of-range run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input tables that make the computation undefined (C_l <= 0, zero
/// matrix normalisation, non-convergence, memory budget exceeded).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File system failures and malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Mode-mapping / basis-table text parse failure.
class ParseError : public IoError {
 public:
  enum class Kind { malformed, duplicate, unordered, index_range, header };

  ParseError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Gamma-matrix (de)serialisation failure.
class FormatError : public IoError {
 public:
  enum class Kind { corrupt_header, dimension_mismatch, truncated_payload };

  FormatError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace modal

#endif  // MODAL_ERROR_HPP
