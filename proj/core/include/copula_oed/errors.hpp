#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace copula_oed {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function evaluation produced a non-finite value, or an iterative
/// numerical procedure did not converge.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::size_t> coordinate = std::nullopt)
      : Error(what), coordinate_(coordinate) {}

  /// Offending coordinate of the argument vector, when known.
  std::optional<std::size_t> coordinate() const noexcept { return coordinate_; }

 private:
  std::optional<std::size_t> coordinate_;
};

/// The function values at the two ends of a root bracket share a sign.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// A symmetric factorization met a pivot that is not safely positive.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, std::size_t pivot_index)
      : Error(what), pivot_index_(pivot_index) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An outcome model produced an invalid probability or information matrix.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A run configuration could not be parsed or failed validation.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line, std::size_t column,
              std::string field = {})
      : Error(what), line_(line), column_(column), field_(std::move(field)) {}

  /// 1-based line of the offending token; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string field_;
};

}  // namespace copula_oed
