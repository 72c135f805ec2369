#pragma once

#include <stdexcept>
#include <string>

namespace cbr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the domain of the operation (negative counts,
/// nonpositive sigma, incompatible rule/noise pairing, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerically degenerate state reached during iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; carries the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)), message_(what) {}

  const std::string& field() const noexcept { return field_; }
  /// The message without the field prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace cbr
