#pragma once

#include <stdexcept>
#include <string>

namespace gcoh {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance matrix violates the uncertainty relation (or is not a valid covariance).
class UnphysicalState : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (e.g. nu < 1 for g(nu)).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Operation needs a different number of modes than the state has.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Acquisition plan asks for quadratures that cannot be measured jointly.
class PlanError : public Error {
 public:
  using Error::Error;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit FormatError(const std::string& what) : FormatError(what, 0) {}

  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class LengthMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Bisection bracket does not contain a sign change.
class NoCrossingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gcoh
