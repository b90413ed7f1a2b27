#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "geogauss/types.hpp"

namespace geogauss {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violation: bad parameters, wrong dimensions, unknown names.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy value
/// (singular Jacobian, non-finite state, quadrature underflow, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Matrix expected to be symmetric positive definite was not.
/// Carries the eigenvalues so callers can report the spectrum.
class NotPositiveDefinite : public NumericalError {
 public:
  NotPositiveDefinite(const std::string& what, Vector spectrum)
      : NumericalError(what), spectrum_(std::move(spectrum)) {}

  const Vector& spectrum() const { return spectrum_; }

 private:
  Vector spectrum_;
};

/// Malformed configuration; names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace geogauss
