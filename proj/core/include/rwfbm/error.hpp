// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rwfbm {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Evaluation beyond what a hierarchy or path has generated.
class OutOfHorizonError : public Error {
public:
  using Error::Error;
};

/// Twisting asked for more bridges than the coarser level provides.
class InsufficientPreviousLevelError : public Error {
public:
  using Error::Error;
};

/// A request would exceed the configured step or memory caps.
class ResourceLimitError : public Error {
public:
  using Error::Error;
};

/// Dense covariance factorization broke down.
class FactorizationError : public Error {
public:
  using Error::Error;
};

/// Invalid run or check configuration. `field()` names the offending field.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Too little data for an estimator or fit.
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

} // namespace rwfbm
