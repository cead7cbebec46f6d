#pragma once

#include <stdexcept>
#include <string>

namespace rarelab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-physical input: non-positive density or temperature, negative
/// internal energy, t <= 0 where a positive time is required.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Eigendecomposition requested too close to vacuum.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

class NotARarefactionError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (mismatched grids, missing data).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the feature width it is asked to resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `field()` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A time integration produced a non-finite or inadmissible state.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ProfileBoundError : public Error {
 public:
  using Error::Error;
};

/// Internal failure of a root finder that is guaranteed to converge.
class RootFindError : public Error {
 public:
  using Error::Error;
};

}  // namespace rarelab
