#pragma once

#include <stdexcept>
#include <string>

namespace qentropy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix failed the density-matrix or co-state checks (Hermiticity, trace, positivity).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Forward or backward propagation produced a state outside tolerance.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, long step) : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// A quantity that must be real came out with a significant imaginary part.
class NumericalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Scenario or configuration validation failure; `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message) : Error(path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace qentropy
