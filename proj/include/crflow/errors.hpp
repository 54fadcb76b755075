#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crflow {

// Argument outside the domain of a model function (e.g. r >= 1 on the disc).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent parameters handed to an operation (e.g. s1 >= s).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Grid too small for the requested stencil.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough checkpoints for a quadrature or an order estimate.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A form that must be positive is not; carries the first offending node.
class PositivityError : public std::runtime_error {
 public:
  PositivityError(const std::string& what, std::size_t node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

// Newton failed to reach the residual tolerance within the iteration budget.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double t, double residual)
      : std::runtime_error(what + " at t=" + std::to_string(t) +
                           ", residual=" + std::to_string(residual)),
        t_(t),
        residual_(residual) {}
  double time() const noexcept { return t_; }
  double residual() const noexcept { return residual_; }

 private:
  double t_;
  double residual_;
};

// The standing hypotheses do not hold for a configured run.
class HypothesisFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed run configuration; `field` is the dotted JSON path at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A trajectory or snapshot document that does not describe a valid state.
class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crflow
