#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loopbound {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the region where a formula is defined,
/// e.g. beta below theta/(4d) for the nearest-neighbour bound.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested integral is infinite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition (bad lengths, wrong operation).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An integrand returned a non-finite value. Carries the offending node.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> node)
      : Error(what), node_(std::move(node)) {}
  const std::vector<double>& node() const noexcept { return node_; }

 private:
  std::vector<double> node_;
};

/// No admissible point exists, e.g. an empty feasible set in an optimisation.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace loopbound
