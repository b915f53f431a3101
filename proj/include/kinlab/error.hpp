#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kinlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// Malformed or out-of-range run configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Raised by iterative solvers that exhaust their budget.
struct ConvergenceError : Error {
  std::vector<double> history;
  ConvergenceError(const std::string& what, std::vector<double> h)
      : Error(what), history(std::move(h)) {}
};

struct DistanceError : Error {
  double best;
  double gap;
  DistanceError(const std::string& what, double b, double g)
      : Error(what), best(b), gap(g) {}
};

}  // namespace kinlab
