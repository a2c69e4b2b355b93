#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hclimits {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative special-function evaluation hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Model or request violates a construction invariant.
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// The signal strength is unidentified (s = 0), so no limit exists.
class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

/// A response factor evaluated to a negative value.
class YieldNegativityError : public Error {
 public:
  YieldNegativityError(const std::string& what, std::vector<double> eta,
                       std::optional<std::size_t> sample_index = std::nullopt)
      : Error(what), eta_(std::move(eta)), sample_index_(sample_index) {}

  const std::vector<double>& eta() const noexcept { return eta_; }
  std::optional<std::size_t> sample_index() const noexcept { return sample_index_; }

 private:
  std::vector<double> eta_;
  std::optional<std::size_t> sample_index_;
};

/// Integrator cannot represent the prior measure (e.g. quadrature on log-normal priors).
class UnsupportedCombinationError : public Error {
 public:
  using Error::Error;
};

/// Root solve failed. Carries the last bracket for diagnostics.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double lo, double hi, int iterations)
      : Error(what), lo_(lo), hi_(hi), iterations_(iterations) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double lo_;
  double hi_;
  int iterations_;
};

}  // namespace hclimits
