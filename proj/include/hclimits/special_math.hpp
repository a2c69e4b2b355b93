#pragma once

#include <cstdint>
#include <limits>

namespace hclimits {

/// Natural-log probability. Holds a value in [-inf, 0].
class LogProb {
 public:
  constexpr LogProb() = default;
  explicit LogProb(double value);

  static constexpr LogProb certain() { return LogProb{}; }
  static LogProb impossible() { return LogProb(-std::numeric_limits<double>::infinity()); }

  constexpr double value() const noexcept { return value_; }
  double prob() const;

  friend constexpr bool operator==(LogProb, LogProb) = default;

 private:
  double value_ = 0.0;
};

/// ln Gamma(x) for x > 0 (Lanczos, g = 607/128). Reentrant, unlike std::lgamma.
double log_gamma(double x);

/// ln(n!), tabulated for small n.
double log_factorial(std::uint64_t n);

/// ln Poisson(n; nu). nu = 0 gives certainty for n = 0 and -inf otherwise.
LogProb log_poisson_pmf(std::int64_t n, double nu);

/// P(N <= n_obs; nu), summed term by term. Independent of gamma_q.
double poisson_cdf(std::int64_t n_obs, double nu);

/// ln P(N <= n_obs; nu). Stays finite where poisson_cdf underflows.
double log_poisson_cdf(std::int64_t n_obs, double nu);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a; x) / Gamma(a).
///
/// Uses the power series of P for x < a + 1 and a Lentz continued fraction
/// for Q otherwise. Both iterate until the relative term drops below 1e-15
/// and throw ConvergenceError after 500 iterations.
double gamma_q(double a, double x);

}  // namespace hclimits
