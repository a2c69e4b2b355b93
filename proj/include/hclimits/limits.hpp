#pragma once

#include <optional>
#include <utility>

namespace hclimits {

enum class MuPrior { uniform };

/// alpha is the exclusion threshold: CLs(mu_up) = alpha, posterior mass above mu_up = alpha.
struct LimitRequest {
  double alpha = 0.05;
  MuPrior mu_prior = MuPrior::uniform;
  double rel_tol = 1e-9;
  int max_iter = 200;

  /// Throws InvalidModelError unless 0 < alpha < 1, rel_tol > 0 and max_iter > 0.
  void validate() const;
};

struct LimitResult {
  double mu_up = 0.0;
  /// CLs(mu_up) for frequentist limits, posterior tail mass above mu_up for Bayesian ones.
  double criterion_at_solution = 0.0;
  int iterations = 0;
  std::pair<double, double> bracket{0.0, 0.0};
  /// Monte Carlo standard errors (delta method); absent for deterministic integrators.
  std::optional<double> criterion_stderr;
  std::optional<double> mu_up_stderr;
};

}  // namespace hclimits
