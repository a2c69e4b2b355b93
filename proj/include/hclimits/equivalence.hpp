#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "hclimits/limits.hpp"
#include "hclimits/marginalization.hpp"
#include "hclimits/model.hpp"

namespace hclimits {

enum class Verdict { equivalent_within_tol, divergent_as_expected, unexpected_divergence };

std::string_view to_string(Verdict v);

struct EquivalenceReport {
  double mu_up_cls = 0.0;
  double mu_up_bayes = 0.0;
  /// |a - b| / max(a, b)
  double rel_diff = 0.0;
  /// Some signal response is not the identity.
  bool signal_uncertain = false;
  /// Monte Carlo standard error of the hybrid CLs limit.
  std::optional<double> mc_stderr;
  Verdict verdict = Verdict::equivalent_within_tol;
  LimitResult cls;
  LimitResult bayes;
};

struct CompareOptions {
  double tol = 1e-6;
  Execution exec{};
  /// Test hook: draw the Bayesian side's Monte Carlo samples from a different
  /// seed, breaking the shared-sample contract.
  std::optional<std::uint64_t> bayes_seed_override;
};

/// Runs the hybrid CLs and marginal Bayesian limits on one shared sample set
/// and classifies their agreement. Errors from either solve are rethrown with
/// the failing method named in the message.
EquivalenceReport compare_limits(const CountingModel& model, const LimitRequest& req, const Integrator& integrator,
                                 const CompareOptions& options = {});

/// Classification rule used by compare_limits.
Verdict classify(double rel_diff, bool signal_uncertain, double tol);

}  // namespace hclimits
