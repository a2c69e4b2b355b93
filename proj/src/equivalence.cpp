#include "hclimits/equivalence.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "hclimits/errors.hpp"

namespace hclimits {

namespace {

// Rethrows the active exception with the method name prefixed, keeping its type.
[[noreturn]] void rethrow_annotated(const std::string& method) {
  const std::string prefix = method + ": ";
  try {
    throw;
  } catch (const YieldNegativityError& e) {
    throw YieldNegativityError(prefix + e.what(), e.eta(), e.sample_index());
  } catch (const SolverError& e) {
    throw SolverError(prefix + e.what(), e.lo(), e.hi(), e.iterations());
  } catch (const DegenerateModelError& e) {
    throw DegenerateModelError(prefix + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const UnsupportedCombinationError& e) {
    throw UnsupportedCombinationError(prefix + e.what());
  } catch (const InvalidModelError& e) {
    throw InvalidModelError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::equivalent_within_tol:
      return "equivalent_within_tol";
    case Verdict::divergent_as_expected:
      return "divergent_as_expected";
    case Verdict::unexpected_divergence:
      return "unexpected_divergence";
  }
  return "unknown";
}

Verdict classify(double rel_diff, bool signal_uncertain, double tol) {
  if (rel_diff <= tol) return Verdict::equivalent_within_tol;
  return signal_uncertain ? Verdict::divergent_as_expected : Verdict::unexpected_divergence;
}

EquivalenceReport compare_limits(const CountingModel& model, const LimitRequest& req, const Integrator& integrator,
                                 const CompareOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidModelError("equivalence tolerance must be positive");
  const SampleSet shared = draw_samples(model.systematics(), integrator);

  EquivalenceReport report;
  report.signal_uncertain = !model.signal_responses_identity();
  try {
    report.cls = hybrid_cls_upper_limit(model, req, shared, options.exec);
  } catch (const Error&) {
    rethrow_annotated("hybrid CLs");
  }
  try {
    if (options.bayes_seed_override && integrator.kind() == Integrator::Kind::monte_carlo) {
      const SampleSet forged =
          draw_samples(model.systematics(), Integrator::monte_carlo(integrator.n_samples(), *options.bayes_seed_override));
      report.bayes = bayesian_marginal_upper_limit(model, req, forged, options.exec);
    } else {
      report.bayes = bayesian_marginal_upper_limit(model, req, shared, options.exec);
    }
  } catch (const Error&) {
    rethrow_annotated("marginal Bayesian");
  }

  report.mu_up_cls = report.cls.mu_up;
  report.mu_up_bayes = report.bayes.mu_up;
  report.rel_diff = std::fabs(report.mu_up_cls - report.mu_up_bayes) / std::max(report.mu_up_cls, report.mu_up_bayes);
  report.mc_stderr = report.cls.mu_up_stderr;
  report.verdict = classify(report.rel_diff, report.signal_uncertain, options.tol);
  return report;
}

}  // namespace hclimits
