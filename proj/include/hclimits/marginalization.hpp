#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hclimits/limits.hpp"
#include "hclimits/model.hpp"

namespace hclimits {

/// How the nuisance integrals are discretized.
class Integrator {
 public:
  enum class Kind { monte_carlo, gauss_hermite };

  /// Seeded Monte Carlo draws from the priors. n_samples >= 1.
  static Integrator monte_carlo(std::uint64_t n_samples, std::uint64_t seed);
  /// Tensor-product Gauss-Hermite rule; nodes_per_dim in [2, 64]. Normal-family priors only.
  static Integrator gauss_hermite(int nodes_per_dim);

  Kind kind() const noexcept { return kind_; }
  std::uint64_t n_samples() const noexcept { return n_samples_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int nodes_per_dim() const noexcept { return nodes_per_dim_; }

  friend bool operator==(const Integrator&, const Integrator&) = default;

 private:
  Integrator(Kind kind, std::uint64_t n_samples, std::uint64_t seed, int nodes)
      : kind_(kind), n_samples_(n_samples), seed_(seed), nodes_per_dim_(nodes) {}

  Kind kind_;
  std::uint64_t n_samples_;
  std::uint64_t seed_;
  int nodes_per_dim_;
};

struct NuisanceSample {
  std::vector<double> eta;
  double weight = 0.0;
};

/// A discretized prior measure. Weights sum to one.
struct SampleSet {
  std::vector<NuisanceSample> samples;
  /// True for equal-weight random draws; enables standard-error estimates.
  bool monte_carlo = false;

  std::size_t size() const noexcept { return samples.size(); }
};

/// Worker threads used for per-sample evaluation. Results are bitwise
/// independent of this setting: terms land in per-sample slots and are
/// reduced serially in a fixed order.
struct Execution {
  unsigned threads = 1;
};

/// One-dimensional Gauss-Hermite rule for the standard normal density,
/// nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_hermite_rule(int nodes);

/// Deterministic for a given (systematics, integrator). Monte Carlo draws z from a
/// Philox4x32-10 stream keyed by the seed with counter (sample index, nuisance
/// index), maps them through the priors and the correlation Cholesky factor.
/// A model without nuisances yields a single unit-weight sample.
SampleSet draw_samples(const SystematicsModel& systematics, const Integrator& integrator);

/// Value with an optional Monte Carlo standard error.
struct Estimate {
  double value = 0.0;
  std::optional<double> std_error;
};

/// L_m(mu; n) = sum_k w_k Poisson(n; mu s_k + b_k). The prior densities are
/// the sampling measure and are not multiplied in again.
double marginal_likelihood(const CountingModel& model, double mu, std::int64_t n, const SampleSet& samples,
                           Execution exec = {});

/// Marginal CLs+b = sum_k w_k P(N <= N_obs; mu s_k + b_k).
Estimate marginal_clsb(const CountingModel& model, double mu, const SampleSet& samples, Execution exec = {});

/// Marginal CLb = sum_k w_k P(N <= N_obs; b_k).
Estimate marginal_clb(const CountingModel& model, const SampleSet& samples, Execution exec = {});

/// Hybrid CLs: marginal CLs+b over marginal CLb on one sample set.
Estimate hybrid_cls(const CountingModel& model, double mu, const SampleSet& samples, Execution exec = {});

/// Marginal Bayesian tail mass above mu:
/// sum_k w_k Q(N_obs+1, mu s_k + b_k) / s_k  over  sum_k w_k Q(N_obs+1, b_k) / s_k.
Estimate bayesian_marginal_tail(const CountingModel& model, double mu, const SampleSet& samples,
                                Execution exec = {});

/// Marginal posterior density for a uniform prior on mu.
Estimate marginal_posterior_density(const CountingModel& model, double mu, const SampleSet& samples,
                                    Execution exec = {});

/// Root of hybrid_cls(mu) = alpha with one sample set reused at every mu.
LimitResult hybrid_cls_upper_limit(const CountingModel& model, const LimitRequest& req, const SampleSet& samples,
                                   Execution exec = {});
LimitResult hybrid_cls_upper_limit(const CountingModel& model, const LimitRequest& req,
                                   const Integrator& integrator, Execution exec = {});

/// Root of bayesian_marginal_tail(mu) = alpha with one sample set reused at every mu.
LimitResult bayesian_marginal_upper_limit(const CountingModel& model, const LimitRequest& req,
                                          const SampleSet& samples, Execution exec = {});
LimitResult bayesian_marginal_upper_limit(const CountingModel& model, const LimitRequest& req,
                                          const Integrator& integrator, Execution exec = {});

}  // namespace hclimits
