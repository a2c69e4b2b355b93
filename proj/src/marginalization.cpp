#include "hclimits/marginalization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hclimits/errors.hpp"
#include "hclimits/special_math.hpp"
#include "philox.hpp"
#include "reduction.hpp"
#include "root_finding.hpp"

namespace hclimits {

namespace {

constexpr std::size_t kMaxQuadraturePoints = 20'000'000;

// Per-sample yields, evaluated once per sample set.
struct YieldTable {
  std::vector<double> s;
  std::vector<double> b;
  std::vector<double> w;
};

YieldTable evaluate_yields(const CountingModel& model, const SampleSet& samples, Execution exec) {
  if (samples.samples.empty()) throw InvalidModelError("sample set is empty");
  const std::size_t n = samples.size();
  YieldTable t{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  detail::parallel_for(n, exec.threads, [&](std::size_t k) {
    const auto& sample = samples.samples[k];
    try {
      t.s[k] = signal_yield(model, sample.eta);
      t.b[k] = background_yield(model, sample.eta);
    } catch (const YieldNegativityError& e) {
      throw YieldNegativityError(std::string(e.what()) + " (sample " + std::to_string(k) + ")", e.eta(), k);
    }
    t.w[k] = sample.weight;
  });
  return t;
}

void require_mu(double mu) {
  if (!(mu >= 0.0)) throw DomainError("signal strength must be nonnegative");
}

// sum_k w_k f_k as a pairwise reduction, plus the per-sample values for error propagation.
struct Terms {
  std::vector<double> values;
  double weighted_sum = 0.0;
};

template <typename Fn>
Terms weighted_terms(const YieldTable& t, Execution exec, Fn&& f) {
  const std::size_t n = t.w.size();
  Terms out{std::vector<double>(n), 0.0};
  std::vector<double> weighted(n);
  detail::parallel_for(n, exec.threads, [&](std::size_t k) {
    out.values[k] = f(k);
    weighted[k] = t.w[k] * out.values[k];
  });
  out.weighted_sum = detail::pairwise_sum(weighted);
  return out;
}

double sample_mean(std::span<const double> v) { return detail::pairwise_sum(v) / static_cast<double>(v.size()); }

// Standard error of a Monte Carlo mean.
std::optional<double> mean_stderr(const SampleSet& samples, const Terms& terms) {
  const std::size_t n = terms.values.size();
  if (!samples.monte_carlo || n < 2) return std::nullopt;
  const double m = sample_mean(terms.values);
  std::vector<double> sq(n);
  for (std::size_t k = 0; k < n; ++k) sq[k] = (terms.values[k] - m) * (terms.values[k] - m);
  const double var = detail::pairwise_sum(sq) / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

// Delta-method standard error of numer/denom for equal-weight Monte Carlo means.
std::optional<double> ratio_stderr(const SampleSet& samples, const Terms& numer, const Terms& denom) {
  const std::size_t n = numer.values.size();
  if (!samples.monte_carlo || n < 2) return std::nullopt;
  const double a = sample_mean(numer.values);
  const double b = sample_mean(denom.values);
  const double r = a / b;
  std::vector<double> va(n), vb(n), cab(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double da = numer.values[k] - a;
    const double db = denom.values[k] - b;
    va[k] = da * da;
    vb[k] = db * db;
    cab[k] = da * db;
  }
  const double scale = 1.0 / static_cast<double>(n - 1);
  const double var_a = detail::pairwise_sum(va) * scale;
  const double var_b = detail::pairwise_sum(vb) * scale;
  const double cov = detail::pairwise_sum(cab) * scale;
  const double var_r = (var_a - 2.0 * r * cov + r * r * var_b) / (static_cast<double>(n) * b * b);
  return std::sqrt(std::max(var_r, 0.0));
}

Estimate ratio(const SampleSet& samples, const Terms& numer, const Terms& denom) {
  if (!(denom.weighted_sum > 0.0)) throw DegenerateModelError("marginal denominator is zero");
  return {numer.weighted_sum / denom.weighted_sum, ratio_stderr(samples, numer, denom)};
}

// Evaluators bound to a precomputed yield table.
class MarginalEvaluator {
 public:
  MarginalEvaluator(const CountingModel& model, const SampleSet& samples, Execution exec)
      : model_(model), samples_(samples), exec_(exec), table_(evaluate_yields(model, samples, exec)) {}

  Terms clsb_terms(double mu) const {
    return weighted_terms(table_, exec_, [&](std::size_t k) {
      return poisson_cdf(model_.n_obs(), mu * table_.s[k] + table_.b[k]);
    });
  }

  const Terms& clb_terms() const {
    if (!clb_) clb_ = clsb_terms(0.0);
    return *clb_;
  }

  Estimate hybrid_cls(double mu) const {
    require_mu(mu);
    if (mu == 0.0) return {1.0, samples_.monte_carlo && samples_.size() > 1 ? std::optional<double>(0.0) : std::nullopt};
    return ratio(samples_, clsb_terms(mu), clb_terms());
  }

  void require_positive_signal() const {
    for (std::size_t k = 0; k < table_.s.size(); ++k) {
      if (!(table_.s[k] > 0.0)) {
        throw DegenerateModelError("signal yield is zero at sample " + std::to_string(k) +
                                   "; the uniform-prior posterior is improper");
      }
    }
  }

  Terms bayes_terms(double mu) const {
    require_positive_signal();
    const double a = static_cast<double>(model_.n_obs()) + 1.0;
    return weighted_terms(table_, exec_,
                          [&](std::size_t k) { return gamma_q(a, mu * table_.s[k] + table_.b[k]) / table_.s[k]; });
  }

  const Terms& bayes_norm_terms() const {
    if (!bayes_norm_) bayes_norm_ = bayes_terms(0.0);
    return *bayes_norm_;
  }

  Estimate bayes_tail(double mu) const {
    require_mu(mu);
    if (mu == 0.0) return {1.0, samples_.monte_carlo && samples_.size() > 1 ? std::optional<double>(0.0) : std::nullopt};
    return ratio(samples_, bayes_terms(mu), bayes_norm_terms());
  }

  Estimate posterior_density(double mu) const {
    require_mu(mu);
    const Terms numer = weighted_terms(table_, exec_, [&](std::size_t k) {
      return std::exp(log_poisson_pmf(model_.n_obs(), mu * table_.s[k] + table_.b[k]).value());
    });
    return ratio(samples_, numer, bayes_norm_terms());
  }

  double total_signal_weight() const {
    std::vector<double> ws(table_.s.size());
    for (std::size_t k = 0; k < ws.size(); ++k) ws[k] = table_.w[k] * table_.s[k];
    return detail::pairwise_sum(ws);
  }

  const YieldTable& table() const { return table_; }

 private:
  const CountingModel& model_;
  const SampleSet& samples_;
  Execution exec_;
  YieldTable table_;
  mutable std::optional<Terms> clb_;
  mutable std::optional<Terms> bayes_norm_;
};

// Solves criterion(mu) = alpha and attaches Monte Carlo diagnostics.
template <typename Criterion>
LimitResult solve_with_diagnostics(const LimitRequest& req, const SampleSet& samples, Criterion&& criterion) {
  LimitResult r = detail::solve_upper_limit([&](double mu) { return criterion(mu).value; }, req);
  if (!samples.monte_carlo || samples.size() < 2) return r;
  r.criterion_stderr = criterion(r.mu_up).std_error;
  const double h = std::max(1e-5 * r.mu_up, 1e-9);
  const double lo = std::max(r.mu_up - h, 0.0);
  const double hi = r.mu_up + h;
  const double slope = (criterion(hi).value - criterion(lo).value) / (hi - lo);
  if (r.criterion_stderr && slope != 0.0) r.mu_up_stderr = *r.criterion_stderr / std::fabs(slope);
  return r;
}

}  // namespace

Integrator Integrator::monte_carlo(std::uint64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InvalidModelError("monte_carlo integrator needs at least one sample");
  return {Kind::monte_carlo, n_samples, seed, 0};
}

Integrator Integrator::gauss_hermite(int nodes_per_dim) {
  if (nodes_per_dim < 2 || nodes_per_dim > 64) throw InvalidModelError("gauss_hermite nodes_per_dim must lie in [2, 64]");
  return {Kind::gauss_hermite, 0, 0, nodes_per_dim};
}

QuadratureRule gauss_hermite_rule(int n) {
  if (n < 2 || n > 64) throw InvalidModelError("gauss_hermite nodes_per_dim must lie in [2, 64]");
  // Newton iteration on orthonormal physicists' Hermite polynomials (weight e^{-t^2}).
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  const int half = (n + 1) / 2;
  std::vector<double> t(n), w(n);
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * t[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * t[1];
    } else {
      z = 2.0 * z - t[i - 2];
    }
    double pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-15 * std::max(1.0, std::fabs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw ConvergenceError("Gauss-Hermite node iteration did not converge");
    t[i] = z;
    t[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
  // Rescale to the standard normal density; t[0] is the largest node.
  QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * t[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] / std::sqrt(std::numbers::pi);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

SampleSet draw_samples(const SystematicsModel& systematics, const Integrator& integrator) {
  const std::size_t dim = systematics.size();
  SampleSet set;
  if (dim == 0) {
    set.samples.push_back({{}, 1.0});
    return set;
  }
  if (integrator.kind() == Integrator::Kind::monte_carlo) {
    const std::uint64_t n = integrator.n_samples();
    set.monte_carlo = true;
    set.samples.resize(n);
    const double weight = 1.0 / static_cast<double>(n);
    std::vector<double> z(dim);
    for (std::uint64_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < dim; ++j) {
        z[j] = detail::standard_normal(integrator.seed(), k, static_cast<std::uint32_t>(j));
      }
      set.samples[k] = {systematics.transform_standard_normals(z), weight};
    }
    return set;
  }

  for (const auto& nuisance : systematics.nuisances()) {
    if (!nuisance.prior.is_gaussian()) {
      throw UnsupportedCombinationError("gauss_hermite quadrature does not support the log_normal prior of '" +
                                        nuisance.name + "'");
    }
  }
  const QuadratureRule rule = gauss_hermite_rule(integrator.nodes_per_dim());
  const std::size_t m = rule.nodes.size();
  std::size_t total = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (total > kMaxQuadraturePoints / m) throw UnsupportedCombinationError("tensor-product quadrature grid is too large");
    total *= m;
  }
  set.samples.resize(total);
  std::vector<std::size_t> index(dim, 0);
  std::vector<double> z(dim);
  for (std::size_t k = 0; k < total; ++k) {
    double weight = 1.0;
    for (std::size_t j = 0; j < dim; ++j) {
      z[j] = rule.nodes[index[j]];
      weight *= rule.weights[index[j]];
    }
    set.samples[k] = {systematics.transform_standard_normals(z), weight};
    // Odometer: the last nuisance varies fastest.
    for (std::size_t j = dim; j-- > 0;) {
      if (++index[j] < m) break;
      index[j] = 0;
    }
  }
  return set;
}

double marginal_likelihood(const CountingModel& model, double mu, std::int64_t n, const SampleSet& samples,
                           Execution exec) {
  require_mu(mu);
  const YieldTable table = evaluate_yields(model, samples, exec);
  return weighted_terms(table, exec, [&](std::size_t k) {
           return std::exp(log_poisson_pmf(n, mu * table.s[k] + table.b[k]).value());
         }).weighted_sum;
}

Estimate marginal_clsb(const CountingModel& model, double mu, const SampleSet& samples, Execution exec) {
  require_mu(mu);
  const MarginalEvaluator eval(model, samples, exec);
  const Terms terms = eval.clsb_terms(mu);
  return {terms.weighted_sum, mean_stderr(samples, terms)};
}

Estimate marginal_clb(const CountingModel& model, const SampleSet& samples, Execution exec) {
  return marginal_clsb(model, 0.0, samples, exec);
}

Estimate hybrid_cls(const CountingModel& model, double mu, const SampleSet& samples, Execution exec) {
  return MarginalEvaluator(model, samples, exec).hybrid_cls(mu);
}

Estimate bayesian_marginal_tail(const CountingModel& model, double mu, const SampleSet& samples, Execution exec) {
  return MarginalEvaluator(model, samples, exec).bayes_tail(mu);
}

Estimate marginal_posterior_density(const CountingModel& model, double mu, const SampleSet& samples,
                                    Execution exec) {
  return MarginalEvaluator(model, samples, exec).posterior_density(mu);
}

LimitResult hybrid_cls_upper_limit(const CountingModel& model, const LimitRequest& req, const SampleSet& samples,
                                   Execution exec) {
  req.validate();
  const MarginalEvaluator eval(model, samples, exec);
  if (!(eval.total_signal_weight() > 0.0)) {
    throw DegenerateModelError("signal yield is zero over the whole prior support; the signal strength is unidentified");
  }
  return solve_with_diagnostics(req, samples, [&](double mu) { return eval.hybrid_cls(mu); });
}

LimitResult hybrid_cls_upper_limit(const CountingModel& model, const LimitRequest& req, const Integrator& integrator,
                                   Execution exec) {
  return hybrid_cls_upper_limit(model, req, draw_samples(model.systematics(), integrator), exec);
}

LimitResult bayesian_marginal_upper_limit(const CountingModel& model, const LimitRequest& req,
                                          const SampleSet& samples, Execution exec) {
  req.validate();
  const MarginalEvaluator eval(model, samples, exec);
  eval.require_positive_signal();
  return solve_with_diagnostics(req, samples, [&](double mu) { return eval.bayes_tail(mu); });
}

LimitResult bayesian_marginal_upper_limit(const CountingModel& model, const LimitRequest& req,
                                          const Integrator& integrator, Execution exec) {
  return bayesian_marginal_upper_limit(model, req, draw_samples(model.systematics(), integrator), exec);
}

}  // namespace hclimits
