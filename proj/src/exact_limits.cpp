#include "hclimits/exact_limits.hpp"

#include <cmath>

#include "hclimits/errors.hpp"
#include "hclimits/special_math.hpp"
#include "quadrature.hpp"
#include "root_finding.hpp"

namespace hclimits {

namespace {

struct Yields {
  double s;
  double b;
  std::int64_t n_obs;
};

Yields exact_yields(const CountingModel& model) {
  if (!model.all_responses_identity()) {
    throw InvalidModelError("exact limits require a model without systematic responses");
  }
  if (model.s_nom() == 0.0) throw DegenerateModelError("signal yield is zero; the signal strength is unidentified");
  return {model.s_nom(), model.b_nom_total(), model.n_obs()};
}

void require_mu(double mu) {
  if (!(mu >= 0.0)) throw DomainError("signal strength must be nonnegative");
}

// Upper end of the likelihood's effective support in mu: beyond it the
// remaining mass is below e^-60 of the total.
double support_end(const Yields& y) {
  const double n = static_cast<double>(y.n_obs);
  const double nu_max = n + 60.0 + 12.0 * std::sqrt(n + 1.0);
  return std::max((nu_max - y.b) / y.s, 1.0 / y.s);
}

double unnormalized_likelihood(const Yields& y, double mu) {
  return std::exp(log_poisson_pmf(y.n_obs, mu * y.s + y.b).value());
}

}  // namespace

void LimitRequest::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidModelError("alpha must lie in (0, 1)");
  if (!(rel_tol > 0.0)) throw InvalidModelError("rel_tol must be positive");
  if (max_iter <= 0) throw InvalidModelError("max_iter must be positive");
}

double cls_value(const CountingModel& model, double mu) {
  const Yields y = exact_yields(model);
  require_mu(mu);
  if (mu == 0.0) return 1.0;
  return std::exp(log_poisson_cdf(y.n_obs, mu * y.s + y.b) - log_poisson_cdf(y.n_obs, y.b));
}

LimitResult cls_upper_limit(const CountingModel& model, const LimitRequest& req) {
  exact_yields(model);
  return detail::solve_upper_limit([&](double mu) { return cls_value(model, mu); }, req);
}

LimitResult bayesian_upper_limit_closed_form(const CountingModel& model, const LimitRequest& req) {
  const Yields y = exact_yields(model);
  const double a = static_cast<double>(y.n_obs) + 1.0;
  const double denom = gamma_q(a, y.b);
  if (!(denom > 0.0)) throw DegenerateModelError("posterior normalization underflows");
  return detail::solve_upper_limit([&](double mu) { return gamma_q(a, mu * y.s + y.b) / denom; }, req);
}

double posterior_density(const CountingModel& model, double mu) {
  const Yields y = exact_yields(model);
  require_mu(mu);
  const double norm = gamma_q(static_cast<double>(y.n_obs) + 1.0, y.b) / y.s;
  return unnormalized_likelihood(y, mu) / norm;
}

namespace {

class QuadraturePosterior {
 public:
  explicit QuadraturePosterior(const CountingModel& model) : y_(exact_yields(model)), end_(support_end(y_)) {
    total_ = detail::integrate_adaptive([this](double m) { return unnormalized_likelihood(y_, m); }, 0.0, end_,
                                        1e-13);
    if (!(total_ > 0.0)) throw DegenerateModelError("posterior normalization underflows");
  }

  double cdf(double mu) const {
    require_mu(mu);
    if (mu >= end_) return 1.0;
    const double lower = detail::integrate_adaptive([this](double m) { return unnormalized_likelihood(y_, m); },
                                                    0.0, mu, 1e-13, 1e-16 * total_);
    return std::min(lower / total_, 1.0);
  }

 private:
  Yields y_;
  double end_;
  double total_ = 0.0;
};

}  // namespace

double posterior_cdf_quadrature(const CountingModel& model, double mu) { return QuadraturePosterior(model).cdf(mu); }

LimitResult bayesian_upper_limit_quadrature(const CountingModel& model, const LimitRequest& req) {
  const QuadraturePosterior posterior(model);
  return detail::solve_upper_limit([&](double mu) { return 1.0 - posterior.cdf(mu); }, req);
}

}  // namespace hclimits
