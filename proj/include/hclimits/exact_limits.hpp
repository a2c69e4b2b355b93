#pragma once

#include "hclimits/limits.hpp"
#include "hclimits/model.hpp"

namespace hclimits {

// Limits for models whose yields carry no systematic uncertainty. Every
// function here rejects models with a non-identity response
// (InvalidModelError) and models with s_nom = 0 (DegenerateModelError).

/// CLs(mu) = P(N <= N_obs; mu s + b) / P(N <= N_obs; b).
double cls_value(const CountingModel& model, double mu);

/// Solves CLs(mu_up) = alpha.
LimitResult cls_upper_limit(const CountingModel& model, const LimitRequest& req);

/// Solves Q(N_obs + 1, mu_up s + b) / Q(N_obs + 1, b) = alpha, the incomplete-gamma
/// form of the uniform-prior posterior tail.
LimitResult bayesian_upper_limit_closed_form(const CountingModel& model, const LimitRequest& req);

/// Uniform-prior posterior p(mu) = s Poisson(N_obs; mu s + b) / Q(N_obs + 1, b).
double posterior_density(const CountingModel& model, double mu);

/// Integral of the unnormalized likelihood over [0, mu], by adaptive quadrature,
/// divided by the same integral over [0, inf). Shares no code with gamma_q.
double posterior_cdf_quadrature(const CountingModel& model, double mu);

/// Bayesian limit from posterior_cdf_quadrature(mu_up) = 1 - alpha.
LimitResult bayesian_upper_limit_quadrature(const CountingModel& model, const LimitRequest& req);

}  // namespace hclimits
