#pragma once

#include <functional>

#include "hclimits/limits.hpp"

namespace hclimits::detail {

/// Finds mu >= 0 with criterion(mu) = alpha for a criterion that equals 1 at
/// mu = 0 and decreases to 0.
///
/// Brackets by doubling mu_hi from 1, then runs Brent's method (bisection
/// with inverse-quadratic/secant steps that fall back to bisection when they
/// leave the bracket). Stops when the bracket is narrower than
/// rel_tol * mu and |criterion - alpha| <= 10 * rel_tol * alpha, or when the
/// bracket reaches floating-point resolution.
LimitResult solve_upper_limit(const std::function<double(double)>& criterion, const LimitRequest& req);

}  // namespace hclimits::detail
