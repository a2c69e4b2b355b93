#pragma once

#include <functional>

namespace hclimits::detail {

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b]. Subdivides
/// until each panel's Kronrod-Gauss difference is below
/// max(abs_tol, rel_tol * |integral|) scaled by the panel's share of [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                          double abs_tol = 0.0, int max_depth = 50);

}  // namespace hclimits::detail
