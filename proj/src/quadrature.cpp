#include "quadrature.hpp"

#include <array>
#include <cmath>

#include "hclimits/errors.hpp"

namespace hclimits::detail {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
// Gauss weights for the odd-indexed Kronrod nodes (the 7-point Gauss rule).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Panel {
  double kronrod;
  double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

double recurse(const std::function<double(double)>& f, double a, double b, const Panel& whole, double tol,
               int depth) {
  if (whole.error <= tol || depth <= 0 || b - a <= 1e-14 * std::fabs(b)) {
    if (depth <= 0 && whole.error > tol) throw ConvergenceError("adaptive quadrature exceeded its depth limit");
    return whole.kronrod;
  }
  const double mid = 0.5 * (a + b);
  const Panel left = gk15(f, a, mid);
  const Panel right = gk15(f, mid, b);
  return recurse(f, a, mid, left, 0.5 * tol, depth - 1) + recurse(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol,
                          int max_depth) {
  if (a == b) return 0.0;
  const Panel whole = gk15(f, a, b);
  // The first-panel estimate sets the absolute target.
  const double tol = std::max(abs_tol, rel_tol * std::fabs(whole.kronrod));
  return recurse(f, a, b, whole, tol, max_depth);
}

}  // namespace hclimits::detail
