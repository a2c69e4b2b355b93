#include "root_finding.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hclimits/errors.hpp"

namespace hclimits::detail {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kMaxMu = 18446744073709551616.0;  // 2^64
}  // namespace

LimitResult solve_upper_limit(const std::function<double(double)>& criterion, const LimitRequest& req) {
  req.validate();
  const double alpha = req.alpha;
  auto g = [&](double mu) { return criterion(mu) - alpha; };

  double lo = 0.0;
  double g_lo = g(lo);
  if (!(g_lo > 0.0)) throw SolverError("criterion at mu = 0 does not exceed alpha", 0.0, 0.0, 0);
  double hi = 1.0;
  double g_hi = g(hi);
  while (g_hi >= 0.0) {
    lo = hi;
    g_lo = g_hi;
    hi *= 2.0;
    if (hi > kMaxMu) throw SolverError("could not bracket the upper limit below 2^64", lo, hi, 0);
    g_hi = g(hi);
  }
  if (std::isnan(g_hi) || std::isnan(g_lo)) throw SolverError("criterion evaluated to NaN", lo, hi, 0);

  // Brent: b is the best estimate, a the previous one, c the contrapoint.
  double a = lo, b = hi, c = lo;
  double fa = g_lo, fb = g_hi, fc = g_lo;
  double d = b - a, e = d;
  const double crit_tol = 10.0 * req.rel_tol * alpha;
  bool tight = false;

  for (int iter = 1; iter <= req.max_iter; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double floor_tol = 2.0 * kEps * std::fabs(b) + std::numeric_limits<double>::min();
    const double tol = tight ? floor_tol : std::max(0.5 * req.rel_tol * std::fabs(b), floor_tol);
    const double m = 0.5 * (c - b);
    const bool crit_ok = std::fabs(fb) <= crit_tol;
    if (fb == 0.0 || (std::fabs(m) <= tol && crit_ok) || std::fabs(m) <= floor_tol) {
      LimitResult r;
      r.mu_up = b;
      r.criterion_at_solution = fb + alpha;
      r.iterations = iter;
      r.bracket = {std::min(b, c), std::max(b, c)};
      return r;
    }
    if (std::fabs(m) <= tol) tight = true;

    if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = g(b);
    if (std::isnan(fb)) throw SolverError("criterion evaluated to NaN", std::min(b, c), std::max(b, c), iter);
  }
  throw SolverError("upper-limit solve did not converge within " + std::to_string(req.max_iter) + " iterations",
                    std::min(b, c), std::max(b, c), req.max_iter);
}

}  // namespace hclimits::detail
