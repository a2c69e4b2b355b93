#include "hclimits/special_math.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "hclimits/errors.hpp"

namespace hclimits {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kRelTol = 1e-15;

// Lanczos coefficients for g = 607/128, n = 15 (Godfrey).
constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczosCoef = {
    0.99999999999999709182,     57.156235665862923517,      -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,    .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4,  .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,   -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4,  .36899182659531622704e-5,
};

double lanczos_log_gamma(double x) {
  // Reflection is not needed: callers only pass x > 0. For x < 0.5 shift up by one.
  if (x < 0.5) return lanczos_log_gamma(x + 1.0) - std::log(x);
  const double z = x - 1.0;
  double sum = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) sum += kLanczosCoef[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

constexpr std::size_t kFactorialTableSize = 1024;

const std::array<double, kFactorialTableSize>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kFactorialTableSize> t{};
    t[0] = 0.0;
    // Sum of logs stays within a few ulp for this range and is exact at n = 0, 1.
    long double acc = 0.0L;
    for (std::size_t k = 1; k < t.size(); ++k) {
      acc += std::log(static_cast<long double>(k));
      t[k] = static_cast<double>(acc);
    }
    return t;
  }();
  return table;
}

// stirlerr(n) = ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)], the Stirling-series remainder.
double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (n <= 15.0) {
    return log_factorial(static_cast<std::uint64_t>(n)) - (n + 0.5) * std::log(n) + n -
           0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double nn = n * n;
  if (n > 500.0) return (s0 - s1 / nn) / n;
  if (n > 80.0) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35.0) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x ln(x / m) + m - x, evaluated without cancellation near x = m.
double poisson_deviance(double x, double m) {
  if (std::fabs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = s + ej / (2 * j + 1);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

void require_count(std::int64_t n) {
  if (n < 0) throw DomainError("Poisson count must be nonnegative, got " + std::to_string(n));
}

void require_mean(double nu) {
  if (!(nu >= 0.0) || std::isinf(nu)) throw DomainError("Poisson mean must be finite and nonnegative");
}

// ln(x^a e^-x / Gamma(a)), the common prefactor of series and continued fraction.
double log_gamma_prefactor(double a, double x) { return a * std::log(x) - x - log_gamma(a); }

// P(a, x) by the power series. Valid (and well conditioned) for x < a + 1.
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kRelTol) return sum * std::exp(log_gamma_prefactor(a, x));
  }
  throw ConvergenceError("gamma_p series did not converge for a=" + std::to_string(a) + ", x=" + std::to_string(x));
}

// Q(a, x) by modified Lentz evaluation of the Legendre continued fraction. Valid for x >= a + 1.
double upper_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kRelTol) return std::exp(log_gamma_prefactor(a, x)) * h;
  }
  throw ConvergenceError("gamma_q continued fraction did not converge for a=" + std::to_string(a) +
                         ", x=" + std::to_string(x));
}

void require_gamma_args(double a, double x) {
  if (!(a > 0.0) || std::isinf(a)) throw DomainError("incomplete gamma requires a > 0");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0");
}

// Scaled Poisson CDF: returns {ln anchor, sum of pmf/anchor} so that cdf = exp(ln anchor) * sum.
struct ScaledCdf {
  double log_anchor;
  double sum;
};

ScaledCdf scaled_poisson_cdf(std::int64_t n_obs, double nu) {
  // Anchor on the largest term in 0..n_obs, then walk outward with exact ratios.
  const std::int64_t anchor =
      nu >= static_cast<double>(n_obs) ? n_obs : std::min(n_obs, static_cast<std::int64_t>(std::floor(nu)));
  const double log_anchor = log_poisson_pmf(anchor, nu).value();

  // Neumaier-compensated accumulation.
  double sum = 0.0;
  double comp = 0.0;
  auto add = [&](double v) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  };

  add(1.0);
  double term = 1.0;
  for (std::int64_t k = anchor; k > 0; --k) {
    term *= static_cast<double>(k) / nu;
    add(term);
    if (term < 1e-18 * sum) break;
  }
  term = 1.0;
  for (std::int64_t k = anchor + 1; k <= n_obs; ++k) {
    term *= nu / static_cast<double>(k);
    add(term);
    if (term < 1e-18 * sum) break;
  }
  return {log_anchor, sum + comp};
}

}  // namespace

LogProb::LogProb(double value) : value_(value) {
  if (std::isnan(value) || value > 0.0) throw DomainError("log-probability must lie in [-inf, 0]");
}

double LogProb::prob() const { return std::exp(value_); }

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < static_cast<double>(kFactorialTableSize) && x == std::floor(x)) {
    return log_factorial_table()[static_cast<std::size_t>(x) - 1];
  }
  return lanczos_log_gamma(x);
}

double log_factorial(std::uint64_t n) {
  if (n < kFactorialTableSize) return log_factorial_table()[n];
  return lanczos_log_gamma(static_cast<double>(n) + 1.0);
}

LogProb log_poisson_pmf(std::int64_t n, double nu) {
  require_count(n);
  require_mean(nu);
  if (nu == 0.0) return n == 0 ? LogProb::certain() : LogProb::impossible();
  if (n == 0) return LogProb(-nu);
  // Saddle-point form: ln(nu^n e^-nu / n!) = -stirlerr(n) - D(n, nu) - ln sqrt(2 pi n).
  // Avoids the cancellation between n ln nu, nu and ln n! at large n.
  const double x = static_cast<double>(n);
  const double v = -stirling_error(x) - poisson_deviance(x, nu) - 0.5 * std::log(2.0 * std::numbers::pi * x);
  // Rounding can push ln P(0; tiny nu) a hair above zero.
  return LogProb(std::min(v, 0.0));
}

double log_poisson_cdf(std::int64_t n_obs, double nu) {
  require_count(n_obs);
  require_mean(nu);
  if (nu == 0.0) return 0.0;
  const auto [log_anchor, sum] = scaled_poisson_cdf(n_obs, nu);
  return std::min(log_anchor + std::log(sum), 0.0);
}

double poisson_cdf(std::int64_t n_obs, double nu) {
  require_count(n_obs);
  require_mean(nu);
  if (nu == 0.0) return 1.0;
  const auto [log_anchor, sum] = scaled_poisson_cdf(n_obs, nu);
  return std::min(std::exp(log_anchor) * sum, 1.0);
}

double gamma_p(double a, double x) {
  require_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  require_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_continued_fraction(a, x);
}

}  // namespace hclimits
