#include "hclimits/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

#include "hclimits/errors.hpp"

namespace hclimits {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2 pi)

std::string describe_eta(std::span<const double> eta) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < eta.size(); ++i) os << (i ? ", " : "") << eta[i];
  os << ']';
  return os.str();
}

void require_dimension(const CountingModel& model, std::span<const double> eta) {
  if (eta.size() != model.systematics().size()) {
    throw DomainError("nuisance vector has " + std::to_string(eta.size()) + " entries, model declares " +
                      std::to_string(model.systematics().size()));
  }
}

double scaled_yield(double nominal, const std::vector<ResponseFunction>& table, std::span<const double> eta,
                    std::string_view what) {
  double y = nominal;
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (table[j].is_identity()) continue;
    const double f = table[j](eta[j]);
    if (f < 0.0 || std::isnan(f)) {
      throw YieldNegativityError(std::string(what) + " yield is negative at eta = " + describe_eta(eta),
                                 std::vector<double>(eta.begin(), eta.end()));
    }
    y *= f;
  }
  return y;
}

Matrix cholesky_factor(const Matrix& m) {
  const std::size_t n = m.size();
  Matrix l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = m[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 0.0)) throw InvalidModelError("correlation matrix is not positive-definite");
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  return l;
}

// Sorted summation: the result does not depend on process order.
double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

}  // namespace

ResponseFunction ResponseFunction::log_normal(double kappa) {
  if (!(kappa > 0.0) || std::isinf(kappa)) throw InvalidModelError("log_normal response requires kappa > 0");
  return {Kind::log_normal, kappa};
}

ResponseFunction ResponseFunction::linear(double delta) {
  if (!std::isfinite(delta)) throw InvalidModelError("linear response requires a finite delta");
  return {Kind::linear, delta};
}

double ResponseFunction::operator()(double eta) const {
  switch (kind_) {
    case Kind::identity:
      return 1.0;
    case Kind::log_normal:
      return std::pow(param_, eta);
    case Kind::linear:
      return 1.0 + param_ * eta;
  }
  return 1.0;
}

ConstraintPrior ConstraintPrior::normal(double mean, double sd) {
  if (!std::isfinite(mean)) throw InvalidModelError("normal prior requires a finite mean");
  if (!(sd > 0.0) || std::isinf(sd)) throw InvalidModelError("normal prior requires sd > 0");
  return {Kind::normal, mean, sd};
}

ConstraintPrior ConstraintPrior::log_normal(double mu, double sigma) {
  if (!std::isfinite(mu)) throw InvalidModelError("log_normal prior requires a finite mu");
  if (!(sigma > 0.0) || std::isinf(sigma)) throw InvalidModelError("log_normal prior requires sigma > 0");
  return {Kind::log_normal, mu, sigma};
}

double ConstraintPrior::log_density(double eta) const {
  switch (kind_) {
    case Kind::standard_normal:
    case Kind::normal: {
      const double z = (eta - location_) / scale_;
      return -0.5 * z * z - kLogSqrt2Pi - std::log(scale_);
    }
    case Kind::log_normal: {
      if (!(eta > 0.0)) return -std::numeric_limits<double>::infinity();
      const double z = (std::log(eta) - location_) / scale_;
      return -0.5 * z * z - kLogSqrt2Pi - std::log(scale_) - std::log(eta);
    }
  }
  return 0.0;
}

double ConstraintPrior::from_standard_normal(double z) const {
  switch (kind_) {
    case Kind::standard_normal:
      return z;
    case Kind::normal:
      return location_ + scale_ * z;
    case Kind::log_normal:
      return std::exp(location_ + scale_ * z);
  }
  return z;
}

SystematicsModel::SystematicsModel(std::vector<Nuisance> nuisances,
                                   std::map<std::string, ResponseFunction> signal_responses,
                                   std::optional<Matrix> correlation)
    : nuisances_(std::move(nuisances)),
      signal_responses_(std::move(signal_responses)),
      correlation_(std::move(correlation)) {
  std::set<std::string> seen;
  for (std::size_t j = 0; j < nuisances_.size(); ++j) {
    const auto& n = nuisances_[j];
    if (n.name.empty()) throw InvalidModelError("nuisance names must be nonempty");
    if (!seen.insert(n.name).second) throw InvalidModelError("duplicate nuisance name '" + n.name + "'");
    if (n.prior.is_gaussian()) gaussian_indices_.push_back(j);
  }
  for (const auto& [name, response] : signal_responses_) {
    if (!seen.contains(name)) throw InvalidModelError("signal response references unknown nuisance '" + name + "'");
  }
  if (correlation_) {
    const Matrix& c = *correlation_;
    const std::size_t g = gaussian_indices_.size();
    if (c.size() != g) {
      throw InvalidModelError("correlation matrix must be " + std::to_string(g) + "x" + std::to_string(g) +
                              " (one row per Gaussian-prior nuisance)");
    }
    for (std::size_t i = 0; i < g; ++i) {
      if (c[i].size() != g) throw InvalidModelError("correlation matrix must be square");
      if (c[i][i] != 1.0) throw InvalidModelError("correlation matrix must have unit diagonal");
      for (std::size_t k = 0; k < g; ++k) {
        if (!std::isfinite(c[i][k])) throw InvalidModelError("correlation matrix entries must be finite");
        if (c[i][k] != c[k][i]) throw InvalidModelError("correlation matrix must be symmetric");
      }
    }
    cholesky_ = cholesky_factor(c);
    for (std::size_t i = 0; i < g; ++i) log_det_correlation_ += 2.0 * std::log(cholesky_[i][i]);
  }
}

std::optional<std::size_t> SystematicsModel::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < nuisances_.size(); ++j) {
    if (nuisances_[j].name == name) return j;
  }
  return std::nullopt;
}

double SystematicsModel::log_prior_density(std::span<const double> eta) const {
  if (eta.size() != nuisances_.size()) throw DomainError("nuisance vector has the wrong dimension");
  double total = 0.0;
  if (cholesky_.empty()) {
    for (std::size_t j = 0; j < nuisances_.size(); ++j) total += nuisances_[j].prior.log_density(eta[j]);
    return total;
  }
  for (std::size_t j = 0; j < nuisances_.size(); ++j) {
    if (!nuisances_[j].prior.is_gaussian()) total += nuisances_[j].prior.log_density(eta[j]);
  }
  // Joint Gaussian: standardize, then solve L y = z so that z^T R^-1 z = |y|^2.
  const std::size_t g = gaussian_indices_.size();
  std::vector<double> y(g);
  double quad = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const auto& prior = nuisances_[gaussian_indices_[i]].prior;
    const double z = (eta[gaussian_indices_[i]] - prior.location()) / prior.scale();
    double v = z;
    for (std::size_t k = 0; k < i; ++k) v -= cholesky_[i][k] * y[k];
    y[i] = v / cholesky_[i][i];
    quad += y[i] * y[i];
    total -= kLogSqrt2Pi + std::log(prior.scale());
  }
  return total - 0.5 * quad - 0.5 * log_det_correlation_;
}

std::vector<double> SystematicsModel::transform_standard_normals(std::span<const double> z) const {
  if (z.size() != nuisances_.size()) throw DomainError("standard-normal vector has the wrong dimension");
  std::vector<double> eta(z.size());
  if (cholesky_.empty()) {
    for (std::size_t j = 0; j < z.size(); ++j) eta[j] = nuisances_[j].prior.from_standard_normal(z[j]);
    return eta;
  }
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!nuisances_[j].prior.is_gaussian()) eta[j] = nuisances_[j].prior.from_standard_normal(z[j]);
  }
  const std::size_t g = gaussian_indices_.size();
  for (std::size_t i = 0; i < g; ++i) {
    double correlated = 0.0;
    for (std::size_t k = 0; k <= i; ++k) correlated += cholesky_[i][k] * z[gaussian_indices_[k]];
    eta[gaussian_indices_[i]] = nuisances_[gaussian_indices_[i]].prior.from_standard_normal(correlated);
  }
  return eta;
}

CountingModel::CountingModel(double s_nom, std::vector<BackgroundProcess> backgrounds, std::int64_t n_obs,
                             SystematicsModel systematics)
    : s_nom_(s_nom), backgrounds_(std::move(backgrounds)), n_obs_(n_obs), systematics_(std::move(systematics)) {
  if (!(s_nom_ >= 0.0) || std::isinf(s_nom_)) throw InvalidModelError("signal nominal yield must be finite and >= 0");
  if (n_obs_ < 0) throw InvalidModelError("observed count must be nonnegative");
  std::set<std::string> names;
  double b_total = 0.0;
  for (const auto& bkg : backgrounds_) {
    if (bkg.name.empty()) throw InvalidModelError("background names must be nonempty");
    if (!names.insert(bkg.name).second) throw InvalidModelError("duplicate background name '" + bkg.name + "'");
    if (!(bkg.b_nom >= 0.0) || std::isinf(bkg.b_nom)) {
      throw InvalidModelError("background '" + bkg.name + "' nominal yield must be finite and >= 0");
    }
    b_total += bkg.b_nom;
  }
  if (!(s_nom_ > 0.0 || b_total > 0.0)) throw InvalidModelError("signal and total background yields are both zero");

  const std::size_t dim = systematics_.size();
  signal_table_.assign(dim, ResponseFunction::identity());
  for (const auto& [name, response] : systematics_.signal_responses()) {
    signal_table_[*systematics_.index_of(name)] = response;
  }
  for (const auto& bkg : backgrounds_) {
    std::vector<ResponseFunction> table(dim, ResponseFunction::identity());
    for (const auto& [name, response] : bkg.responses) {
      const auto j = systematics_.index_of(name);
      if (!j) throw InvalidModelError("background '" + bkg.name + "' references unknown nuisance '" + name + "'");
      table[*j] = response;
    }
    background_tables_.push_back(std::move(table));
  }
}

double CountingModel::b_nom_total() const {
  std::vector<double> terms;
  terms.reserve(backgrounds_.size());
  for (const auto& bkg : backgrounds_) terms.push_back(bkg.b_nom);
  return canonical_sum(std::move(terms));
}

bool CountingModel::signal_responses_identity() const noexcept {
  for (const auto& r : signal_table_) {
    if (!r.is_identity()) return false;
  }
  return true;
}

bool CountingModel::all_responses_identity() const noexcept {
  if (!signal_responses_identity()) return false;
  for (const auto& table : background_tables_) {
    for (const auto& r : table) {
      if (!r.is_identity()) return false;
    }
  }
  return true;
}

double signal_yield(const CountingModel& model, std::span<const double> eta) {
  require_dimension(model, eta);
  return scaled_yield(model.s_nom(), model.signal_response_table(), eta, "signal");
}

double background_yield(const CountingModel& model, std::span<const double> eta) {
  require_dimension(model, eta);
  const auto& tables = model.background_response_tables();
  std::vector<double> terms;
  terms.reserve(tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    terms.push_back(scaled_yield(model.backgrounds()[i].b_nom, tables[i], eta, model.backgrounds()[i].name));
  }
  return canonical_sum(std::move(terms));
}

double log_full_likelihood(const CountingModel& model, double mu, std::span<const double> eta, std::int64_t n) {
  if (!(mu >= 0.0)) throw DomainError("signal strength must be nonnegative");
  const double nu = mu * signal_yield(model, eta) + background_yield(model, eta);
  return log_poisson_pmf(n, nu).value() + model.systematics().log_prior_density(eta);
}

}  // namespace hclimits
