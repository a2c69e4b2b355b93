#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hclimits/special_math.hpp"

namespace hclimits {

/// Multiplicative yield response h(eta).
class ResponseFunction {
 public:
  enum class Kind { identity, log_normal, linear };

  constexpr ResponseFunction() = default;

  static constexpr ResponseFunction identity() { return {}; }
  /// h(eta) = kappa^eta, kappa > 0.
  static ResponseFunction log_normal(double kappa);
  /// h(eta) = 1 + delta * eta.
  static ResponseFunction linear(double delta);

  Kind kind() const noexcept { return kind_; }
  /// kappa for log_normal, delta for linear, 0 for identity.
  double parameter() const noexcept { return param_; }
  bool is_identity() const noexcept { return kind_ == Kind::identity; }

  double operator()(double eta) const;

  friend bool operator==(const ResponseFunction&, const ResponseFunction&) = default;

 private:
  constexpr ResponseFunction(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_ = Kind::identity;
  double param_ = 0.0;
};

/// Constraint density g(eta) of one nuisance parameter.
class ConstraintPrior {
 public:
  enum class Kind { standard_normal, normal, log_normal };

  static constexpr ConstraintPrior standard_normal() { return ConstraintPrior(Kind::standard_normal, 0.0, 1.0); }
  static ConstraintPrior normal(double mean, double sd);
  /// eta = exp(mu + sigma z), z standard normal.
  static ConstraintPrior log_normal(double mu, double sigma);

  Kind kind() const noexcept { return kind_; }
  /// mean (normal) or mu (log_normal).
  double location() const noexcept { return location_; }
  /// sd (normal) or sigma (log_normal).
  double scale() const noexcept { return scale_; }
  bool is_gaussian() const noexcept { return kind_ != Kind::log_normal; }

  double log_density(double eta) const;
  /// Maps a standard-normal variate onto this prior.
  double from_standard_normal(double z) const;

  friend bool operator==(const ConstraintPrior&, const ConstraintPrior&) = default;

 private:
  constexpr ConstraintPrior(Kind kind, double location, double scale)
      : kind_(kind), location_(location), scale_(scale) {}

  Kind kind_;
  double location_;
  double scale_;
};

struct Nuisance {
  std::string name;
  ConstraintPrior prior;

  friend bool operator==(const Nuisance&, const Nuisance&) = default;
};

/// Row-major square matrix.
using Matrix = std::vector<std::vector<double>>;

/// Nuisance parameters, their priors, and the signal's response to them.
///
/// The correlation matrix, when given, spans the Gaussian-prior nuisances in
/// declaration order and must be symmetric positive-definite with unit diagonal.
class SystematicsModel {
 public:
  SystematicsModel() = default;
  SystematicsModel(std::vector<Nuisance> nuisances, std::map<std::string, ResponseFunction> signal_responses,
                   std::optional<Matrix> correlation = std::nullopt);

  const std::vector<Nuisance>& nuisances() const noexcept { return nuisances_; }
  const std::map<std::string, ResponseFunction>& signal_responses() const noexcept { return signal_responses_; }
  const std::optional<Matrix>& correlation() const noexcept { return correlation_; }

  std::size_t size() const noexcept { return nuisances_.size(); }
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Positions of the Gaussian-prior nuisances, in declaration order.
  const std::vector<std::size_t>& gaussian_indices() const noexcept { return gaussian_indices_; }
  /// Lower Cholesky factor of the correlation matrix; empty when uncorrelated.
  const Matrix& cholesky() const noexcept { return cholesky_; }

  /// Sum of log g(eta_j), or the joint Gaussian log-density when correlated.
  double log_prior_density(std::span<const double> eta) const;

  /// Maps independent standard normals z (one per nuisance) onto eta.
  std::vector<double> transform_standard_normals(std::span<const double> z) const;

  friend bool operator==(const SystematicsModel& a, const SystematicsModel& b) {
    return a.nuisances_ == b.nuisances_ && a.signal_responses_ == b.signal_responses_ &&
           a.correlation_ == b.correlation_;
  }

 private:
  std::vector<Nuisance> nuisances_;
  std::map<std::string, ResponseFunction> signal_responses_;
  std::optional<Matrix> correlation_;
  std::vector<std::size_t> gaussian_indices_;
  Matrix cholesky_;
  double log_det_correlation_ = 0.0;
};

struct BackgroundProcess {
  std::string name;
  double b_nom = 0.0;
  std::map<std::string, ResponseFunction> responses;

  friend bool operator==(const BackgroundProcess&, const BackgroundProcess&) = default;
};

/// Single-channel counting experiment: nominal yields, observed count, systematics.
/// Immutable after construction.
class CountingModel {
 public:
  CountingModel(double s_nom, std::vector<BackgroundProcess> backgrounds, std::int64_t n_obs,
                SystematicsModel systematics = {});

  double s_nom() const noexcept { return s_nom_; }
  const std::vector<BackgroundProcess>& backgrounds() const noexcept { return backgrounds_; }
  std::int64_t n_obs() const noexcept { return n_obs_; }
  const SystematicsModel& systematics() const noexcept { return systematics_; }

  double b_nom_total() const;
  /// True when no response (signal or background) depends on any nuisance.
  bool all_responses_identity() const noexcept;
  bool signal_responses_identity() const noexcept;

  /// Dense response tables indexed by nuisance position.
  const std::vector<ResponseFunction>& signal_response_table() const noexcept { return signal_table_; }
  const std::vector<std::vector<ResponseFunction>>& background_response_tables() const noexcept {
    return background_tables_;
  }

  friend bool operator==(const CountingModel& a, const CountingModel& b) {
    return a.s_nom_ == b.s_nom_ && a.backgrounds_ == b.backgrounds_ && a.n_obs_ == b.n_obs_ &&
           a.systematics_ == b.systematics_;
  }

 private:
  double s_nom_;
  std::vector<BackgroundProcess> backgrounds_;
  std::int64_t n_obs_;
  SystematicsModel systematics_;
  std::vector<ResponseFunction> signal_table_;
  std::vector<std::vector<ResponseFunction>> background_tables_;
};

/// s(eta) = s_nom * prod_j h_j(eta_j). Throws YieldNegativityError on a negative factor.
double signal_yield(const CountingModel& model, std::span<const double> eta);

/// b(eta) = sum_i b_i_nom * prod_j h_ij(eta_j).
double background_yield(const CountingModel& model, std::span<const double> eta);

/// ln[ Poisson(n; mu s(eta) + b(eta)) ] + ln g(eta).
/// A plain double: constraint densities can exceed one.
double log_full_likelihood(const CountingModel& model, double mu, std::span<const double> eta, std::int64_t n);

}  // namespace hclimits
