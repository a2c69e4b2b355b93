#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hclimits/errors.hpp"
#include "hclimits/model.hpp"

namespace hclimits {

/// Malformed or invalid model configuration. path() is a JSON pointer ("/backgrounds/0/nominal").
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : Error((path.empty() ? std::string("/") : path) + ": " + message), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Validates a model configuration document and builds the model.
///
/// Schema (unknown keys are rejected):
///   signal:      { nominal: number, responses?: { <nuisance>: response } }
///   backgrounds: [ { name: string, nominal: number, responses?: {...} } ]   (optional)
///   nuisances:   [ { name: string, prior: prior } ]                         (optional)
///   correlation: [[number]]                                                 (optional)
///   n_obs:       nonnegative integer
/// response: {kind: identity} | {kind: log_normal, kappa} | {kind: linear, delta}
/// prior:    {kind: standard_normal} | {kind: normal, mean, sd} | {kind: log_normal, mu, sigma}
CountingModel model_from_json(const nlohmann::json& doc);

/// Inverse of model_from_json.
nlohmann::ordered_json model_to_json(const CountingModel& model);

/// Reads and validates a configuration file.
CountingModel load_model(const std::filesystem::path& path);

/// Serializes with 17 significant digits per number, two-space indentation
/// (or compact when indent < 0), and a trailing newline when indented.
std::string format_json(const nlohmann::ordered_json& value, int indent = 2);

/// FNV-1a 64-bit hash of the compact canonical emission of the model, as 16 hex digits.
std::string config_hash(const CountingModel& model);

}  // namespace hclimits
