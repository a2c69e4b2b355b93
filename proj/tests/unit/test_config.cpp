#include <doctest.h>

#include <random>

#include "hclimits/config.hpp"

using namespace hclimits;
using nlohmann::json;

namespace {

std::string error_path(const json& doc) {
  try {
    model_from_json(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

json full_config() {
  return json::parse(R"({
    "signal": {"nominal": 1.25, "responses": {"lumi": {"kind": "log_normal", "kappa": 1.02}}},
    "backgrounds": [
      {"name": "ttbar", "nominal": 2.5, "responses": {"jes": {"kind": "linear", "delta": 0.05}}},
      {"name": "fakes", "nominal": 0.4, "responses": {"ff": {"kind": "log_normal", "kappa": 1.5}}}
    ],
    "nuisances": [
      {"name": "lumi", "prior": {"kind": "standard_normal"}},
      {"name": "jes", "prior": {"kind": "normal", "mean": 0.0, "sd": 1.0}},
      {"name": "ff", "prior": {"kind": "log_normal", "mu": 0.0, "sigma": 0.3}}
    ],
    "correlation": [[1.0, 0.25], [0.25, 1.0]],
    "n_obs": 4
  })");
}

}  // namespace

TEST_CASE("parses a full configuration") {
  const CountingModel m = model_from_json(full_config());
  CHECK(m.s_nom() == 1.25);
  CHECK(m.n_obs() == 4);
  REQUIRE(m.backgrounds().size() == 2);
  CHECK(m.backgrounds()[1].name == "fakes");
  CHECK(m.systematics().size() == 3);
  CHECK(m.systematics().correlation().has_value());
  CHECK(m.systematics().nuisances()[2].prior.kind() == ConstraintPrior::Kind::log_normal);
}

TEST_CASE("unknown keys are rejected with their path") {
  json doc = full_config();
  doc["signall"] = 1;
  CHECK(error_path(doc) == "/signall");

  doc = full_config();
  doc["backgrounds"][1]["nomnal"] = 3.0;
  CHECK(error_path(doc) == "/backgrounds/1/nomnal");

  doc = full_config();
  doc["nuisances"][1]["prior"]["width"] = 3.0;
  CHECK(error_path(doc) == "/nuisances/1/prior/width");

  doc = full_config();
  doc["signal"]["responses"]["lumi"]["sigma"] = 0.1;
  CHECK(error_path(doc) == "/signal/responses/lumi/sigma");
}

TEST_CASE("schema violations") {
  json doc = full_config();
  doc.erase("n_obs");
  CHECK(error_path(doc) == "/n_obs");

  doc = full_config();
  doc["n_obs"] = 2.5;
  CHECK(error_path(doc) == "/n_obs");

  doc = full_config();
  doc["n_obs"] = -1;
  CHECK(error_path(doc) == "/n_obs");

  doc = full_config();
  doc["signal"]["nominal"] = "one";
  CHECK(error_path(doc) == "/signal/nominal");

  doc = full_config();
  doc["backgrounds"][0]["responses"]["nope"] = {{"kind", "identity"}};
  CHECK(error_path(doc) == "/backgrounds/0/responses/nope");

  doc = full_config();
  doc["nuisances"][0]["prior"]["kind"] = "cauchy";
  CHECK(error_path(doc) == "/nuisances/0/prior/kind");

  doc = full_config();
  doc["correlation"] = json::parse("[[1.0, 0.99], [0.5, 1.0]]");
  CHECK(error_path(doc) == "/correlation");

  doc = full_config();
  doc["nuisances"][2]["name"] = "lumi";
  CHECK(error_path(doc) == "/nuisances/2/name");

  doc = full_config();
  doc["signal"]["nominal"] = 0.0;
  doc["backgrounds"] = json::array();
  CHECK(error_path(doc) == "");

  doc = full_config();
  doc["backgrounds"][0]["nominal"] = -1.0;
  CHECK(error_path(doc) == "/backgrounds/0/nominal");

  doc = full_config();
  doc["backgrounds"][0]["responses"]["jes"]["delta"] = nullptr;
  CHECK(error_path(doc) == "/backgrounds/0/responses/jes/delta");
}

TEST_CASE("emit then parse gives an identical model") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Nuisance> nuisances;
    const int dim = static_cast<int>(rng() % 4);
    for (int j = 0; j < dim; ++j) {
      const auto kind = rng() % 3;
      const ConstraintPrior p = kind == 0   ? ConstraintPrior::standard_normal()
                                : kind == 1 ? ConstraintPrior::normal(u(rng) - 2.5, 0.1 + u(rng))
                                            : ConstraintPrior::log_normal(u(rng) - 2.5, 0.01 + u(rng) / 7.0);
      nuisances.push_back({"n" + std::to_string(j), p});
    }
    auto random_responses = [&] {
      std::map<std::string, ResponseFunction> r;
      for (int j = 0; j < dim; ++j) {
        switch (rng() % 4) {
          case 0:
            break;
          case 1:
            r.emplace("n" + std::to_string(j), ResponseFunction::identity());
            break;
          case 2:
            r.emplace("n" + std::to_string(j), ResponseFunction::log_normal(0.5 + u(rng)));
            break;
          default:
            r.emplace("n" + std::to_string(j), ResponseFunction::linear(u(rng) / 17.0));
        }
      }
      return r;
    };
    std::vector<BackgroundProcess> bkgs;
    const int nb = static_cast<int>(rng() % 4);
    for (int i = 0; i < nb; ++i) bkgs.push_back({"bkg/" + std::to_string(i) + "~x", u(rng), random_responses()});
    std::optional<Matrix> corr;
    std::size_t gaussian = 0;
    for (const auto& n : nuisances) gaussian += n.prior.is_gaussian() ? 1 : 0;
    if (gaussian == 2 && rng() % 2) {
      const double rho = u(rng) / 5.0 - 0.5;
      corr = Matrix{{1.0, rho}, {rho, 1.0}};
    }
    const CountingModel original(0.001 + u(rng), bkgs, static_cast<std::int64_t>(rng() % 100),
                                 SystematicsModel(nuisances, random_responses(), corr));
    const std::string text = format_json(model_to_json(original));
    const CountingModel parsed = model_from_json(json::parse(text));
    CHECK(parsed == original);
    CHECK(config_hash(parsed) == config_hash(original));
  }
}

TEST_CASE("format_json prints 17 significant digits") {
  nlohmann::ordered_json j;
  j["x"] = 0.1;
  j["n"] = 3;
  j["list"] = {1.0 / 3.0};
  CHECK(format_json(j) == "{\n  \"x\": 0.10000000000000001,\n  \"n\": 3,\n  \"list\": [\n    0.33333333333333331\n  ]\n}\n");
  CHECK(format_json(j, -1) == "{\"x\":0.10000000000000001,\"n\":3,\"list\":[0.33333333333333331]}");
}

TEST_CASE("config hash changes with the model") {
  const CountingModel a = model_from_json(full_config());
  json doc = full_config();
  doc["n_obs"] = 5;
  CHECK(config_hash(a) != config_hash(model_from_json(doc)));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("load_model reports unreadable files") {
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ConfigError);
  CHECK_NOTHROW(load_model(HCLIMITS_TEST_DATA "/background_systematics.json"));
}
