#include "hclimits/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace hclimits {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string child(const std::string& path, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') {
      escaped += "~0";
    } else if (c == '/') {
      escaped += "~1";
    } else {
      escaped += c;
    }
  }
  return path + "/" + escaped;
}

std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const char* type_name(const json& v) { return v.type_name(); }

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, std::string("expected an object, got ") + type_name(v));
}

void reject_unknown_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(child(path, key), "unknown key '" + key + "'");
  }
}

const json& require_key(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(child(path, key), "missing required key");
  return *it;
}

double require_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, std::string("expected a number, got ") + type_name(v));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "number must be finite");
  return d;
}

std::string require_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, std::string("expected a string, got ") + type_name(v));
  return v.get<std::string>();
}

ResponseFunction parse_response(const json& v, const std::string& path) {
  require_object(v, path);
  const std::string kind = require_string(require_key(v, path, "kind"), child(path, "kind"));
  try {
    if (kind == "identity") {
      reject_unknown_keys(v, path, {"kind"});
      return ResponseFunction::identity();
    }
    if (kind == "log_normal") {
      reject_unknown_keys(v, path, {"kind", "kappa"});
      return ResponseFunction::log_normal(require_number(require_key(v, path, "kappa"), child(path, "kappa")));
    }
    if (kind == "linear") {
      reject_unknown_keys(v, path, {"kind", "delta"});
      return ResponseFunction::linear(require_number(require_key(v, path, "delta"), child(path, "delta")));
    }
  } catch (const InvalidModelError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(child(path, "kind"), "unknown response kind '" + kind + "' (identity, log_normal, linear)");
}

std::map<std::string, ResponseFunction> parse_responses(const json& parent, const std::string& path) {
  std::map<std::string, ResponseFunction> out;
  const auto it = parent.find("responses");
  if (it == parent.end()) return out;
  const std::string rpath = child(path, "responses");
  require_object(*it, rpath);
  for (const auto& [name, response] : it->items()) out.emplace(name, parse_response(response, child(rpath, name)));
  return out;
}

ConstraintPrior parse_prior(const json& v, const std::string& path) {
  require_object(v, path);
  const std::string kind = require_string(require_key(v, path, "kind"), child(path, "kind"));
  try {
    if (kind == "standard_normal") {
      reject_unknown_keys(v, path, {"kind"});
      return ConstraintPrior::standard_normal();
    }
    if (kind == "normal") {
      reject_unknown_keys(v, path, {"kind", "mean", "sd"});
      return ConstraintPrior::normal(require_number(require_key(v, path, "mean"), child(path, "mean")),
                                     require_number(require_key(v, path, "sd"), child(path, "sd")));
    }
    if (kind == "log_normal") {
      reject_unknown_keys(v, path, {"kind", "mu", "sigma"});
      return ConstraintPrior::log_normal(require_number(require_key(v, path, "mu"), child(path, "mu")),
                                         require_number(require_key(v, path, "sigma"), child(path, "sigma")));
    }
  } catch (const InvalidModelError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(child(path, "kind"),
                    "unknown prior kind '" + kind + "' (standard_normal, normal, log_normal)");
}

ordered_json response_to_json(const ResponseFunction& r) {
  switch (r.kind()) {
    case ResponseFunction::Kind::identity:
      return {{"kind", "identity"}};
    case ResponseFunction::Kind::log_normal:
      return {{"kind", "log_normal"}, {"kappa", r.parameter()}};
    case ResponseFunction::Kind::linear:
      return {{"kind", "linear"}, {"delta", r.parameter()}};
  }
  return {};
}

ordered_json responses_to_json(const std::map<std::string, ResponseFunction>& responses) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, r] : responses) out[name] = response_to_json(r);
  return out;
}

ordered_json prior_to_json(const ConstraintPrior& p) {
  switch (p.kind()) {
    case ConstraintPrior::Kind::standard_normal:
      return {{"kind", "standard_normal"}};
    case ConstraintPrior::Kind::normal:
      return {{"kind", "normal"}, {"mean", p.location()}, {"sd", p.scale()}};
    case ConstraintPrior::Kind::log_normal:
      return {{"kind", "log_normal"}, {"mu", p.location()}, {"sigma", p.scale()}};
  }
  return {};
}

std::string format_double(double d) {
  if (!std::isfinite(d)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

void write_json(std::ostringstream& os, const ordered_json& v, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (pretty) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case ordered_json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        os << ordered_json(key).dump() << (pretty ? ": " : ":");
        write_json(os, value, indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case ordered_json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      os << '[';
      bool first = true;
      for (const auto& value : v) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        write_json(os, value, indent, depth + 1);
      }
      newline(depth);
      os << ']';
      return;
    }
    case ordered_json::value_t::number_float:
      os << format_double(v.get<double>());
      return;
    default:
      os << v.dump();
      return;
  }
}

}  // namespace

CountingModel model_from_json(const json& doc) {
  const std::string root;
  require_object(doc, root);
  reject_unknown_keys(doc, root, {"signal", "backgrounds", "nuisances", "correlation", "n_obs"});

  const json& signal = require_key(doc, root, "signal");
  const std::string spath = child(root, "signal");
  require_object(signal, spath);
  reject_unknown_keys(signal, spath, {"nominal", "responses"});
  const double s_nom = require_number(require_key(signal, spath, "nominal"), child(spath, "nominal"));
  if (s_nom < 0.0) throw ConfigError(child(spath, "nominal"), "nominal yield must be >= 0");
  auto signal_responses = parse_responses(signal, spath);

  const json& n_obs_v = require_key(doc, root, "n_obs");
  if (!n_obs_v.is_number_integer()) throw ConfigError("/n_obs", "expected an integer");
  const auto n_obs = n_obs_v.get<std::int64_t>();
  if (n_obs < 0) throw ConfigError("/n_obs", "observed count must be nonnegative");

  std::vector<Nuisance> nuisances;
  if (const auto it = doc.find("nuisances"); it != doc.end()) {
    const std::string npath = child(root, "nuisances");
    if (!it->is_array()) throw ConfigError(npath, "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& entry = (*it)[i];
      const std::string epath = child(npath, i);
      require_object(entry, epath);
      reject_unknown_keys(entry, epath, {"name", "prior"});
      std::string name = require_string(require_key(entry, epath, "name"), child(epath, "name"));
      for (const auto& n : nuisances) {
        if (n.name == name) throw ConfigError(child(epath, "name"), "duplicate nuisance name '" + name + "'");
      }
      nuisances.push_back({std::move(name), parse_prior(require_key(entry, epath, "prior"), child(epath, "prior"))});
    }
  }

  std::vector<BackgroundProcess> backgrounds;
  if (const auto it = doc.find("backgrounds"); it != doc.end()) {
    const std::string bpath = child(root, "backgrounds");
    if (!it->is_array()) throw ConfigError(bpath, "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& entry = (*it)[i];
      const std::string epath = child(bpath, i);
      require_object(entry, epath);
      reject_unknown_keys(entry, epath, {"name", "nominal", "responses"});
      BackgroundProcess bkg;
      bkg.name = require_string(require_key(entry, epath, "name"), child(epath, "name"));
      for (const auto& other : backgrounds) {
        if (other.name == bkg.name) throw ConfigError(child(epath, "name"), "duplicate background name '" + bkg.name + "'");
      }
      bkg.b_nom = require_number(require_key(entry, epath, "nominal"), child(epath, "nominal"));
      if (bkg.b_nom < 0.0) throw ConfigError(child(epath, "nominal"), "nominal yield must be >= 0");
      bkg.responses = parse_responses(entry, epath);
      for (const auto& [name, r] : bkg.responses) {
        bool declared = false;
        for (const auto& n : nuisances) declared = declared || n.name == name;
        if (!declared) throw ConfigError(child(child(epath, "responses"), name), "unknown nuisance '" + name + "'");
      }
      backgrounds.push_back(std::move(bkg));
    }
  }
  for (const auto& [name, r] : signal_responses) {
    bool declared = false;
    for (const auto& n : nuisances) declared = declared || n.name == name;
    if (!declared) throw ConfigError(child(child(spath, "responses"), name), "unknown nuisance '" + name + "'");
  }

  std::optional<Matrix> correlation;
  if (const auto it = doc.find("correlation"); it != doc.end() && !it->is_null()) {
    const std::string cpath = child(root, "correlation");
    if (!it->is_array()) throw ConfigError(cpath, "expected an array of rows");
    Matrix m;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& row = (*it)[i];
      if (!row.is_array()) throw ConfigError(child(cpath, i), "expected an array");
      std::vector<double> r;
      for (std::size_t k = 0; k < row.size(); ++k) r.push_back(require_number(row[k], child(child(cpath, i), k)));
      m.push_back(std::move(r));
    }
    correlation = std::move(m);
  }

  // Names and references are checked above, so what remains here is the correlation matrix
  // and the model-level yield invariants.
  std::optional<SystematicsModel> systematics;
  try {
    systematics.emplace(std::move(nuisances), std::move(signal_responses), std::move(correlation));
  } catch (const InvalidModelError& e) {
    throw ConfigError("/correlation", e.what());
  }
  try {
    return CountingModel(s_nom, std::move(backgrounds), n_obs, std::move(*systematics));
  } catch (const InvalidModelError& e) {
    throw ConfigError(root, e.what());
  }
}

nlohmann::ordered_json model_to_json(const CountingModel& model) {
  ordered_json doc;
  doc["signal"] = {{"nominal", model.s_nom()}, {"responses", responses_to_json(model.systematics().signal_responses())}};
  ordered_json backgrounds = ordered_json::array();
  for (const auto& bkg : model.backgrounds()) {
    backgrounds.push_back({{"name", bkg.name}, {"nominal", bkg.b_nom}, {"responses", responses_to_json(bkg.responses)}});
  }
  doc["backgrounds"] = std::move(backgrounds);
  ordered_json nuisances = ordered_json::array();
  for (const auto& n : model.systematics().nuisances()) {
    nuisances.push_back({{"name", n.name}, {"prior", prior_to_json(n.prior)}});
  }
  doc["nuisances"] = std::move(nuisances);
  if (const auto& c = model.systematics().correlation()) doc["correlation"] = *c;
  doc["n_obs"] = model.n_obs();
  return doc;
}

CountingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(doc);
}

std::string format_json(const nlohmann::ordered_json& value, int indent) {
  std::ostringstream os;
  write_json(os, value, indent, 0);
  if (indent >= 0) os << '\n';
  return os.str();
}

std::string config_hash(const CountingModel& model) {
  const std::string canonical = format_json(model_to_json(model), -1);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace hclimits
