#include "hclimits/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hclimits/config.hpp"
#include "hclimits/equivalence.hpp"
#include "hclimits/exact_limits.hpp"
#include "hclimits/marginalization.hpp"
#include "hclimits/special_math.hpp"

namespace hclimits::cli {

namespace {

using nlohmann::ordered_json;

struct CommonOptions {
  std::string config;
  double cl = 0.95;
  std::string integrator = "monte_carlo";
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  unsigned threads = 1;
  std::string out = "-";
};

class UsageError : public Error {
 public:
  using Error::Error;
};

Integrator parse_integrator(const CommonOptions& o) {
  std::string kind = o.integrator;
  std::optional<int> nodes;
  if (const auto colon = kind.find(':'); colon != std::string::npos) {
    try {
      std::size_t used = 0;
      nodes = std::stoi(kind.substr(colon + 1), &used);
      if (used != kind.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError("--integrator: cannot parse node count in '" + o.integrator + "'");
    }
    kind = kind.substr(0, colon);
  }
  try {
    if (kind == "monte_carlo" || kind == "mc") {
      if (nodes) throw UsageError("--integrator: monte_carlo takes its size from --samples");
      return Integrator::monte_carlo(o.samples, o.seed);
    }
    if (kind == "gauss_hermite" || kind == "gh") return Integrator::gauss_hermite(nodes.value_or(32));
  } catch (const InvalidModelError& e) {
    throw UsageError(std::string("--integrator: ") + e.what());
  }
  throw UsageError("--integrator must be monte_carlo or gauss_hermite[:nodes], got '" + o.integrator + "'");
}

ordered_json integrator_json(const Integrator& integrator) {
  if (integrator.kind() == Integrator::Kind::monte_carlo) {
    return {{"kind", "monte_carlo"}, {"n_samples", integrator.n_samples()}, {"seed", integrator.seed()}};
  }
  return {{"kind", "gauss_hermite"}, {"nodes_per_dim", integrator.nodes_per_dim()}};
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json result_json(const LimitResult& r) {
  return {{"mu_up", r.mu_up},
          {"criterion_at_solution", r.criterion_at_solution},
          {"iterations", r.iterations},
          {"bracket", {r.bracket.first, r.bracket.second}},
          {"criterion_stderr", optional_json(r.criterion_stderr)},
          {"mu_up_stderr", optional_json(r.mu_up_stderr)}};
}

LimitRequest make_request(double cl, double rel_tol) {
  if (!(cl > 0.0 && cl < 1.0)) throw UsageError("--cl must lie in (0, 1)");
  LimitRequest req;
  req.alpha = 1.0 - cl;
  req.rel_tol = rel_tol;
  try {
    req.validate();
  } catch (const InvalidModelError& e) {
    throw UsageError(e.what());
  }
  return req;
}

void emit(const std::string& target, const std::string& content, std::ostream& out) {
  if (target == "-") {
    out << content;
    out.flush();
    return;
  }
  std::ofstream file(target, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot open output file '" + target + "'");
  file << content;
  if (!file) throw UsageError("failed writing output file '" + target + "'");
}

ordered_json header(const char* command, const CountingModel& model, double cl) {
  ordered_json j;
  j["command"] = command;
  j["config_hash"] = config_hash(model);
  j["cl"] = cl;
  j["alpha"] = 1.0 - cl;
  j["n_obs"] = model.n_obs();
  return j;
}

int cmd_limit(const CommonOptions& o, const std::string& method, double rel_tol, std::ostream& out) {
  const CountingModel model = load_model(o.config);
  const LimitRequest req = make_request(o.cl, rel_tol);
  const bool marginal = model.systematics().size() > 0;

  ordered_json j = header("limit", model, o.cl);
  j["method"] = method;
  j["marginalized"] = marginal;
  std::optional<LimitResult> cls, bayes;
  if (marginal) {
    const Integrator integrator = parse_integrator(o);
    j["integrator"] = integrator_json(integrator);
    const SampleSet samples = draw_samples(model.systematics(), integrator);
    const Execution exec{o.threads};
    if (method != "bayes") cls = hybrid_cls_upper_limit(model, req, samples, exec);
    if (method != "cls") bayes = bayesian_marginal_upper_limit(model, req, samples, exec);
  } else {
    j["integrator"] = nullptr;
    if (method != "bayes") cls = cls_upper_limit(model, req);
    if (method != "cls") bayes = bayesian_upper_limit_closed_form(model, req);
  }
  ordered_json results = ordered_json::object();
  if (cls) results["cls"] = result_json(*cls);
  if (bayes) results["bayes"] = result_json(*bayes);
  j["results"] = std::move(results);
  if (cls && bayes) {
    j["rel_diff"] = std::fabs(cls->mu_up - bayes->mu_up) / std::max(cls->mu_up, bayes->mu_up);
  }
  emit(o.out, format_json(j), out);
  return kOk;
}

std::string format_row(double mu, double value, const std::optional<double>& stderr_value, bool with_stderr) {
  char buf[128];
  if (with_stderr) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", mu, value, stderr_value.value_or(0.0));
  } else {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", mu, value);
  }
  return buf;
}

int cmd_scan(const CommonOptions& o, double mu_min, double mu_max, int points, const std::string& quantity,
             std::ostream& out) {
  if (!(mu_min >= 0.0 && mu_min < mu_max) || !std::isfinite(mu_max)) {
    throw UsageError("scan range must satisfy 0 <= --mu-min < --mu-max");
  }
  if (points < 2) throw UsageError("--points must be at least 2");
  const CountingModel model = load_model(o.config);
  const bool marginal = model.systematics().size() > 0;

  std::optional<SampleSet> samples;
  if (marginal) samples = draw_samples(model.systematics(), parse_integrator(o));
  const bool with_stderr = samples && samples->monte_carlo;
  const Execution exec{o.threads};
  const double b = model.b_nom_total();

  auto evaluate = [&](double mu) -> Estimate {
    if (marginal) {
      if (quantity == "cls") return hybrid_cls(model, mu, *samples, exec);
      if (quantity == "clsb") return marginal_clsb(model, mu, *samples, exec);
      if (quantity == "clb") return marginal_clb(model, *samples, exec);
      return marginal_posterior_density(model, mu, *samples, exec);
    }
    if (quantity == "cls") return {cls_value(model, mu), std::nullopt};
    if (quantity == "clsb") return {poisson_cdf(model.n_obs(), mu * model.s_nom() + b), std::nullopt};
    if (quantity == "clb") return {poisson_cdf(model.n_obs(), b), std::nullopt};
    return {posterior_density(model, mu), std::nullopt};
  };

  std::string csv = with_stderr ? "mu,value,stderr\n" : "mu,value\n";
  const double step = (mu_max - mu_min) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) {
    const double mu = i == points - 1 ? mu_max : mu_min + step * static_cast<double>(i);
    const Estimate e = evaluate(mu);
    csv += format_row(mu, e.value, e.std_error, with_stderr);
  }
  emit(o.out, csv, out);
  return kOk;
}

int cmd_equivalence(const CommonOptions& o, double tol, double rel_tol, std::optional<std::uint64_t> bayes_seed,
                    std::ostream& out) {
  const CountingModel model = load_model(o.config);
  const LimitRequest req = make_request(o.cl, rel_tol);
  const Integrator integrator = parse_integrator(o);
  CompareOptions options;
  options.tol = tol;
  options.exec = Execution{o.threads};
  options.bayes_seed_override = bayes_seed;
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  const EquivalenceReport report = compare_limits(model, req, integrator, options);

  ordered_json j = header("equivalence", model, o.cl);
  j["integrator"] = integrator_json(integrator);
  j["tol"] = tol;
  j["mu_up_cls"] = report.mu_up_cls;
  j["mu_up_bayes"] = report.mu_up_bayes;
  j["rel_diff"] = report.rel_diff;
  j["signal_uncertain"] = report.signal_uncertain;
  j["mc_stderr"] = optional_json(report.mc_stderr);
  j["verdict"] = std::string(to_string(report.verdict));
  j["cls"] = result_json(report.cls);
  j["bayes"] = result_json(report.bayes);
  emit(o.out, format_json(j), out);
  return report.verdict == Verdict::unexpected_divergence ? kUnexpectedDivergence : kOk;
}

void add_common(CLI::App& cmd, CommonOptions& o, bool with_cl, bool with_integrator) {
  cmd.add_option("config", o.config, "Model configuration (JSON)")->required();
  if (with_cl) {
    cmd.add_option("--cl", o.cl,
                   "Confidence level; the exclusion threshold is alpha = 1 - cl (CLs(mu_up) = alpha, "
                   "posterior mass above mu_up = alpha)")
        ->capture_default_str();
  }
  if (with_integrator) {
    cmd.add_option("--integrator", o.integrator, "monte_carlo | gauss_hermite[:nodes] (default nodes 32)")
        ->capture_default_str();
    cmd.add_option("--seed", o.seed, "Monte Carlo seed")->capture_default_str();
    cmd.add_option("--samples", o.samples, "Monte Carlo sample count")->capture_default_str();
    cmd.add_option("--threads", o.threads, "Worker threads for per-sample evaluation")->capture_default_str();
  }
  cmd.add_option("--out", o.out, "Output path, '-' for standard output")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Upper limits for single-channel counting experiments: CLs, Bayesian, and their "
               "nuisance-marginalized (hybrid) variants"};
  app.require_subcommand(1);

  CommonOptions limit_opts;
  std::string method = "both";
  double limit_tol = 1e-9;
  auto* limit = app.add_subcommand("limit", "Compute mu_up with the CLs and/or Bayesian method");
  add_common(*limit, limit_opts, true, true);
  limit->add_option("--method", method, "cls | bayes | both")
      ->check(CLI::IsMember({"cls", "bayes", "both"}))
      ->capture_default_str();
  limit->add_option("--tol", limit_tol, "Root-solver relative tolerance")->capture_default_str();

  CommonOptions scan_opts;
  double mu_min = 0.0, mu_max = 10.0;
  int points = 101;
  std::string quantity = "cls";
  auto* scan = app.add_subcommand("scan", "Tabulate CLs, CLs+b, CLb or the posterior density versus mu as CSV");
  add_common(*scan, scan_opts, false, true);
  scan->add_option("--mu-min", mu_min)->capture_default_str();
  scan->add_option("--mu-max", mu_max)->capture_default_str();
  scan->add_option("--points", points)->capture_default_str();
  scan->add_option("--quantity", quantity, "cls | clsb | clb | posterior")
      ->check(CLI::IsMember({"cls", "clsb", "clb", "posterior"}))
      ->capture_default_str();

  CommonOptions eq_opts;
  double eq_tol = 1e-6;
  double eq_solver_tol = 1e-9;
  std::optional<std::uint64_t> bayes_seed;
  auto* equivalence =
      app.add_subcommand("equivalence", "Compare hybrid CLs and marginal Bayesian limits on shared samples");
  add_common(*equivalence, eq_opts, true, true);
  equivalence->add_option("--tol", eq_tol, "Relative agreement tolerance")->capture_default_str();
  equivalence->add_option("--solver-tol", eq_solver_tol, "Root-solver relative tolerance")->capture_default_str();
  equivalence->add_option("--debug-bayes-seed", bayes_seed,
                          "Testing only: draw the Bayesian side from this seed instead of sharing samples");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*limit) return cmd_limit(limit_opts, method, limit_tol, out);
    if (*scan) return cmd_scan(scan_opts, mu_min, mu_max, points, quantity, out);
    if (*equivalence) return cmd_equivalence(eq_opts, eq_tol, eq_solver_tol, bayes_seed, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  }
  return kConfigError;
}

}  // namespace hclimits::cli
