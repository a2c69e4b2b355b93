// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Every tolerance and runtime budget is fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hclimits/cli.hpp"
#include "hclimits/equivalence.hpp"
#include "hclimits/exact_limits.hpp"
#include "hclimits/marginalization.hpp"
#include "hclimits/special_math.hpp"

using namespace hclimits;
namespace fs = std::filesystem;

namespace {

const std::string kData = HCLIMITS_TEST_DATA;
const std::string kCli = HCLIMITS_CLI_PATH;

struct Outcome {
  bool ok = true;
  std::string detail;
};

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

LimitRequest at(double alpha, double rel_tol = 1e-9) {
  LimitRequest r;
  r.alpha = alpha;
  r.rel_tol = rel_tol;
  return r;
}

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << id << " " << title << ": " << o.detail << "; " << fmt(secs) << " s (budget "
            << budget_s << " s)" << (in_time ? "" : " over budget") << std::endl;
}

// 1. poisson_cdf(n, nu) == Q(n+1, nu)
Outcome gamma_identity() {
  constexpr double kTol = 1e-12;
  double worst = 0.0;
  for (int n = 0; n <= 100; ++n) {
    for (int i = 0; i <= 500; ++i) {
      const double nu = 0.1 * i;
      worst = std::max(worst, std::abs(poisson_cdf(n, nu) - gamma_q(n + 1.0, nu)));
    }
  }
  return {worst <= kTol, "max |cdf - Q| = " + fmt(worst) + " over 101 x 501 points (tol 1e-12)"};
}

// 2. closed-form CLs vs Bayes, and the quadrature posterior, without systematics
Outcome no_systematics() {
  constexpr double kClosedTol = 1e-7;
  constexpr double kQuadTol = 1e-6;
  double worst_closed = 0.0, worst_quad = 0.0;
  int points = 0;
  for (double s : {0.5, 1.0, 2.0}) {
    for (double b : {0.0, 0.5, 1.5, 5.0, 20.0}) {
      for (int n : {0, 1, 3, 10, 50}) {
        std::vector<BackgroundProcess> bkg;
        if (b > 0.0) bkg.push_back({"bkg", b, {}});
        const CountingModel m(s, bkg, n);
        for (double alpha : {0.05, 0.1, 0.32}) {
          const double cls = cls_upper_limit(m, at(alpha)).mu_up;
          const double bayes = bayesian_upper_limit_closed_form(m, at(alpha)).mu_up;
          const double quad = bayesian_upper_limit_quadrature(m, at(alpha)).mu_up;
          worst_closed = std::max(worst_closed, rel_diff(cls, bayes));
          worst_quad = std::max(worst_quad, rel_diff(quad, bayes));
          ++points;
        }
      }
    }
  }
  return {points == 225 && worst_closed <= kClosedTol && worst_quad <= kQuadTol,
          std::to_string(points) + " points, max rel CLs vs Bayes " + fmt(worst_closed) + " (tol 1e-7), quadrature vs closed " +
              fmt(worst_quad) + " (tol 1e-6)"};
}

struct BackgroundConfig {
  CountingModel model;
  bool gaussian_only;
};

// Deterministic family of background-only systematics configs. Linear deltas are
// small enough that the widest 16-node abscissa keeps every yield positive.
std::vector<BackgroundConfig> background_configs() {
  const double kappas[] = {1.1, 1.2, 1.3, 1.5};
  const double deltas[] = {0.04, 0.07, 0.1};
  const int n_obs[] = {0, 1, 3, 5, 10, 2};
  std::vector<BackgroundConfig> out;
  for (int i = 0; i < 30; ++i) {
    const int k = 1 + i % 3;
    const bool lognormal_prior = i % 5 == 4;
    const bool correlated = k >= 2 && !lognormal_prior && i % 2 == 1;
    std::vector<Nuisance> nuis;
    for (int j = 0; j < k; ++j) {
      const std::string name = "eta" + std::to_string(j);
      if (lognormal_prior && j == 0)
        nuis.push_back({name, ConstraintPrior::log_normal(0.0, 0.2)});
      else if ((i + j) % 2 == 0)
        nuis.push_back({name, ConstraintPrior::standard_normal()});
      else
        nuis.push_back({name, ConstraintPrior::normal(0.1 * j, 0.9)});
    }
    std::optional<Matrix> corr;
    if (correlated) {
      const double rho = i % 4 == 1 ? 0.4 : -0.3;
      Matrix c(k, std::vector<double>(k, 0.0));
      for (int j = 0; j < k; ++j) c[j][j] = 1.0;
      c[0][1] = c[1][0] = rho;
      corr = c;
    }
    std::vector<BackgroundProcess> bkg;
    std::map<std::string, ResponseFunction> r0, r1;
    for (int j = 0; j < k; ++j) {
      const std::string name = "eta" + std::to_string(j);
      const ResponseFunction r =
          (i + j) % 3 == 2 ? ResponseFunction::linear(deltas[(i + j) % 3]) : ResponseFunction::log_normal(kappas[(i + j) % 4]);
      (j % 2 == 0 ? r0 : r1)[name] = r;
    }
    bkg.push_back({"main", 0.5 + 0.37 * i, r0});
    if (!r1.empty()) bkg.push_back({"minor", 0.3 + 0.1 * (i % 7), r1});
    out.push_back({CountingModel(0.5 + 0.25 * (i % 4), bkg, n_obs[i % 6], SystematicsModel(nuis, {}, corr)),
                   !lognormal_prior});
  }
  return out;
}

// 3. hybrid CLs == marginal Bayes when only the background is uncertain
Outcome background_systematics() {
  constexpr double kTol = 1e-8;
  double worst_mc = 0.0, worst_gh = 0.0;
  int mc_runs = 0, gh_runs = 0;
  int idx = 0;
  for (const auto& [model, gaussian_only] : background_configs()) {
    const double alpha = idx % 2 == 0 ? 0.05 : 0.1;
    const auto mc = compare_limits(model, at(alpha), Integrator::monte_carlo(10000, 1000 + idx));
    worst_mc = std::max(worst_mc, mc.rel_diff);
    ++mc_runs;
    if (gaussian_only) {
      const auto gh = compare_limits(model, at(alpha), Integrator::gauss_hermite(16));
      worst_gh = std::max(worst_gh, gh.rel_diff);
      ++gh_runs;
    }
    ++idx;
  }
  return {mc_runs >= 20 && gh_runs >= 20 && worst_mc <= kTol && worst_gh <= kTol,
          std::to_string(mc_runs) + " configs with MC n=1e4 (max rel " + fmt(worst_mc) + "), " + std::to_string(gh_runs) +
              " with 16-node quadrature (max rel " + fmt(worst_gh) + "), tol 1e-8"};
}

// 4. an uncertain signal breaks the equivalence, by a pinned amount
Outcome signal_systematics() {
  constexpr double kGap = 0.032694734273507754;
  constexpr double kCls = 6.662710140130535;
  constexpr double kBayes = 6.887908477502728;
  constexpr double kPinTol = 1e-8;
  const CountingModel m(1.0, {{"bkg", 1.5, {}}}, 3,
                        SystematicsModel({{"lumi", ConstraintPrior::standard_normal()}},
                                         {{"lumi", ResponseFunction::log_normal(1.2)}}));
  const auto r = compare_limits(m, at(0.05), Integrator::gauss_hermite(32));
  const bool ok = r.verdict == Verdict::divergent_as_expected && rel_diff(r.rel_diff, kGap) <= kPinTol &&
                  rel_diff(r.mu_up_cls, kCls) <= kPinTol && rel_diff(r.mu_up_bayes, kBayes) <= kPinTol;
  return {ok, "CLs " + std::to_string(r.mu_up_cls) + ", Bayes " + std::to_string(r.mu_up_bayes) + ", gap " +
                  fmt(r.rel_diff) + " vs pinned " + fmt(kGap) + " (rel tol 1e-8), verdict " +
                  std::string(to_string(r.verdict))};
}

// 5. identity responses reduce every marginal quantity to its exact value
Outcome reduction() {
  constexpr double kTol = 1e-12;
  const double ss[] = {0.5, 1.0, 2.0, 1.0, 3.0, 0.7, 1.0, 2.5, 1.2, 0.9};
  const double bs[] = {0.0, 1.5, 5.0, 0.5, 20.0, 3.0, 8.0, 0.2, 12.0, 1.0};
  const int ns[] = {0, 3, 10, 1, 25, 2, 7, 0, 15, 4};
  double worst = 0.0;
  for (int c = 0; c < 10; ++c) {
    std::vector<BackgroundProcess> bkg;
    if (bs[c] > 0.0) bkg.push_back({"bkg", bs[c], {}});
    // Declared nuisances that nothing responds to.
    const SystematicsModel syst({{"a", ConstraintPrior::standard_normal()}, {"b", ConstraintPrior::normal(0.0, 2.0)}},
                                {});
    const CountingModel marg(ss[c], bkg, ns[c], syst);
    const CountingModel exact(ss[c], bkg, ns[c]);
    const SampleSet samples =
        draw_samples(syst, c % 2 == 0 ? Integrator::monte_carlo(1000, c) : Integrator::gauss_hermite(8));
    const double b = exact.b_nom_total();
    const double n = ns[c];
    for (double mu : {0.0, 0.5, 2.0, 7.5}) {
      const double nu = mu * ss[c] + b;
      worst = std::max(worst, rel_diff(marginal_likelihood(marg, mu, ns[c], samples), log_poisson_pmf(ns[c], nu).prob()));
      worst = std::max(worst, rel_diff(marginal_clsb(marg, mu, samples).value, poisson_cdf(ns[c], nu)));
      worst = std::max(worst, rel_diff(marginal_clb(marg, samples).value, poisson_cdf(ns[c], b)));
      worst = std::max(worst, rel_diff(hybrid_cls(marg, mu, samples).value, cls_value(exact, mu)));
      worst = std::max(worst, rel_diff(bayesian_marginal_tail(marg, mu, samples).value,
                                       gamma_q(n + 1.0, nu) / gamma_q(n + 1.0, b)));
      worst = std::max(worst, rel_diff(marginal_posterior_density(marg, mu, samples).value, posterior_density(exact, mu)));
    }
    const LimitRequest tight = at(0.05, 1e-14);
    worst = std::max(worst, rel_diff(hybrid_cls_upper_limit(marg, tight, samples).mu_up, cls_upper_limit(exact, tight).mu_up));
    worst = std::max(worst, rel_diff(bayesian_marginal_upper_limit(marg, tight, samples).mu_up,
                                     bayesian_upper_limit_closed_form(exact, tight).mu_up));
  }
  return {worst <= kTol, "10 configs, 6 quantities x 4 mu plus both limits, max rel " + fmt(worst) + " (tol 1e-12)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::vector<std::string>& args) {
  std::string cmd = "\"" + kCli + "\"";
  for (const auto& a : args) cmd += " \"" + a + "\"";
  return std::system(cmd.c_str());
}

// 6. byte-identical output across repeated runs and thread counts
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "hclimits_acceptance";
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> jobs = {
      {"equivalence", kData + "/signal_systematics.json", "--samples", "40000", "--seed", "99"},
      {"limit", kData + "/background_systematics.json", "--samples", "40000", "--seed", "3"},
      {"scan", kData + "/background_systematics.json", "--quantity", "posterior", "--samples", "20000", "--points", "41"},
      {"scan", kData + "/signal_systematics.json", "--quantity", "cls", "--integrator", "gauss_hermite:24"},
  };
  int compared = 0;
  std::string bad;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "4"}) {
      const fs::path out = dir / ("job" + std::to_string(j) + "_" + std::to_string(outputs.size()));
      auto args = jobs[j];
      args.insert(args.end(), {"--threads", threads, "--out", out.string()});
      if (run_cli(args) != 0) return {false, "CLI failed on job " + std::to_string(j)};
      outputs.push_back(slurp(out));
    }
    if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2]) bad += " job" + std::to_string(j);
    compared += 2;
  }
  return {bad.empty(), std::to_string(jobs.size()) + " commands x (2 repeats + 4 threads), " + std::to_string(compared) +
                           " byte comparisons" + (bad.empty() ? ", all identical" : ", mismatch:" + bad)};
}

// 7. Monte Carlo limits approach the quadrature limit at the expected rate
Outcome mc_convergence() {
  constexpr double kOracle = 6.366309056359327;  // 32-node quadrature, background log_normal 1.2
  constexpr double kSigmas = 3.0;
  constexpr double kRatioLo = 2.0, kRatioHi = 5.0;  // stderr shrink per decade, nominal sqrt(10)
  const CountingModel m(1.0, {{"bkg", 1.5, {{"bnorm", ResponseFunction::log_normal(1.2)}}}}, 3,
                        SystematicsModel({{"bnorm", ConstraintPrior::standard_normal()}}, {}));
  const double gh = hybrid_cls_upper_limit(m, at(0.05), Integrator::gauss_hermite(32)).mu_up;
  bool ok = rel_diff(gh, kOracle) <= 1e-8;
  std::ostringstream d;
  d << "GH32 " << gh;
  double prev_se = 0.0;
  for (std::uint64_t n : {1000u, 10000u, 100000u}) {
    const LimitResult r = hybrid_cls_upper_limit(m, at(0.05), Integrator::monte_carlo(n, 20240611));
    const double se = r.mu_up_stderr.value_or(0.0);
    const double pull = std::abs(r.mu_up - gh) / se;
    ok = ok && se > 0.0 && pull <= kSigmas;
    d << "; n=" << n << " |dmu|/se=" << fmt(pull);
    if (prev_se > 0.0) {
      const double ratio = prev_se / se;
      ok = ok && ratio >= kRatioLo && ratio <= kRatioHi;
      d << " se ratio " << fmt(ratio);
    }
    prev_se = se;
  }
  d << " (pull <= 3, ratio in [2, 5])";
  return {ok, d.str()};
}

}  // namespace

int main() {
  criterion("AC1", "gamma identity", 5, gamma_identity);
  criterion("AC2", "no-systematics equivalence", 30, no_systematics);
  criterion("AC3", "background-systematics equivalence", 120, background_systematics);
  criterion("AC4", "signal-systematics divergence", 5, signal_systematics);
  criterion("AC5", "reduction consistency", 5, reduction);
  criterion("AC6", "determinism", 10, determinism);
  criterion("AC7", "MC convergence", 60, mc_convergence);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
