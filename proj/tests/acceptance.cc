// Acceptance run: one PASS/FAIL line per criterion with the measured values.
//
//   acceptance <configs dir> <asid cli binary>
//
// Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "asid/explore.h"
#include "asid/fisher.h"
#include "asid/harness/config.h"
#include "asid/harness/pipeline.h"
#include "asid/harness/sweep.h"
#include "asid/random.h"
#include "asid/sysid.h"

namespace fs = std::filesystem;
using namespace asid;
using namespace asid::harness;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_configs;
std::string g_cli;

Eigen::VectorXd V(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::shared_ptr<const Environment> Env(const std::string& id,
                                       std::optional<double> sigma = {},
                                       std::optional<int> horizon = {}) {
  EnvOverrides o;
  o.sigma_w = sigma;
  o.horizon = horizon;
  return MakeEnvironment(id, o);
}

Policy OpenLoop(const Environment& env, const Eigen::VectorXd& params) {
  const EnvSpec& s = env.spec();
  return Policy(PolicyKind::kOpenLoop, s.horizon, s.n_s, s.n_a, params,
                s.env_id);
}

ParamDistribution Prior(const Environment& env, double mean, double std) {
  const EnvSpec& s = env.spec();
  return {Eigen::VectorXd::Constant(s.d, mean),
          Eigen::VectorXd::Constant(s.d, std), s.param_lower, s.param_upper};
}

std::string Fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------------

Outcome JacobianOracle() {
  // linear1d: d(s + theta a)/d theta = clip(a).
  // rod-pivot: w' = w + J (x - c) / I(c), I(c) = m L^2 / 12 + m c^2, so
  //   d w' / dc = -J (I(c) + 2 m c (x - c)) / I(c)^2, d angle' / dc = dt d w'/dc.
  const auto lin = Env("linear1d");
  const auto rod = Env("rod-pivot");
  const double dt = rod->spec().Extra("dt");
  const double m = rod->spec().Extra("mass");
  const double len = rod->spec().Extra("length");
  Rng rng(DeriveSeed(1, "acceptance-jacobian"));
  double worst = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double s = rng.Uniform(-3.0, 3.0);
    const double a = rng.Uniform(-1.0, 1.0);
    const double th = rng.Uniform(0.15, 2.95);
    const ParamJacobian jl = FdParamJacobian(
        *lin, V({s}), V({a}), lin->spec().MakeParams(V({th})), FdConfig{});
    worst = std::max(worst, std::abs(jl.jacobian(0, 0) - a) / std::abs(a));
    smallest = std::min(smallest, std::abs(a));

    const double ang = rng.Uniform(-1.0, 1.0);
    const double w = rng.Uniform(-2.0, 2.0);
    const double J = rng.Uniform(-1.0, 1.0);
    const double x = rng.Uniform(-0.5, 0.5);
    const double c = rng.Uniform(-0.45, 0.45);
    const double inertia = m * len * len / 12.0 + m * c * c;
    const double dw = -J * (inertia + 2.0 * m * c * (x - c)) /
                      (inertia * inertia);
    const ParamJacobian jr = FdParamJacobian(
        *rod, V({ang, w}), V({J, x}), rod->spec().MakeParams(V({c})),
        FdConfig{});
    worst = std::max(worst, std::abs(jr.jacobian(1, 0) - dw) / std::abs(dw));
    worst = std::max(worst,
                     std::abs(jr.jacobian(0, 0) - dt * dw) / std::abs(dt * dw));
    smallest = std::min(smallest, std::abs(dw));
  }
  return {worst <= 1e-4, "max relative error " + Fmt(worst) +
                             " over 100 points per env (smallest |analytic| " +
                             Fmt(smallest) + ")"};
}

// Random exploration trajectories of every env.
std::vector<std::pair<std::shared_ptr<const Environment>, Trajectory>>
SampleTrajectories(int per_env) {
  std::vector<std::pair<std::shared_ptr<const Environment>, Trajectory>> out;
  for (const std::string& id : EnvironmentIds()) {
    const auto env = Env(id);
    const ParamDistribution q = Prior(*env, 0.0, 1.0);
    for (int k = 0; k < per_env; ++k) {
      const std::uint64_t seed = DeriveSeed(7, id, k);
      Rng rng(seed);
      ParamDistribution wide = q;
      wide.mean = 0.5 * (q.lower + q.upper);
      wide.std = q.upper - q.lower;
      const ParamVector theta =
          SampleParams(wide, env->spec().DefaultParams(), rng);
      // Striker envs need a push to say anything about friction; mix in
      // pushes toward the ball.
      Policy p = RandomPolicy(*env, seed);
      if (env->spec().n_s == 3 && k % 2 == 0) {
        Eigen::VectorXd params = p.params().cwiseAbs();
        p = p.WithParams(params);
      }
      out.emplace_back(env, Rollout(*env, p, theta, seed));
    }
  }
  return out;
}

bool SymmetricPsd(const Eigen::MatrixXd& m, double* asym, double* min_eig) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  *asym = (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  *min_eig = es.eigenvalues().minCoeff() / scale;
  return *asym <= 1e-12 && *min_eig >= -1e-10;
}

Outcome FisherAlgebra() {
  const auto trajs = SampleTrajectories(40);
  int built = 0;
  int bad = 0;
  double worst_asym = 0.0;
  double worst_eig = 0.0;
  int scale_violations = 0;
  for (const auto& [env, t] : trajs) {
    const ParamVector theta = env->spec().MakeParams(
        0.5 * (env->spec().param_lower + env->spec().param_upper));
    const FisherMatrix info = ComputeFisherMatrix(t, *env, theta, {});
    double asym, eig;
    ++built;
    if (!SymmetricPsd(info.entries(), &asym, &eig)) ++bad;
    worst_asym = std::max(worst_asym, asym);
    worst_eig = std::min(worst_eig, eig);
    for (double alpha : {0.25, 0.5, 2.0, 4.0}) {
      EnvOverrides o;
      o.sigma_w = env->spec().sigma_w * alpha;
      const auto scaled = MakeEnvironment(env->id(), o);
      const FisherMatrix si = ComputeFisherMatrix(t, *scaled, theta, {});
      ++built;
      if (!SymmetricPsd(si.entries(), &asym, &eig)) ++bad;
      if (si.entries() != info.entries() / (alpha * alpha)) ++scale_violations;
    }
  }

  // Monotonicity: for random h1 < h2, the longer prefix never has a larger
  // tr((I + ridge)^-1).
  Rng rng(DeriveSeed(3, "acceptance-prefix"));
  int mono_violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& [env, t] = trajs[static_cast<std::size_t>(
        rng.NextU64() % trajs.size())];
    const int h1 = 1 + static_cast<int>(rng.NextU64() % t.horizon);
    const int h2 = h1 + static_cast<int>(rng.NextU64() % (t.horizon - h1 + 1));
    const ParamVector theta = env->spec().DefaultParams();
    const FisherMatrix a = ComputeFisherMatrix(t.Prefix(h1), *env, theta, {});
    const FisherMatrix b = ComputeFisherMatrix(t.Prefix(h2), *env, theta, {});
    built += 2;
    double asym, eig;
    if (!SymmetricPsd(a.entries(), &asym, &eig)) ++bad;
    if (!SymmetricPsd(b.entries(), &asym, &eig)) ++bad;
    const double ta = a.RegularizedTraceInverse(1e-3);
    const double tb = b.RegularizedTraceInverse(1e-3);
    if (tb > ta * (1.0 + 1e-12)) ++mono_violations;
  }
  const bool pass = bad == 0 && scale_violations == 0 && mono_violations == 0;
  return {pass, std::to_string(built) + " matrices, " + std::to_string(bad) +
                    " symmetry/PSD failures (worst asym " + Fmt(worst_asym) +
                    ", min eig " + Fmt(worst_eig) + "), " +
                    std::to_string(scale_violations) +
                    " scale-law mismatches, " +
                    std::to_string(mono_violations) +
                    "/1000 prefix monotonicity violations"};
}

Outcome CramerRao() {
  // theta_hat = sum a_h (s_{h+1} - s_h) / sum a_h^2 is unbiased with variance
  // sigma^2 / sum a_h^2, which is exactly the bound.
  const auto env = Env("linear1d");
  const Policy p = OpenLoop(*env, V({1.0, -0.5, 0.75}));
  const ParamVector star = env->spec().MakeParams(V({1.4}));
  double sse = 0.0;
  const int n = 500;
  for (int k = 0; k < n; ++k) {
    const Trajectory t =
        Rollout(*env, p, star, DeriveSeed(11, "acceptance-crlb", k));
    double num = 0.0;
    double den = 0.0;
    for (int h = 0; h < t.horizon; ++h) {
      const double a = t.actions[h][0];
      num += a * (t.states[h + 1][0] - t.states[h][0]);
      den += a * a;
    }
    const double e = num / den - 1.4;
    sse += e * e;
  }
  const double mse = sse / n;
  const Trajectory t0 = Rollout(*env, p, star, 0);
  const double bound =
      CrlbBound(ComputeFisherMatrix(t0, *env, star, {}), 1.0);
  const double ratio = mse / bound;
  // MSE of n squared Gaussians has relative sd sqrt(2 / n).
  const double z = (ratio - 1.0) / std::sqrt(2.0 / n);
  return {mse >= bound && ratio <= 1.10,
          "MSE " + Fmt(mse) + " vs bound " + Fmt(bound) + " (ratio " +
              Fmt(ratio) + ", " + Fmt(z) + " Monte-Carlo sd from 1)"};
}

Outcome AOptimal() {
  std::string detail;
  bool pass = true;
  for (int horizon : {3, 5, 10}) {
    const auto env = Env("linear1d", 1.0, horizon);
    CemConfig cem;
    cem.population = 32;
    cem.elite_frac = 0.2;
    cem.iterations = 15;
    cem.seed = DeriveSeed(5, "acceptance-aopt", horizon);
    const ExplorationResult r = TrainExplorationPolicy(
        *env, Prior(*env, 1.0, 0.5), PolicyKind::kOpenLoop, cem, {});
    const double optimum = 1.0 / (horizon + 1e-3);
    const double rel = r.objective / optimum - 1.0;
    pass = pass && rel <= 0.05 && rel >= -1e-9;
    detail += "H=" + std::to_string(horizon) + ": " + Fmt(r.objective) +
              " vs " + Fmt(optimum) + " (+" + Fmt(100.0 * rel) + "%)  ";
  }
  return {pass, detail};
}

double GridArgmin(const Trajectory& real, const Environment& env) {
  const EnvSpec& s = env.spec();
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double c =
        s.param_lower[0] + (s.param_upper[0] - s.param_lower[0]) * i / 10000;
    const double v =
        TrajectoryDiscrepancy(real, s.MakeParams(V({c})), env, 1, 0);
    if (v < best) {
      best = v;
      arg = c;
    }
  }
  return arg;
}

Outcome Identification() {
  CemConfig cem;
  cem.population = 64;
  cem.elite_frac = 0.2;
  cem.iterations = 25;
  cem.min_std = 1e-7;
  double worst = 0.0;
  double worst_grid = 0.0;
  struct Case {
    std::string env;
    Eigen::VectorXd actions;
    double theta;
    double mean, std;
  };
  const std::vector<Case> cases = {
      {"linear1d", V({1.0, 0.5, -1.0}), 0.6, 1.0, 0.5},
      {"linear1d", V({1.0, 0.5, -1.0}), 1.4, 1.0, 0.5},
      {"linear1d", V({-0.3, 1.0, 0.2}), 2.1, 1.0, 0.5},
      {"rod-pivot", V({1.0, 0.4, -0.5, -0.2, 0.8, 0.1}), -0.3, 0.0, 0.3},
      {"rod-pivot", V({1.0, 0.4, -0.5, -0.2, 0.8, 0.1}), 0.0, 0.0, 0.3},
      {"rod-pivot", V({0.6, -0.45, 1.0, 0.3, -0.7, 0.0}), 0.3, 0.0, 0.3}};
  int k = 0;
  for (const Case& c : cases) {
    const auto env = Env(c.env, 0.0);
    const Trajectory real = Rollout(*env, OpenLoop(*env, c.actions),
                                    env->spec().MakeParams(V({c.theta})), k);
    cem.seed = DeriveSeed(13, "acceptance-sysid", k++);
    const IdentificationResult id =
        Identify(real, *env, Prior(*env, c.mean, c.std), cem, 1);
    const double hat = id.point_estimate.values[0];
    worst = std::max(worst, std::abs(hat - c.theta));
    worst_grid = std::max(worst_grid, std::abs(hat - GridArgmin(real, *env)));
  }

  const auto pm = Env("pointmass-friction");
  const Trajectory still =
      Rollout(*pm, Policy::Zero(PolicyKind::kOpenLoop, pm->spec()),
              pm->spec().MakeParams(V({0.33})), 4);
  const ParamDistribution prior = Prior(*pm, 0.25, 0.1);
  cem.seed = 17;
  const IdentificationResult id = Identify(still, *pm, prior, cem, 1);
  const double ratio = id.posterior.std[0] / prior.std[0];
  const bool pass = worst <= 1e-3 && worst_grid <= 1e-3 && !id.identifiable &&
                    ratio >= 0.5;
  return {pass, "max |theta_hat - theta*| " + Fmt(worst) +
                    ", max |theta_hat - grid argmin| " + Fmt(worst_grid) +
                    "; untouched ball: identifiable=" +
                    (id.identifiable ? "true" : "false") +
                    ", posterior/prior std " + Fmt(ratio)};
}

double Threshold(const ExperimentConfig& cfg, const std::string& name) {
  auto it = cfg.thresholds.find(name);
  if (it == cfg.thresholds.end()) {
    throw ConfigError("config has no threshold " + name);
  }
  return it->second;
}

double Mean(const nlohmann::json& summary, const std::string& method,
            const std::string& metric) {
  return summary.at("methods").at(method).at(metric).at("mean").get<double>();
}

ExperimentConfig InMemory(const std::string& file) {
  ExperimentConfig cfg = LoadConfig(g_configs / file);
  cfg.out.clear();
  return cfg;
}

Outcome Table1Analog() {
  bool pass = true;
  std::string detail;
  for (const std::string name : {"left", "center", "right"}) {
    const ExperimentConfig cfg = InMemory("rod-pivot-" + name + ".json");
    const PipelineReport rep = RunPipeline(cfg);
    const double asid = Mean(rep.summary, "asid", "task_error");
    const double random = Mean(rep.summary, "random", "task_error");
    const double dr = Mean(rep.summary, "dr", "task_error");
    int errors = 0;
    for (const auto& r : rep.records) errors += r.ok ? 0 : 1;
    const bool ok = errors == 0 && asid < random && asid < dr &&
                    asid <= Threshold(cfg, "asid_mean_tilt_max_deg");
    pass = pass && ok;
    detail += "rod c*=" + Fmt(cfg.theta_star[0]) + " |tilt| asid " +
              Fmt(asid) + " random " + Fmt(random) + " dr " + Fmt(dr) +
              "; ";
  }
  const ExperimentConfig cfg = InMemory("pointmass-friction.json");
  const PipelineReport rep = RunPipeline(cfg);
  const double asid = Mean(rep.summary, "asid", "success_rate");
  const double random = Mean(rep.summary, "random", "success_rate");
  const double dr = Mean(rep.summary, "dr", "success_rate");
  const double margin = asid - std::max(random, dr);
  pass = pass && margin >= Threshold(cfg, "success_margin_min");
  detail += "pointmass success asid " + Fmt(asid) + " random " +
            Fmt(random) + " dr " + Fmt(dr) + " (margin " + Fmt(margin) + ")";
  return {pass, detail};
}

// Episode-weighted rate of one metric per policy label.
std::pair<double, double> SweepRates(const SweepResult& r,
                                     const std::string& metric) {
  const int m = r.table.MetricIndex(metric);
  double f = 0.0, q = 0.0;
  int nf = 0, nq = 0;
  for (const auto& row : r.table.rows) {
    if (row.label == "fisher") {
      f += row.values[m];
      ++nf;
    } else {
      q += row.values[m];
      ++nq;
    }
  }
  return {f / nf, q / nq};
}

Outcome Coverage() {
  const ExperimentConfig cfg = InMemory("multi-region.json");
  const SweepResult r = RunSweep(cfg);
  const auto [fisher, random] = SweepRates(r, "reach2_rate");
  const int episodes =
      cfg.sweep->episodes * static_cast<int>(cfg.sweep->cells.size());
  const bool pass = fisher >= Threshold(cfg, "reach2_fisher_min") &&
                    random < Threshold(cfg, "reach2_random_max");
  return {pass, "reach >= 2 patches: fisher " + Fmt(fisher) + ", random " +
                    Fmt(random) + " over " + std::to_string(episodes) +
                    " episodes"};
}

Outcome Contact() {
  const ExperimentConfig cfg = InMemory("pointmass-friction.json");
  const SweepResult r = RunSweep(cfg);
  const auto [fisher, random] = SweepRates(r, "contact_rate");
  const int episodes =
      cfg.sweep->episodes * static_cast<int>(cfg.sweep->cells.size());
  const bool pass = fisher >= Threshold(cfg, "contact_fisher_min") &&
                    random <= Threshold(cfg, "contact_random_max");
  return {pass, "contact rate: fisher " + Fmt(fisher) + ", random " +
                    Fmt(random) + " over " + std::to_string(episodes) +
                    " episodes"};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Reproducibility() {
  const fs::path root = fs::temp_directory_path() /
                        ("asid_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::string> files;
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / run;
    const std::string cmd = "\"" + g_cli + "\" pipeline --config \"" +
                            (g_configs / "rod-pivot-center.json").string() +
                            "\" --out \"" + out.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      return {false, "cli exited with status " + std::to_string(rc)};
    }
    files.push_back(Slurp(out / "records.jsonl"));
  }
  fs::remove_all(root);
  const std::size_t lines = std::count(files[0].begin(), files[0].end(), '\n');
  const bool same = files[0] == files[1] && !files[0].empty();
  return {same, std::to_string(lines) + " records, " +
                    (same ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <configs dir> <asid cli>\n";
    return 64;
  }
  g_configs = argv[1];
  g_cli = argv[2];

  struct Criterion {
    const char* name;
    double budget_s;  // <= 0: no runtime limit
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"jacobian oracle", 1.0, JacobianOracle},
      {"fisher algebra", 0.0, FisherAlgebra},
      {"cramer-rao bound", 10.0, CramerRao},
      {"a-optimal optimum", 30.0, AOptimal},
      {"identification oracle", 30.0, Identification},
      {"pipeline vs baselines", 600.0, Table1Analog},
      {"multi-region coverage", 300.0, Coverage},
      {"pointmass contact", 120.0, Contact},
      {"cli reproducibility", 0.0, Reproducibility},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = Seconds(t0);
    std::string timing = Fmt(secs) + " s";
    if (c.budget_s > 0.0) {
      timing += " (limit " + Fmt(c.budget_s) + " s)";
      if (secs >= c.budget_s) o.pass = false;
    }
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL")
              << "  " << c.name << ": " << o.detail << " [" << timing << "]"
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed"
                            : std::to_string(failed) + " criterion/criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
