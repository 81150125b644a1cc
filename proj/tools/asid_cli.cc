// asid: exploration, identification and task transfer on toy systems.
//
//   asid explore  --config c.json [--seed n] [--method asid|random] --out dir
//   asid sysid    --config c.json --trajectory dir/trajectory_real.json ...
//   asid task     --config c.json [--identification f.json] --method m ...
//   asid pipeline --config c.json [--seed n] [--method m] [--out dir]
//   asid sweep    --config c.json [--out dir]
//   asid render   --table sweep.csv --metric contact_rate [--out f.svg]
//
// Errors are printed to stderr as one JSON object; the exit code tells the
// class: 2 config, 3 numerical domain, 4 protocol, 64 usage, 1 other.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "asid/error.h"
#include "asid/harness/config.h"
#include "asid/harness/pipeline.h"
#include "asid/harness/records.h"
#include "asid/harness/sweep.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace asid;
using namespace asid::harness;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method;
  std::string trajectory;
  std::string identification;
  std::string table;
  std::string metric;
};

int Fail(const std::string& type, const std::string& message, int code,
         const std::vector<std::string>& issues = {}) {
  json err = {{"type", type}, {"message", message}};
  if (!issues.empty()) err["issues"] = issues;
  std::cerr << json{{"error", err}}.dump() << std::endl;
  return code;
}

ExperimentConfig Load(const Options& o) {
  ExperimentConfig cfg = LoadConfig(o.config);
  if (!o.out.empty()) cfg.out = o.out;
  return cfg;
}

std::uint64_t SeedOf(const Options& o, const ExperimentConfig& cfg) {
  return o.seed.value_or(cfg.seeds.front());
}

Method MethodOf(const Options& o, Method fallback) {
  return o.method.empty() ? fallback : ParseMethod(o.method);
}

void Emit(const json& j) { std::cout << j.dump() << std::endl; }

int Explore(const Options& o) {
  const ExperimentConfig cfg = Load(o);
  const Method method = MethodOf(o, Method::kAsid);
  if (method == Method::kDr) {
    throw ConfigError("explore: dr does not explore the real system");
  }
  const std::uint64_t seed = SeedOf(o, cfg);
  const auto env = cfg.MakeEnv();
  RealWorld real(env, cfg.ThetaStar(*env));
  const ExploreOutcome ex = RunExplore(cfg, *env, method, seed, real);
  fs::create_directories(cfg.out);
  WriteJsonFile(cfg.out / "config.json", cfg.source);
  WriteJsonFile(cfg.out / "policy_explore.json", ToJson(ex.policy));
  json summary = {{"seed", seed}, {"method", ToString(method)}};
  if (ex.objective) summary["exploration_objective"] = *ex.objective;
  if (ex.real) {
    WriteJsonFile(cfg.out / "trajectory_real.json", ToJson(*ex.real));
    summary["trajectory"] = (cfg.out / "trajectory_real.json").string();
  }
  Emit(summary);
  return 0;
}

int Sysid(const Options& o) {
  const ExperimentConfig cfg = Load(o);
  const auto env = cfg.MakeEnv();
  const Trajectory traj = TrajectoryFromJson(ReadJsonFile(o.trajectory));
  if (traj.env_id != env->id() || traj.phase != Phase::kExplore) {
    throw ConfigError("sysid: trajectory is not an exploration episode of " +
                      env->id());
  }
  const IdentificationResult id =
      RunIdentify(cfg, *env, traj, SeedOf(o, cfg));
  fs::create_directories(cfg.out);
  WriteJsonFile(cfg.out / "identification.json", ToJson(id));
  Emit({{"theta_hat", ToJson(id.point_estimate)["values"]},
        {"discrepancy", id.discrepancy},
        {"identifiable", id.identifiable}});
  return 0;
}

int Task(const Options& o) {
  const ExperimentConfig cfg = Load(o);
  const Method method = MethodOf(o, Method::kAsid);
  const std::uint64_t seed = SeedOf(o, cfg);
  const auto env = cfg.MakeEnv();
  std::optional<ParamVector> theta_hat;
  if (method != Method::kDr) {
    if (o.identification.empty()) {
      throw ConfigError("task: --identification is required for method " +
                        ToString(method));
    }
    theta_hat = IdentificationFromJson(ReadJsonFile(o.identification), *env)
                    .point_estimate;
  }
  const Policy oracle = TrainOracle(cfg, *env, seed);
  const TaskReport rep = RunTask(cfg, *env, method, seed, theta_hat, oracle);
  fs::create_directories(cfg.out);
  json j = ToJson(rep);
  j["seed"] = seed;
  j["method"] = ToString(method);
  WriteJsonFile(cfg.out / "task_report.json", j);
  WriteJsonFile(cfg.out / "policy_task.json", ToJson(rep.policy));
  j.erase("policy");
  Emit(j);
  return 0;
}

int Pipeline(const Options& o) {
  ExperimentConfig cfg = Load(o);
  if (o.seed) cfg.seeds = {*o.seed};
  if (!o.method.empty()) cfg.methods = {ParseMethod(o.method)};
  const PipelineReport rep = RunPipeline(cfg);
  Emit(rep.summary);
  return 0;
}

int Sweep(const Options& o) {
  const ExperimentConfig cfg = Load(o);
  const SweepResult r = RunSweep(cfg);
  WriteSweep(r, cfg.out);
  Emit({{"cells", r.table.rows.size()}, {"out", cfg.out.string()}});
  return 0;
}

int Render(const Options& o) {
  const ResultTable t = ReadCsv(o.table);
  fs::path out = o.out;
  if (out.empty()) {
    out = fs::path(o.table).replace_extension("");
    out += "_" + o.metric + ".svg";
  }
  const std::string svg = RenderHeatmap(t, o.metric);
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + out.string());
  f << svg;
  Emit({{"svg", out.string()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active exploration for system identification on toy systems"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool method) {
    sub->add_option("--config", o.config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "experiment seed (default: first seed)");
    sub->add_option("--out", o.out, "output directory (default: config out)");
    if (method) {
      sub->add_option("--method", o.method, "asid | dr | random")
          ->check(CLI::IsMember({"asid", "dr", "random"}));
    }
  };

  auto* explore = app.add_subcommand("explore", "train pi_exp, play it once");
  common(explore, true);
  auto* sysid = app.add_subcommand("sysid", "identify theta from a trajectory");
  common(sysid, false);
  sysid->add_option("--trajectory", o.trajectory, "trajectory record")
      ->required()
      ->check(CLI::ExistingFile);
  auto* task = app.add_subcommand("task", "train and evaluate a task policy");
  common(task, true);
  task->add_option("--identification", o.identification,
                   "identification record (asid, random)")
      ->check(CLI::ExistingFile);
  auto* pipeline = app.add_subcommand("pipeline", "full protocol + baselines");
  common(pipeline, true);
  auto* sweep = app.add_subcommand("sweep", "exploration coverage sweep");
  common(sweep, false);
  auto* render = app.add_subcommand("render", "SVG heatmap of a result table");
  render->add_option("--table", o.table, "CSV table")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--metric", o.metric, "metric column")->required();
  render->add_option("--out", o.out, "SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail("usage", e.what(), 64);
  }

  try {
    if (*explore) return Explore(o);
    if (*sysid) return Sysid(o);
    if (*task) return Task(o);
    if (*pipeline) return Pipeline(o);
    if (*sweep) return Sweep(o);
    return Render(o);
  } catch (const ConfigIssues& e) {
    return Fail("config", e.what(), 2, e.issues());
  } catch (const ConfigError& e) {
    return Fail("config", e.what(), 2);
  } catch (const DomainError& e) {
    return Fail("domain", e.what(), 3);
  } catch (const ProtocolError& e) {
    return Fail("protocol", e.what(), 4);
  } catch (const std::exception& e) {
    return Fail("runtime", e.what(), 1);
  }
}
