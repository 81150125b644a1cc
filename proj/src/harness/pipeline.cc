#include "asid/harness/pipeline.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "asid/error.h"
#include "asid/explore.h"
#include "asid/harness/records.h"
#include "asid/parallel.h"
#include "asid/random.h"

namespace asid::harness {
namespace {

using nlohmann::json;

std::vector<double> ToStd(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

std::string ExplorationName(const ExperimentConfig& cfg, Method method) {
  switch (method) {
    case Method::kAsid:
      return ToString(cfg.exploration);
    case Method::kRandom:
      return "random";
    case Method::kDr:
      return "none";
  }
  return "?";
}

// The config as it was actually run: effective seeds and methods, without
// the output location (which may legitimately differ between runs).
json EffectiveConfig(const ExperimentConfig& cfg) {
  json j = cfg.source;
  j.erase("out");
  j["seeds"] = cfg.seeds;
  j["methods"] = json::array();
  for (Method m : cfg.methods) j["methods"].push_back(ToString(m));
  return j;
}

struct Stat {
  std::vector<double> xs;
  json ToJson() const {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {{"mean", mean}, {"se", se}, {"n", xs.size()}};
  }
};

}  // namespace

RealWorld::RealWorld(std::shared_ptr<const Environment> env,
                     ParamVector theta_star)
    : env_(std::move(env)), theta_star_(std::move(theta_star)) {
  theta_star_.Validate();
}

Trajectory RealWorld::Rollout(const Policy& policy, std::uint64_t seed) {
  if (used_) {
    throw ProtocolError("real environment already played its one episode");
  }
  used_ = true;
  return asid::Rollout(*env_, policy, theta_star_, seed, Phase::kExplore);
}

std::uint64_t StageSeed(std::uint64_t seed, const char* stage) {
  return DeriveSeed(seed, stage);
}

ExploreOutcome RunExplore(const ExperimentConfig& cfg, const Environment& env,
                          Method method, std::uint64_t seed,
                          RealWorld& real) {
  const std::string kind = ExplorationName(cfg, method);
  if (kind == "none") {
    return {Policy::Zero(cfg.ExplorationKind(), env.spec()), std::nullopt,
            std::nullopt};
  }
  ExploreOutcome out{Policy::Zero(PolicyKind::kOpenLoop, env.spec()),
                     std::nullopt, std::nullopt};
  if (kind == "fisher") {
    CemConfig cem = cfg.cem_explore;
    cem.seed = StageSeed(seed, "explore");
    const ParamDistribution q0 = cfg.Prior(env);
    ExplorationResult r = TrainExplorationPolicy(
        env, q0, cfg.ExplorationKind(), cem, cfg.AOptimal());
    out.policy = r.policy;
    out.objective = r.objective;
  } else {
    out.policy = RandomPolicy(env, StageSeed(seed, "random-policy"));
  }
  out.real = real.Rollout(out.policy, StageSeed(seed, "real"));
  return out;
}

IdentificationResult RunIdentify(const ExperimentConfig& cfg,
                                 const Environment& env,
                                 const std::optional<Trajectory>& real,
                                 std::uint64_t seed) {
  const ParamDistribution q0 = cfg.Prior(env);
  if (!real) {
    IdentificationResult id{
        env.spec().MakeParams(q0.mean.cwiseMax(env.spec().param_lower)
                                  .cwiseMin(env.spec().param_upper)),
        q0};
    id.identifiable = false;
    return id;
  }
  CemConfig cem = cfg.cem_sysid;
  cem.seed = StageSeed(seed, "sysid");
  return Identify(*real, env, q0, cem, cfg.sysid_noise_draws);
}

Policy TrainOracle(const ExperimentConfig& cfg, const Environment& env,
                   std::uint64_t seed) {
  CemConfig cem = cfg.cem_task;
  cem.seed = StageSeed(seed, "oracle");
  return TrainTaskPolicy(env, cfg.ThetaStar(env), cfg.TaskKind(), cem,
                         cfg.task_rollouts);
}

TaskReport RunTask(const ExperimentConfig& cfg, const Environment& env,
                   Method method, std::uint64_t seed,
                   const std::optional<ParamVector>& theta_hat,
                   const Policy& oracle) {
  CemConfig cem = cfg.cem_task;
  cem.seed = StageSeed(seed, "task");
  Policy policy = Policy::Zero(cfg.TaskKind(), env.spec(Phase::kTask));
  if (method == Method::kDr) {
    policy = TrainDrPolicy(env, cfg.Prior(env), cfg.TaskKind(), cem,
                           cfg.task_rollouts);
  } else {
    if (!theta_hat) {
      throw ConfigError("task: method " + ToString(method) +
                        " needs an identified parameter");
    }
    policy = TrainTaskPolicy(env, *theta_hat, cfg.TaskKind(), cem,
                             cfg.task_rollouts);
  }
  return Evaluate(policy, env, cfg.ThetaStar(env), cfg.eval_episodes,
                  StageSeed(seed, "evaluation"), oracle);
}

json ToJson(const MethodRecord& r) {
  json j;
  j["seed"] = r.seed;
  j["method"] = ToString(r.method);
  j["exploration"] = r.exploration;
  j["status"] = r.ok ? "ok" : "error";
  j["theta_star"] = r.theta_star;
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["theta_hat"] = r.theta_hat;
  j["abs_error"] = r.abs_error;
  if (r.exploration_objective) {
    j["exploration_objective"] = *r.exploration_objective;
  }
  if (r.discrepancy) j["discrepancy"] = *r.discrepancy;
  j["identifiable"] = r.identifiable;
  j["value_real"] = r.value_real;
  j["value_oracle"] = r.value_oracle;
  j["suboptimality"] = r.suboptimality;
  j["suboptimality_se"] = r.suboptimality_se;
  j["success_rate"] = r.success_rate;
  j["task_error"] = r.task_error;
  j["episodes"] = r.episodes;
  j["task_policy"] = r.task_policy;
  return j;
}

MethodRecord MethodRecordFromJson(const json& j) {
  MethodRecord r;
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    r.method = ParseMethod(j.at("method").get<std::string>());
    r.exploration = j.at("exploration").get<std::string>();
    r.ok = j.at("status").get<std::string>() == "ok";
    r.theta_star = j.at("theta_star").get<std::vector<double>>();
    if (!r.ok) {
      r.error = j.at("error").get<std::string>();
      return r;
    }
    r.theta_hat = j.at("theta_hat").get<std::vector<double>>();
    r.abs_error = j.at("abs_error").get<std::vector<double>>();
    if (j.contains("exploration_objective")) {
      r.exploration_objective = j["exploration_objective"].get<double>();
    }
    if (j.contains("discrepancy")) r.discrepancy = j["discrepancy"].get<double>();
    r.identifiable = j.at("identifiable").get<bool>();
    r.value_real = j.at("value_real").get<double>();
    r.value_oracle = j.at("value_oracle").get<double>();
    r.suboptimality = j.at("suboptimality").get<double>();
    r.suboptimality_se = j.at("suboptimality_se").get<double>();
    r.success_rate = j.at("success_rate").get<double>();
    r.task_error = j.at("task_error").get<double>();
    r.episodes = j.at("episodes").get<int>();
    r.task_policy = j.at("task_policy").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("result record: ") + e.what());
  }
  return r;
}

std::vector<MethodRecord> RunSeed(const ExperimentConfig& cfg,
                                  std::uint64_t seed) {
  const auto env = cfg.MakeEnv();
  const ParamVector theta_star = cfg.ThetaStar(*env);
  std::optional<Policy> oracle;
  std::string oracle_error;
  try {
    oracle = TrainOracle(cfg, *env, seed);
  } catch (const std::exception& e) {
    oracle_error = std::string("oracle: ") + e.what();
  }

  std::vector<MethodRecord> out;
  for (Method method : cfg.methods) {
    MethodRecord r;
    r.seed = seed;
    r.method = method;
    r.exploration = ExplorationName(cfg, method);
    r.theta_star = ToStd(theta_star.values);
    try {
      if (!oracle) throw std::runtime_error(oracle_error);
      std::optional<ParamVector> theta_hat;
      if (method != Method::kDr) {
        RealWorld real(env, theta_star);
        ExploreOutcome ex = RunExplore(cfg, *env, method, seed, real);
        r.exploration_objective = ex.objective;
        IdentificationResult id = RunIdentify(cfg, *env, ex.real, seed);
        if (ex.real) r.discrepancy = id.discrepancy;
        r.identifiable = id.identifiable;
        theta_hat = id.point_estimate;
        r.theta_hat = ToStd(id.point_estimate.values);
      } else {
        r.theta_hat = ToStd(cfg.Prior(*env).mean);
      }
      for (std::size_t i = 0; i < r.theta_hat.size(); ++i) {
        r.abs_error.push_back(std::abs(r.theta_hat[i] - r.theta_star[i]));
      }
      const TaskReport rep = RunTask(cfg, *env, method, seed, theta_hat,
                                     *oracle);
      r.value_real = rep.value_real;
      r.value_oracle = rep.value_oracle;
      r.suboptimality = rep.suboptimality;
      r.suboptimality_se = rep.suboptimality_se;
      r.success_rate = rep.success_rate;
      r.task_error = rep.task_error;
      r.episodes = rep.episodes;
      r.task_policy = ToStd(rep.policy.params());
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
      r.theta_hat.clear();
      r.abs_error.clear();
    }
    out.push_back(std::move(r));
  }
  return out;
}

json Summarize(const ExperimentConfig& cfg,
               const std::vector<MethodRecord>& records) {
  const auto env = cfg.MakeEnv();
  json s;
  s["env_id"] = cfg.env_id;
  s["sigma_w"] = {{"explore", env->spec(Phase::kExplore).sigma_w},
                  {"task", env->spec(Phase::kTask).sigma_w}};
  s["theta_star"] = cfg.theta_star;
  s["seed_count"] = cfg.seeds.size();
  s["exploration"] = ToString(cfg.exploration);
  s["methods"] = json::object();
  for (Method m : cfg.methods) {
    std::map<std::string, Stat> stats;
    int ok = 0;
    int failed = 0;
    for (const MethodRecord& r : records) {
      if (r.method != m) continue;
      if (!r.ok) {
        ++failed;
        continue;
      }
      ++ok;
      stats["success_rate"].xs.push_back(r.success_rate);
      stats["task_error"].xs.push_back(r.task_error);
      stats["value_real"].xs.push_back(r.value_real);
      stats["suboptimality"].xs.push_back(r.suboptimality);
      double mean_abs = 0.0;
      for (double e : r.abs_error) mean_abs += e;
      if (!r.abs_error.empty()) {
        stats["abs_error"].xs.push_back(mean_abs /
                                        static_cast<double>(r.abs_error.size()));
      }
      if (r.exploration_objective) {
        stats["exploration_objective"].xs.push_back(*r.exploration_objective);
      }
      if (r.discrepancy) stats["discrepancy"].xs.push_back(*r.discrepancy);
    }
    json mj;
    mj["ok"] = ok;
    mj["errors"] = failed;
    for (const auto& [name, st] : stats) mj[name] = st.ToJson();
    s["methods"][ToString(m)] = mj;
  }
  return s;
}

std::vector<MethodRecord> ReadRecords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<MethodRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(MethodRecordFromJson(json::parse(line)));
  }
  return out;
}

namespace {

// Keeps the longest prefix of complete seeds that matches the expected
// (seed, method) order and truncates everything after it. Returns the number
// of seeds already done.
std::size_t ResumePoint(const ExperimentConfig& cfg,
                        const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return 0;
  std::ifstream in(path, std::ios::binary);
  const std::size_t per_seed = cfg.methods.size();
  std::size_t done = 0;
  std::size_t in_group = 0;
  std::uintmax_t keep = 0;
  std::uintmax_t offset = 0;
  std::string line;
  while (done < cfg.seeds.size() && std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: an interrupted write
    offset += line.size() + 1;
    MethodRecord r;
    try {
      r = MethodRecordFromJson(json::parse(line));
    } catch (const std::exception&) {
      break;
    }
    if (r.seed != cfg.seeds[done] || r.method != cfg.methods[in_group]) break;
    if (++in_group == per_seed) {
      in_group = 0;
      ++done;
      keep = offset;
    }
  }
  in.close();
  std::filesystem::resize_file(path, keep);
  return done;
}

}  // namespace

PipelineReport RunPipeline(const ExperimentConfig& cfg) {
  PipelineReport report;
  const int n = static_cast<int>(cfg.seeds.size());
  if (cfg.out.empty()) {
    std::vector<std::vector<MethodRecord>> per_seed(n);
    ParallelFor(n, cfg.threads,
                [&](int i) { per_seed[i] = RunSeed(cfg, cfg.seeds[i]); });
    for (auto& rs : per_seed) {
      for (auto& r : rs) report.records.push_back(std::move(r));
    }
    report.summary = Summarize(cfg, report.records);
    return report;
  }

  std::filesystem::create_directories(cfg.out);
  const json echo = EffectiveConfig(cfg);
  const auto config_path = cfg.out / "config.json";
  const auto records_path = cfg.out / "records.jsonl";
  if (std::filesystem::exists(config_path)) {
    if (ReadJsonFile(config_path) != echo) {
      throw ConfigError(cfg.out.string() +
                        " holds results of a different config; use a new "
                        "output directory");
    }
  } else {
    if (std::filesystem::exists(records_path)) {
      std::filesystem::remove(records_path);
    }
    WriteJsonFile(config_path, echo);
  }

  const std::size_t done = ResumePoint(cfg, records_path);
  const int todo = n - static_cast<int>(done);
  {
    OrderedSink sink(records_path, static_cast<std::size_t>(todo));
    ParallelFor(todo, cfg.threads, [&](int k) {
      const auto records = RunSeed(cfg, cfg.seeds[done + k]);
      std::vector<std::string> lines;
      for (const auto& r : records) lines.push_back(ToJson(r).dump());
      sink.Submit(static_cast<std::size_t>(k), std::move(lines));
    });
  }
  report.records = ReadRecords(records_path);
  report.summary = Summarize(cfg, report.records);
  WriteJsonFile(cfg.out / "summary.json", report.summary);
  return report;
}

}  // namespace asid::harness
