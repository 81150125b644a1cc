#ifndef ASID_HARNESS_CONFIG_H_
#define ASID_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "asid/cem.h"
#include "asid/envlab.h"
#include "asid/error.h"
#include "asid/fisher.h"
#include "asid/policy.h"

namespace asid::harness {

// Every problem found while validating a config, reported together.
class ConfigIssues : public ConfigError {
 public:
  explicit ConfigIssues(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

enum class Exploration { kFisher, kRandom, kNone };
std::string ToString(Exploration e);

// Pipeline arms. asid uses the configured exploration; random always explores
// with a random policy; dr skips identification and trains on q0.
enum class Method { kAsid, kRandom, kDr };
std::string ToString(Method m);
Method ParseMethod(const std::string& name);

enum class GridKind { kInitialState, kThetaStar };

struct SweepConfig {
  GridKind grid = GridKind::kInitialState;
  // Initial-state grid: values of state[state_index]. Theta grid: one entry
  // per cell, each of size d.
  std::vector<std::vector<double>> cells;
  int state_index = 0;
  int episodes = 20;
  // Visitation histogram of state[state_index] over [low, high).
  int histogram_bins = 40;
  double histogram_low = 0.0;
  double histogram_high = 1.0;
};

struct ExperimentConfig {
  std::string env_id;
  EnvOverrides env;
  std::vector<double> theta_star;
  std::vector<double> prior_mean;
  std::vector<double> prior_std;
  // Empty = the parameter bounds.
  std::vector<double> prior_lower;
  std::vector<double> prior_upper;

  Exploration exploration = Exploration::kFisher;
  std::optional<PolicyKind> exploration_kind;  // default per env
  std::optional<PolicyKind> task_kind;

  CemConfig cem_explore;
  CemConfig cem_sysid;
  CemConfig cem_task;
  FdConfig fd;
  double ridge = 1e-3;
  int fisher_rollouts = 8;
  std::optional<double> information_scale;
  int sysid_noise_draws = 1;
  int task_rollouts = 8;
  int eval_episodes = 20;

  std::vector<Method> methods = {Method::kAsid, Method::kRandom, Method::kDr};
  std::vector<std::uint64_t> seeds;
  // Seeds run concurrently; records are still written in seed order.
  int threads = 1;
  // Named, pre-registered analysis thresholds (recorded, not interpreted).
  std::map<std::string, double> thresholds;
  std::filesystem::path out = "out";
  std::optional<SweepConfig> sweep;

  // The original document, echoed into the output directory.
  nlohmann::json source;

  std::shared_ptr<const Environment> MakeEnv() const;
  ParamVector ThetaStar(const Environment& env) const;
  ParamDistribution Prior(const Environment& env) const;
  PolicyKind ExplorationKind() const;
  PolicyKind TaskKind() const;
  AOptimalConfig AOptimal() const;
};

// Strict parse: unknown keys, wrong types and inconsistent values are all
// collected and thrown as one ConfigIssues.
ExperimentConfig ParseConfig(const nlohmann::json& doc);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

}  // namespace asid::harness

#endif  // ASID_HARNESS_CONFIG_H_
