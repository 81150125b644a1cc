#ifndef ASID_HARNESS_PIPELINE_H_
#define ASID_HARNESS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "asid/control.h"
#include "asid/envlab.h"
#include "asid/harness/config.h"
#include "asid/policy.h"
#include "asid/sysid.h"

namespace asid::harness {

// The held-out system. theta* is not observable through the handle, and only
// one episode may be played on it.
class RealWorld {
 public:
  RealWorld(std::shared_ptr<const Environment> env, ParamVector theta_star);

  // Throws ProtocolError on a second call.
  Trajectory Rollout(const Policy& policy, std::uint64_t seed);
  bool used() const { return used_; }

 private:
  std::shared_ptr<const Environment> env_;
  ParamVector theta_star_;
  bool used_ = false;
};

// Stage seeds are derived from the experiment seed so that every stage can
// be rerun on its own and reproduce the pipeline's numbers.
std::uint64_t StageSeed(std::uint64_t seed, const char* stage);

struct ExploreOutcome {
  Policy policy;
  std::optional<double> objective;  // fisher only
  std::optional<Trajectory> real;   // absent for exploration = none
};

// Builds the exploration policy for `method` and plays it once on `real`.
ExploreOutcome RunExplore(const ExperimentConfig& cfg, const Environment& env,
                          Method method, std::uint64_t seed, RealWorld& real);

// Trajectory matching from q0. Exploration none yields theta_hat = q0 mean.
IdentificationResult RunIdentify(const ExperimentConfig& cfg,
                                 const Environment& env,
                                 const std::optional<Trajectory>& real,
                                 std::uint64_t seed);

// Oracle policy trained on theta*; shared by all methods of one seed.
Policy TrainOracle(const ExperimentConfig& cfg, const Environment& env,
                   std::uint64_t seed);

// asid/random train on theta_hat (required); dr trains on q0.
TaskReport RunTask(const ExperimentConfig& cfg, const Environment& env,
                   Method method, std::uint64_t seed,
                   const std::optional<ParamVector>& theta_hat,
                   const Policy& oracle);

struct MethodRecord {
  std::uint64_t seed = 0;
  Method method = Method::kAsid;
  std::string exploration;  // fisher | random | none
  bool ok = false;
  std::string error;
  std::vector<double> theta_star;
  std::vector<double> theta_hat;
  std::vector<double> abs_error;
  std::optional<double> exploration_objective;
  std::optional<double> discrepancy;
  bool identifiable = false;
  double value_real = 0.0;
  double value_oracle = 0.0;
  double suboptimality = 0.0;
  double suboptimality_se = 0.0;
  double success_rate = 0.0;
  double task_error = 0.0;
  int episodes = 0;
  std::vector<double> task_policy;
};

nlohmann::json ToJson(const MethodRecord& r);
MethodRecord MethodRecordFromJson(const nlohmann::json& j);

// Every configured method for one seed; failures become error records.
std::vector<MethodRecord> RunSeed(const ExperimentConfig& cfg,
                                  std::uint64_t seed);

struct PipelineReport {
  std::vector<MethodRecord> records;
  nlohmann::json summary;
};

// Means and standard errors per method over the ok records.
nlohmann::json Summarize(const ExperimentConfig& cfg,
                         const std::vector<MethodRecord>& records);

// Runs all seeds and, when cfg.out is non-empty, writes config.json,
// records.jsonl (resuming any completed seeds already there) and
// summary.json.
PipelineReport RunPipeline(const ExperimentConfig& cfg);

std::vector<MethodRecord> ReadRecords(const std::filesystem::path& path);

}  // namespace asid::harness

#endif  // ASID_HARNESS_PIPELINE_H_
