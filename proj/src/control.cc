#include "asid/control.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "asid/error.h"
#include "asid/random.h"

namespace asid {
namespace {

double MeanReturn(const Environment& env, const Policy& policy,
                  const std::vector<ParamVector>& thetas,
                  const std::vector<std::uint64_t>& seeds) {
  double total = 0.0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    total += env.TaskReturn(
        Rollout(env, policy, thetas[i], seeds[i], Phase::kTask));
  }
  return total / static_cast<double>(seeds.size());
}

Policy Search(const Environment& env, const std::vector<ParamVector>& thetas,
              const std::vector<std::uint64_t>& seeds, PolicyKind kind,
              const CemConfig& cem) {
  const Policy zero = Policy::Zero(kind, env.spec(Phase::kTask));
  const CemResult r = CemMinimize(
      [&](const Eigen::VectorXd& params) {
        return -MeanReturn(env, zero.WithParams(params), thetas, seeds);
      },
      zero.params(), cem);
  return zero.WithParams(r.best_params);
}

std::vector<std::uint64_t> RolloutSeeds(std::uint64_t seed, int n) {
  if (n < 1) throw ConfigError("control: n_rollouts must be >= 1");
  std::vector<std::uint64_t> seeds(n);
  for (int i = 0; i < n; ++i) {
    seeds[i] = DeriveSeed(seed, "task-rollout", i);
  }
  return seeds;
}

}  // namespace

Policy TrainTaskPolicy(const Environment& env, const ParamVector& theta_hat,
                       PolicyKind kind, const CemConfig& cem,
                       int n_rollouts) {
  theta_hat.Validate();
  const auto seeds = RolloutSeeds(cem.seed, n_rollouts);
  const std::vector<ParamVector> thetas(seeds.size(), theta_hat);
  return Search(env, thetas, seeds, kind, cem);
}

Policy TrainDrPolicy(const Environment& env, const ParamDistribution& q0,
                     PolicyKind kind, const CemConfig& cem, int n_rollouts) {
  q0.Validate();
  const auto seeds = RolloutSeeds(cem.seed, n_rollouts);
  const ParamVector like = env.spec(Phase::kTask).DefaultParams();
  std::vector<ParamVector> thetas;
  thetas.reserve(seeds.size());
  for (int i = 0; i < n_rollouts; ++i) {
    Rng rng(DeriveSeed(cem.seed, Stream::kParamSample, i));
    thetas.push_back(SampleParams(q0, like, rng));
  }
  return Search(env, thetas, seeds, kind, cem);
}

TaskReport Evaluate(const Policy& policy, const Environment& env,
                    const ParamVector& theta_star, int n_episodes,
                    std::uint64_t seed, const Policy& oracle) {
  if (n_episodes < 1) throw DomainError("evaluate: n_episodes must be >= 1");
  TaskReport report{policy};
  report.episodes = n_episodes;
  double diff_sum = 0.0;
  double diff_sq = 0.0;
  int successes = 0;
  for (int i = 0; i < n_episodes; ++i) {
    const std::uint64_t s = DeriveSeed(seed, Stream::kEvaluation, i);
    const Trajectory mine = Rollout(env, policy, theta_star, s, Phase::kTask);
    const Trajectory best = Rollout(env, oracle, theta_star, s, Phase::kTask);
    const double v = env.TaskReturn(mine);
    const double vo = env.TaskReturn(best);
    report.value_real += v;
    report.value_oracle += vo;
    report.task_error += env.TaskError(mine);
    successes += env.TaskSuccess(mine) ? 1 : 0;
    diff_sum += vo - v;
    diff_sq += (vo - v) * (vo - v);
  }
  const double n = n_episodes;
  report.value_real /= n;
  report.value_oracle /= n;
  report.task_error /= n;
  report.success_rate = successes / n;
  report.suboptimality = report.value_oracle - report.value_real;
  if (n_episodes > 1) {
    const double mean = diff_sum / n;
    const double var = std::max(0.0, (diff_sq - n * mean * mean) / (n - 1));
    report.suboptimality_se = std::sqrt(var / n);
  }
  return report;
}

TaskReport Evaluate(const Policy& policy, const Environment& env,
                    const ParamVector& theta_star, int n_episodes,
                    std::uint64_t seed, const CemConfig& oracle_cem,
                    int n_rollouts) {
  const Policy oracle =
      TrainTaskPolicy(env, theta_star, policy.kind(), oracle_cem, n_rollouts);
  return Evaluate(policy, env, theta_star, n_episodes, seed, oracle);
}

}  // namespace asid
