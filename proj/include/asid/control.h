#ifndef ASID_CONTROL_H_
#define ASID_CONTROL_H_

#include <cstdint>

#include "asid/cem.h"
#include "asid/envlab.h"
#include "asid/policy.h"

namespace asid {

struct TaskReport {
  Policy policy;
  double value_real = 0.0;    // mean task return on theta*
  double value_oracle = 0.0;  // same episodes, oracle policy
  double suboptimality = 0.0;
  // Standard error of the paired per-episode difference oracle - policy.
  double suboptimality_se = 0.0;
  double success_rate = 0.0;
  double task_error = 0.0;  // mean TaskError over episodes
  int episodes = 0;
};

// CEM on the negated mean task return under theta_hat, over n_rollouts
// rollouts whose seeds are fixed for the whole search.
Policy TrainTaskPolicy(const Environment& env, const ParamVector& theta_hat,
                       PolicyKind kind, const CemConfig& cem,
                       int n_rollouts = 8);

// As TrainTaskPolicy but the objective averages over a fixed set of
// n_rollouts parameter samples from q0.
Policy TrainDrPolicy(const Environment& env, const ParamDistribution& q0,
                     PolicyKind kind, const CemConfig& cem,
                     int n_rollouts = 8);

// Monte-Carlo evaluation on theta*. Episode i uses seed (seed, i) for both
// the policy and the oracle, so the comparison is paired.
TaskReport Evaluate(const Policy& policy, const Environment& env,
                    const ParamVector& theta_star, int n_episodes,
                    std::uint64_t seed, const Policy& oracle);

// Trains the oracle with TrainTaskPolicy(env, theta_star, ...) first.
TaskReport Evaluate(const Policy& policy, const Environment& env,
                    const ParamVector& theta_star, int n_episodes,
                    std::uint64_t seed, const CemConfig& oracle_cem,
                    int n_rollouts = 8);

}  // namespace asid

#endif  // ASID_CONTROL_H_
