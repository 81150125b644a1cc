#include "asid/explore.h"

#include <utility>

#include "asid/error.h"
#include "asid/random.h"

namespace asid {

PolicyKind DefaultExplorationKind(std::string_view env_id) {
  if (env_id == "pointmass-friction" || env_id == "multi-region") {
    return PolicyKind::kLinearFeedback;
  }
  return PolicyKind::kOpenLoop;
}

PolicyKind DefaultTaskKind(std::string_view env_id) {
  return DefaultExplorationKind(env_id);
}

ExplorationResult TrainExplorationPolicy(const Environment& env,
                                         const ParamDistribution& q0,
                                         PolicyKind kind,
                                         const CemConfig& cem,
                                         const AOptimalConfig& fisher) {
  fisher.Validate();
  q0.Validate();
  if (q0.size() != env.spec().d) {
    throw ConfigError("explore: prior dimension does not match env");
  }
  const Policy zero = Policy::Zero(kind, env.spec());
  const std::uint64_t crn_seed = DeriveSeed(cem.seed, "explore-objective");
  CemResult search = CemMinimize(
      [&](const Eigen::VectorXd& params) {
        return AOptimalObjective(zero.WithParams(params), env, q0, fisher,
                                 crn_seed);
      },
      zero.params(), cem);
  Policy best = zero.WithParams(search.best_params);
  const double value = search.best_value;
  return ExplorationResult{std::move(best), value, std::move(search)};
}

Policy RandomPolicy(const Environment& env, std::uint64_t seed, Phase phase) {
  const EnvSpec& spec = env.spec(phase);
  Rng rng(DeriveSeed(seed, Stream::kPolicy));
  Eigen::VectorXd params(static_cast<Eigen::Index>(spec.horizon) * spec.n_a);
  for (int h = 0; h < spec.horizon; ++h) {
    for (int j = 0; j < spec.n_a; ++j) {
      params[h * spec.n_a + j] =
          rng.Uniform(spec.action_low[j], spec.action_high[j]);
    }
  }
  return Policy(PolicyKind::kOpenLoop, spec.horizon, spec.n_s, spec.n_a,
                std::move(params), spec.env_id);
}

}  // namespace asid
