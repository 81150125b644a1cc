#include "asid/sysid.h"

#include <cmath>
#include <limits>

#include "asid/error.h"
#include "asid/random.h"

namespace asid {

Eigen::VectorXd DiscrepancyWeights(const Trajectory& real,
                                   const Environment& env) {
  const EnvSpec& spec = env.spec(real.phase);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(spec.n_s);
  if (!spec.normalize_discrepancy) return w;
  const double n = static_cast<double>(real.states.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(spec.n_s);
  for (const auto& s : real.states) mean += s;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(spec.n_s);
  for (const auto& s : real.states) var += (s - mean).cwiseAbs2();
  var /= n;
  for (int i = 0; i < spec.n_s; ++i) {
    // A dimension that never moved keeps unit weight.
    w[i] = var[i] > 1e-24 ? 1.0 / var[i] : 1.0;
  }
  return w;
}

double TrajectoryDiscrepancy(const Trajectory& real, const ParamVector& theta,
                             const Environment& env, int n_noise_draws,
                             std::uint64_t seed) {
  const EnvSpec& spec = env.spec(real.phase);
  if (real.env_id != spec.env_id) {
    throw ConfigError("sysid: trajectory from " + real.env_id +
                      " used with env " + spec.env_id);
  }
  if (n_noise_draws < 1) throw ConfigError("sysid: n_noise_draws < 1");
  real.Validate();
  if (real.states.front().size() != spec.n_s) {
    throw ConfigError("sysid: trajectory state dimension mismatch");
  }
  const Eigen::VectorXd weights = DiscrepancyWeights(real, env);
  double total = 0.0;
  for (int k = 0; k < n_noise_draws; ++k) {
    const Trajectory sim =
        Replay(env, real.actions, theta, real.states.front(),
               DeriveSeed(seed, Stream::kReplay, k), real.phase);
    for (int h = 0; h <= real.horizon; ++h) {
      total += weights.dot((real.states[h] - sim.states[h]).cwiseAbs2());
    }
  }
  return total / n_noise_draws;
}

IdentificationResult Identify(const Trajectory& real, const Environment& env,
                              const ParamDistribution& prior,
                              const CemConfig& cem, int n_noise_draws) {
  prior.Validate();
  const EnvSpec& spec = env.spec(real.phase);
  if (prior.size() != spec.d) {
    throw ConfigError("sysid: prior dimension does not match env");
  }
  const ParamVector like = spec.DefaultParams();
  CemConfig cfg = cem;
  cfg.init_std = prior.std;
  cfg.lower = prior.lower.cwiseMax(like.lower);
  cfg.upper = prior.upper.cwiseMin(like.upper);
  const std::uint64_t noise_seed = DeriveSeed(cem.seed, "sysid-replay");

  const auto objective = [&](const Eigen::VectorXd& theta) {
    return TrajectoryDiscrepancy(real, like.WithValues(theta), env,
                                 n_noise_draws, noise_seed);
  };
  const CemResult search = CemMinimize(objective, prior.mean, cfg);

  IdentificationResult out;
  out.point_estimate = like.WithValues(search.best_params);
  out.posterior.mean = search.mean;
  out.posterior.std = search.std.cwiseMax(1e-12);
  out.posterior.lower = cfg.lower;
  out.posterior.upper = cfg.upper;
  out.discrepancy = search.best_value;
  out.evaluations = search.evaluations;
  bool any_informative = false;
  for (const auto& it : search.history) any_informative |= !it.flat;
  out.identifiable = any_informative;
  return out;
}

}  // namespace asid
