#include "asid/envlab.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "asid/error.h"
#include "asid/random.h"

namespace asid {
namespace {

bool AllFinite(const Eigen::VectorXd& v) { return v.allFinite(); }

std::string Describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// ParamVector / ParamDistribution

void ParamVector::Validate() const {
  const auto d = values.size();
  if (d < 1) throw ConfigError("ParamVector: dimension must be >= 1");
  if (lower.size() != d || upper.size() != d ||
      static_cast<Eigen::Index>(names.size()) != d) {
    throw ConfigError("ParamVector: values, names and bounds differ in size");
  }
  std::set<std::string> seen(names.begin(), names.end());
  if (static_cast<Eigen::Index>(seen.size()) != d) {
    throw ConfigError("ParamVector: parameter names must be unique");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!std::isfinite(values[i]) || values[i] < lower[i] ||
        values[i] > upper[i]) {
      std::ostringstream os;
      os << "ParamVector: " << names[i] << " = " << values[i]
         << " outside [" << lower[i] << ", " << upper[i] << "]";
      throw ConfigError(os.str());
    }
  }
}

ParamVector ParamVector::WithValues(const Eigen::VectorXd& v) const {
  ParamVector out = *this;
  out.values = v;
  out.Validate();
  return out;
}

void ParamDistribution::Validate() const {
  const auto d = mean.size();
  if (d < 1) throw ConfigError("ParamDistribution: dimension must be >= 1");
  if (std.size() != d || lower.size() != d || upper.size() != d) {
    throw ConfigError("ParamDistribution: mean, std and bounds differ in size");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(std[i] > 0.0) || !std::isfinite(std[i])) {
      throw ConfigError("ParamDistribution: std must be positive and finite");
    }
    if (!(lower[i] <= upper[i])) {
      throw ConfigError("ParamDistribution: lower > upper");
    }
    if (!std::isfinite(mean[i])) {
      throw ConfigError("ParamDistribution: non-finite mean");
    }
  }
}

ParamDistribution ParamDistribution::Degenerate(const ParamVector& theta) {
  ParamDistribution q;
  q.mean = theta.values;
  q.std = Eigen::VectorXd::Constant(theta.size(), 1e-12);
  q.lower = theta.lower;
  q.upper = theta.upper;
  return q;
}

std::string_view ToString(Phase phase) {
  return phase == Phase::kExplore ? "explore" : "task";
}

Phase ParsePhase(std::string_view name) {
  if (name == "explore") return Phase::kExplore;
  if (name == "task") return Phase::kTask;
  throw ConfigError("unknown phase '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// EnvSpec / Trajectory

void EnvSpec::Validate() const {
  if (env_id.empty()) throw ConfigError("EnvSpec: empty env_id");
  if (n_s < 1 || n_a < 1 || d < 1) {
    throw ConfigError("EnvSpec " + env_id + ": dimensions must be >= 1");
  }
  if (horizon < 1) throw ConfigError("EnvSpec " + env_id + ": horizon < 1");
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) {
    throw ConfigError("EnvSpec " + env_id + ": sigma_w must be >= 0");
  }
  if (action_low.size() != n_a || action_high.size() != n_a) {
    throw ConfigError("EnvSpec " + env_id + ": action bounds size != n_a");
  }
  for (int i = 0; i < n_a; ++i) {
    if (!(action_low[i] < action_high[i])) {
      throw ConfigError("EnvSpec " + env_id +
                        ": action_low must be < action_high");
    }
  }
  if (static_cast<int>(param_names.size()) != d || param_lower.size() != d ||
      param_upper.size() != d || param_default.size() != d) {
    throw ConfigError("EnvSpec " + env_id + ": parameter metadata size != d");
  }
  DefaultParams().Validate();
}

double EnvSpec::Extra(const std::string& key) const {
  auto it = extras.find(key);
  if (it == extras.end()) {
    throw ConfigError("EnvSpec " + env_id + ": missing extra '" + key + "'");
  }
  return it->second;
}

ParamVector EnvSpec::MakeParams(const Eigen::VectorXd& values) const {
  ParamVector p{values, param_names, param_lower, param_upper};
  p.Validate();
  return p;
}

void Trajectory::Validate() const {
  if (horizon < 1 || static_cast<int>(states.size()) != horizon + 1 ||
      static_cast<int>(actions.size()) != horizon) {
    throw DomainError("Trajectory: lengths inconsistent with horizon");
  }
  for (const auto& s : states) {
    if (!AllFinite(s)) throw DomainError("Trajectory: non-finite state");
  }
}

Trajectory Trajectory::Prefix(int steps) const {
  if (steps < 1 || steps > horizon) {
    throw DomainError("Trajectory::Prefix: steps out of range");
  }
  Trajectory t = *this;
  t.horizon = steps;
  t.states.resize(steps + 1);
  t.actions.resize(steps);
  return t;
}

// ---------------------------------------------------------------------------
// Environment

Environment::Environment(EnvSpec explore, EnvSpec task)
    : explore_(std::move(explore)), task_(std::move(task)) {
  explore_.Validate();
  task_.Validate();
  if (explore_.d != task_.d || explore_.env_id != task_.env_id) {
    throw ConfigError("Environment: explore/task specs disagree");
  }
}

Eigen::VectorXd Environment::InitialState(Phase phase,
                                          std::uint64_t /*seed*/) const {
  return Eigen::VectorXd::Zero(spec(phase).n_s);
}

EpisodeSummary Environment::Summarize(const Trajectory& traj) const {
  EpisodeSummary out;
  out.displacement = (traj.states.back() - traj.states.front()).norm();
  return out;
}

// ---------------------------------------------------------------------------
// Transitions

namespace {

void CheckParams(const EnvSpec& spec, const ParamVector& theta) {
  if (theta.size() != spec.d) {
    std::ostringstream os;
    os << spec.env_id << ": expected " << spec.d << " parameters, got "
       << theta.size();
    throw ConfigError(os.str());
  }
  for (int i = 0; i < spec.d; ++i) {
    if (!(theta.values[i] >= theta.lower[i] &&
          theta.values[i] <= theta.upper[i])) {
      throw ConfigError(spec.env_id + ": parameter " + theta.names[i] +
                        " outside its bounds");
    }
  }
}

Eigen::VectorXd ClipAction(const EnvSpec& spec, const Eigen::VectorXd& a) {
  return a.cwiseMax(spec.action_low).cwiseMin(spec.action_high);
}

}  // namespace

Eigen::VectorXd Step(const Environment& env, Phase phase,
                     const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                     const ParamVector& theta, const Eigen::VectorXd& w) {
  const EnvSpec& spec = env.spec(phase);
  if (s.size() != spec.n_s || a.size() != spec.n_a || w.size() != spec.n_s) {
    throw ConfigError(spec.env_id + ": state/action/noise dimension mismatch");
  }
  if (!AllFinite(s)) {
    throw DomainError(spec.env_id + ": non-finite state " + Describe(s));
  }
  CheckParams(spec, theta);
  return env.Nominal(phase, s, ClipAction(spec, a), theta.values) + w;
}

Trajectory Rollout(const Environment& env, const Policy& policy,
                   const ParamVector& theta, std::uint64_t seed, Phase phase,
                   const std::optional<Eigen::VectorXd>& initial_state) {
  const EnvSpec& spec = env.spec(phase);
  policy.CheckCompatible(spec);
  CheckParams(spec, theta);

  Trajectory traj;
  traj.horizon = spec.horizon;
  traj.env_id = spec.env_id;
  traj.seed = seed;
  traj.phase = phase;
  traj.states.reserve(spec.horizon + 1);
  traj.actions.reserve(spec.horizon);

  Eigen::VectorXd s = initial_state ? *initial_state
                                    : env.InitialState(phase, seed);
  if (s.size() != spec.n_s) {
    throw ConfigError(spec.env_id + ": initial state dimension mismatch");
  }
  traj.states.push_back(s);
  for (int h = 0; h < spec.horizon; ++h) {
    Eigen::VectorXd a = policy.Act(h, s, spec);
    s = Step(env, phase, s, a, theta,
             ProcessNoise(seed, h, spec.n_s, spec.sigma_w));
    traj.actions.push_back(std::move(a));
    traj.states.push_back(s);
  }
  return traj;
}

Trajectory Replay(const Environment& env,
                  const std::vector<Eigen::VectorXd>& actions,
                  const ParamVector& theta, const Eigen::VectorXd& s1,
                  std::uint64_t seed, Phase phase) {
  const EnvSpec& spec = env.spec(phase);
  if (static_cast<int>(actions.size()) != spec.horizon) {
    throw ConfigError(spec.env_id + ": replay needs exactly horizon actions");
  }
  if (s1.size() != spec.n_s) {
    throw ConfigError(spec.env_id + ": initial state dimension mismatch");
  }
  CheckParams(spec, theta);

  Trajectory traj;
  traj.horizon = spec.horizon;
  traj.env_id = spec.env_id;
  traj.seed = seed;
  traj.phase = phase;
  traj.states.reserve(spec.horizon + 1);
  traj.actions.reserve(spec.horizon);

  Eigen::VectorXd s = s1;
  traj.states.push_back(s);
  for (int h = 0; h < spec.horizon; ++h) {
    if (actions[h].size() != spec.n_a) {
      throw ConfigError(spec.env_id + ": replay action dimension mismatch");
    }
    Eigen::VectorXd a = ClipAction(spec, actions[h]);
    s = Step(env, phase, s, a, theta,
             ProcessNoise(seed, h, spec.n_s, spec.sigma_w));
    traj.actions.push_back(std::move(a));
    traj.states.push_back(s);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Sampling

Eigen::VectorXd SampleTruncatedGaussian(const ParamDistribution& q, Rng& rng) {
  q.Validate();
  const boost::math::normal_distribution<double> unit;
  Eigen::VectorXd out(q.size());
  for (int i = 0; i < q.size(); ++i) {
    const double mu = q.mean[i];
    const double sd = q.std[i];
    const double u = rng.Uniform();
    double alpha = (q.lower[i] - mu) / sd;
    double beta = (q.upper[i] - mu) / sd;
    // Work in the lower tail, where the CDF keeps its precision.
    const bool mirror = alpha > 0.0;
    if (mirror) {
      const double a = alpha;
      alpha = -beta;
      beta = -a;
    }
    const double lo = boost::math::cdf(unit, std::max(alpha, -37.0));
    const double hi = boost::math::cdf(unit, std::min(beta, 37.0));
    if (!(hi - lo > 1e-300)) {
      // No representable mass inside the box: the mean, clipped.
      out[i] = std::clamp(mu, q.lower[i], q.upper[i]);
      continue;
    }
    double p = lo + u * (hi - lo);
    p = std::clamp(p, std::numeric_limits<double>::min(),
                   1.0 - std::numeric_limits<double>::epsilon());
    double z = boost::math::quantile(unit, p);
    if (mirror) z = -z;
    out[i] = std::clamp(mu + sd * z, q.lower[i], q.upper[i]);
  }
  return out;
}

ParamVector SampleParams(const ParamDistribution& q, const ParamVector& like,
                         Rng& rng) {
  if (q.size() != like.size()) {
    throw ConfigError("SampleParams: distribution/parameter size mismatch");
  }
  ParamVector out = like;
  // Distribution truncation may be tighter than the parameter box, never
  // wider.
  out.values = SampleTruncatedGaussian(q, rng)
                   .cwiseMax(like.lower)
                   .cwiseMin(like.upper);
  return out;
}

}  // namespace asid
