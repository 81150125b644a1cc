#ifndef ASID_ENVLAB_H_
#define ASID_ENVLAB_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "asid/policy.h"

namespace asid {

class Rng;

// Physics parameters theta with names and box bounds.
struct ParamVector {
  Eigen::VectorXd values;
  std::vector<std::string> names;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int size() const { return static_cast<int>(values.size()); }
  // Throws ConfigError on size mismatch, duplicate names, d < 1 or values
  // outside [lower, upper].
  void Validate() const;
  // Same names and bounds, new values (validated).
  ParamVector WithValues(const Eigen::VectorXd& v) const;
};

// Truncated diagonal Gaussian over theta.
struct ParamDistribution {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int size() const { return static_cast<int>(mean.size()); }
  void Validate() const;
  // Point mass (std = tiny) at the given parameters.
  static ParamDistribution Degenerate(const ParamVector& theta);
};

// Which variant of an environment is being simulated. The explore phase has
// r = 0 and is what Fisher information and identification see; the task
// phase carries the downstream reward.
enum class Phase { kExplore, kTask };

std::string_view ToString(Phase phase);
Phase ParsePhase(std::string_view name);

struct EnvSpec {
  std::string env_id;
  int n_s = 0;
  int n_a = 0;
  int d = 0;
  int horizon = 0;
  double sigma_w = 0.0;
  Eigen::VectorXd action_low;
  Eigen::VectorXd action_high;
  std::string init_state_sampler_id;

  std::vector<std::string> param_names;
  Eigen::VectorXd param_lower;
  Eigen::VectorXd param_upper;
  Eigen::VectorXd param_default;

  // Per-dimension normalisation of the replay discrepancy (heterogeneous
  // state units).
  bool normalize_discrepancy = false;

  // Environment constants: time step, restitution, geometry, success
  // thresholds.
  std::map<std::string, double> extras;

  void Validate() const;
  double Extra(const std::string& key) const;
  ParamVector MakeParams(const Eigen::VectorXd& values) const;
  ParamVector DefaultParams() const { return MakeParams(param_default); }
};

// tau = (s_1, a_1, ..., s_H, a_H, s_{H+1}).
struct Trajectory {
  std::vector<Eigen::VectorXd> states;   // horizon + 1
  std::vector<Eigen::VectorXd> actions;  // horizon
  int horizon = 0;
  std::string env_id;
  std::uint64_t seed = 0;
  Phase phase = Phase::kExplore;

  // Throws DomainError when lengths disagree or a state is non-finite.
  void Validate() const;
  Trajectory Prefix(int steps) const;
};

// Per-episode quantities used by the exploration analyses.
struct EpisodeSummary {
  bool contact = false;
  double displacement = 0.0;
  // Number of distinct non-start regions the tracked object visited.
  int regions_visited = 0;
};

struct EnvOverrides {
  std::optional<int> horizon;
  std::optional<int> task_horizon;
  std::optional<double> sigma_w;
  std::optional<double> task_sigma_w;
  std::map<std::string, double> extras;
};

// A parametric dynamical system s' = f_theta(s, a) + w. Instances are
// immutable and safe to share across threads.
class Environment {
 public:
  Environment(EnvSpec explore, EnvSpec task);
  virtual ~Environment() = default;

  const EnvSpec& spec(Phase phase = Phase::kExplore) const {
    return phase == Phase::kExplore ? explore_ : task_;
  }
  const std::string& id() const { return explore_.env_id; }

  // Nominal dynamics with the action already clipped.
  virtual Eigen::VectorXd Nominal(Phase phase, const Eigen::VectorXd& s,
                                  const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& theta) const = 0;

  virtual Eigen::VectorXd InitialState(Phase phase,
                                       std::uint64_t seed) const;

  // Downstream task reward accumulated over a task-phase trajectory.
  virtual double TaskReturn(const Trajectory& traj) const = 0;
  // Non-negative task error in task units (|tilt| in degrees, distance to
  // goal, terminal error).
  virtual double TaskError(const Trajectory& traj) const = 0;
  virtual bool TaskSuccess(const Trajectory& traj) const = 0;

  virtual EpisodeSummary Summarize(const Trajectory& traj) const;

 private:
  EnvSpec explore_;
  EnvSpec task_;
};

std::vector<std::string> EnvironmentIds();
EnvSpec DefaultSpec(std::string_view env_id, Phase phase = Phase::kExplore);
// Throws ConfigError on unknown env_id or invalid overrides.
std::shared_ptr<const Environment> MakeEnvironment(
    std::string_view env_id, const EnvOverrides& overrides = {});

// One transition f_theta(s, clip(a)) + w.
Eigen::VectorXd Step(const Environment& env, Phase phase,
                     const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                     const ParamVector& theta, const Eigen::VectorXd& w);
inline Eigen::VectorXd Step(const Environment& env, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& a, const ParamVector& theta,
                            const Eigen::VectorXd& w) {
  return Step(env, Phase::kExplore, s, a, theta, w);
}

// Closed-loop episode. The initial state comes from the env's sampler keyed
// on seed unless given explicitly; process noise is keyed on (seed, step).
Trajectory Rollout(const Environment& env, const Policy& policy,
                   const ParamVector& theta, std::uint64_t seed,
                   Phase phase = Phase::kExplore,
                   const std::optional<Eigen::VectorXd>& initial_state = {});

// Open-loop re-execution of a recorded action sequence.
Trajectory Replay(const Environment& env,
                  const std::vector<Eigen::VectorXd>& actions,
                  const ParamVector& theta, const Eigen::VectorXd& s1,
                  std::uint64_t seed, Phase phase = Phase::kExplore);

ParamVector SampleParams(const ParamDistribution& q, const ParamVector& like,
                         Rng& rng);
Eigen::VectorXd SampleTruncatedGaussian(const ParamDistribution& q, Rng& rng);

}  // namespace asid

#endif  // ASID_ENVLAB_H_
