#ifndef ASID_POLICY_H_
#define ASID_POLICY_H_

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace asid {

struct EnvSpec;

enum class PolicyKind { kOpenLoop, kLinearFeedback };

std::string_view ToString(PolicyKind kind);
PolicyKind ParsePolicyKind(std::string_view name);

// Exploration or task controller.
//
//   open_loop:        params = H * n_a action entries, row h is the action at
//                     step h, independent of the state.
//   linear_feedback:  params = [K (n_a x n_s, row-major), b (n_a)],
//                     a = clip(K s + b).
//
// Evaluation is stateless: the action depends only on (step, state). Actions
// are always clipped to the env's action box.
class Policy {
 public:
  Policy(PolicyKind kind, int horizon, int n_s, int n_a,
         Eigen::VectorXd params, std::string env_id);

  // All-zero parameters for the given env phase.
  static Policy Zero(PolicyKind kind, const EnvSpec& spec);
  static int ParamCount(PolicyKind kind, int horizon, int n_s, int n_a);

  Eigen::VectorXd Act(int step, const Eigen::VectorXd& state,
                      const EnvSpec& spec) const;

  // Throws ConfigError if this policy cannot drive the given spec.
  void CheckCompatible(const EnvSpec& spec) const;

  Policy WithParams(Eigen::VectorXd params) const;

  PolicyKind kind() const { return kind_; }
  int horizon() const { return horizon_; }
  int n_s() const { return n_s_; }
  int n_a() const { return n_a_; }
  const Eigen::VectorXd& params() const { return params_; }
  const std::string& env_id() const { return env_id_; }

 private:
  PolicyKind kind_;
  int horizon_;
  int n_s_;
  int n_a_;
  Eigen::VectorXd params_;
  std::string env_id_;
};

}  // namespace asid

#endif  // ASID_POLICY_H_
