#include "asid/policy.h"

#include <sstream>
#include <utility>

#include "asid/envlab.h"
#include "asid/error.h"

namespace asid {

std::string_view ToString(PolicyKind kind) {
  return kind == PolicyKind::kOpenLoop ? "open_loop" : "linear_feedback";
}

PolicyKind ParsePolicyKind(std::string_view name) {
  if (name == "open_loop") return PolicyKind::kOpenLoop;
  if (name == "linear_feedback") return PolicyKind::kLinearFeedback;
  throw ConfigError("unknown policy kind '" + std::string(name) + "'");
}

int Policy::ParamCount(PolicyKind kind, int horizon, int n_s, int n_a) {
  return kind == PolicyKind::kOpenLoop ? horizon * n_a : n_a * n_s + n_a;
}

Policy::Policy(PolicyKind kind, int horizon, int n_s, int n_a,
               Eigen::VectorXd params, std::string env_id)
    : kind_(kind),
      horizon_(horizon),
      n_s_(n_s),
      n_a_(n_a),
      params_(std::move(params)),
      env_id_(std::move(env_id)) {
  if (horizon_ < 1 || n_s_ < 1 || n_a_ < 1) {
    throw ConfigError("Policy: dimensions must be >= 1");
  }
  if (params_.size() != ParamCount(kind_, horizon_, n_s_, n_a_)) {
    std::ostringstream os;
    os << "Policy(" << ToString(kind_) << "): expected "
       << ParamCount(kind_, horizon_, n_s_, n_a_) << " params, got "
       << params_.size();
    throw ConfigError(os.str());
  }
}

Policy Policy::Zero(PolicyKind kind, const EnvSpec& spec) {
  return Policy(kind, spec.horizon, spec.n_s, spec.n_a,
                Eigen::VectorXd::Zero(
                    ParamCount(kind, spec.horizon, spec.n_s, spec.n_a)),
                spec.env_id);
}

void Policy::CheckCompatible(const EnvSpec& spec) const {
  const bool dims_ok = n_s_ == spec.n_s && n_a_ == spec.n_a;
  const bool horizon_ok =
      kind_ != PolicyKind::kOpenLoop || horizon_ == spec.horizon;
  if (!dims_ok || !horizon_ok || env_id_ != spec.env_id) {
    std::ostringstream os;
    os << "policy for " << env_id_ << " (H=" << horizon_ << ", n_s=" << n_s_
       << ", n_a=" << n_a_ << ") does not match env " << spec.env_id
       << " (H=" << spec.horizon << ", n_s=" << spec.n_s
       << ", n_a=" << spec.n_a << ")";
    throw ConfigError(os.str());
  }
}

Eigen::VectorXd Policy::Act(int step, const Eigen::VectorXd& state,
                            const EnvSpec& spec) const {
  Eigen::VectorXd a(n_a_);
  if (kind_ == PolicyKind::kOpenLoop) {
    if (step < 0 || step >= horizon_) {
      throw DomainError("open-loop policy queried past its horizon");
    }
    a = params_.segment(static_cast<Eigen::Index>(step) * n_a_, n_a_);
  } else {
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                         Eigen::Dynamic, Eigen::RowMajor>>
        gain(params_.data(), n_a_, n_s_);
    a = gain * state + params_.tail(n_a_);
  }
  return a.cwiseMax(spec.action_low).cwiseMin(spec.action_high);
}

Policy Policy::WithParams(Eigen::VectorXd params) const {
  return Policy(kind_, horizon_, n_s_, n_a_, std::move(params), env_id_);
}

}  // namespace asid
