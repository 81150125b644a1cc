#include "asid/fisher.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "asid/error.h"
#include "asid/random.h"

namespace asid {

void FdConfig::Validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ConfigError("FdConfig: step must be > 0");
  }
}

void AOptimalConfig::Validate() const {
  if (n_rollouts < 1) throw ConfigError("AOptimalConfig: n_rollouts < 1");
  if (!(ridge > 0.0)) throw ConfigError("AOptimalConfig: ridge must be > 0");
  fd.Validate();
  if (information_scale && !(*information_scale > 0.0)) {
    throw ConfigError("AOptimalConfig: information_scale must be > 0");
  }
}

ParamJacobian FdParamJacobian(const Environment& env,
                              const Eigen::VectorXd& s,
                              const Eigen::VectorXd& a,
                              const ParamVector& theta, const FdConfig& cfg,
                              Phase phase) {
  cfg.Validate();
  const EnvSpec& spec = env.spec(phase);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(spec.n_s);
  ParamJacobian out;
  out.jacobian = Eigen::MatrixXd::Zero(spec.n_s, spec.d);
  for (int i = 0; i < spec.d; ++i) {
    const double t = theta.values[i];
    const double h =
        cfg.relative && std::abs(t) > 1.0 ? cfg.step * std::abs(t) : cfg.step;
    const double hi = std::min(t + h, theta.upper[i]);
    const double lo = std::max(t - h, theta.lower[i]);
    if (hi != t + h || lo != t - h) out.one_sided = true;
    if (!(hi > lo)) continue;  // degenerate box: no information
    ParamVector plus = theta;
    ParamVector minus = theta;
    plus.values[i] = hi;
    minus.values[i] = lo;
    out.jacobian.col(i) = (Step(env, phase, s, a, plus, zero) -
                           Step(env, phase, s, a, minus, zero)) /
                          (hi - lo);
  }
  return out;
}

FisherMatrix::FisherMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw DomainError("FisherMatrix: must be square with d >= 1");
  }
  if (!entries_.allFinite()) {
    throw DomainError("FisherMatrix: non-finite entries");
  }
  const double sc = scale();
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * sc) {
    std::ostringstream os;
    os << "FisherMatrix: asymmetry " << asym << " exceeds 1e-12 * scale";
    throw DomainError(os.str());
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      entries_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * sc) {
    throw DomainError("FisherMatrix: not positive semidefinite");
  }
}

FisherMatrix FisherMatrix::Zero(int d) {
  return FisherMatrix(Eigen::MatrixXd::Zero(d, d));
}

double FisherMatrix::scale() const {
  const double m = entries_.cwiseAbs().maxCoeff();
  return m > 0.0 ? m : 1.0;
}

double FisherMatrix::RegularizedTraceInverse(double ridge) const {
  if (!(ridge > 0.0)) throw DomainError("ridge must be > 0");
  const Eigen::MatrixXd reg =
      entries_ + ridge * Eigen::MatrixXd::Identity(dim(), dim());
  const Eigen::LLT<Eigen::MatrixXd> llt(reg);
  return llt.solve(Eigen::MatrixXd::Identity(dim(), dim())).trace();
}

FisherMatrix ComputeFisherMatrix(const Trajectory& traj,
                                 const Environment& env,
                                 const ParamVector& theta, const FdConfig& cfg,
                                 std::optional<double> information_scale) {
  const EnvSpec& spec = env.spec(traj.phase);
  if (traj.env_id != spec.env_id) {
    throw ConfigError("fisher: trajectory from " + traj.env_id +
                      " used with env " + spec.env_id);
  }
  double weight;
  if (information_scale) {
    weight = *information_scale;
  } else {
    if (spec.sigma_w == 0.0) {
      throw DomainError(
          "fisher: sigma_w = 0 makes sigma_w^-2 undefined; pass an explicit "
          "information_scale");
    }
    weight = 1.0 / (spec.sigma_w * spec.sigma_w);
  }
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(spec.d, spec.d);
  for (int h = 0; h < traj.horizon; ++h) {
    const Eigen::MatrixXd jac =
        FdParamJacobian(env, traj.states[h], traj.actions[h], theta, cfg,
                        traj.phase)
            .jacobian;
    info.noalias() += jac.transpose() * jac;
  }
  info *= weight;
  // Enforce exact symmetry against rounding in the accumulation.
  info = 0.5 * (info + info.transpose()).eval();
  return FisherMatrix(std::move(info));
}

double AOptimalObjective(const Policy& policy, const Environment& env,
                         const ParamDistribution& q,
                         const AOptimalConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  const ParamVector like = env.spec().DefaultParams();
  double total = 0.0;
  for (int i = 0; i < cfg.n_rollouts; ++i) {
    Rng rng(DeriveSeed(seed, Stream::kParamSample, i));
    const ParamVector theta = SampleParams(q, like, rng);
    const Trajectory traj = Rollout(env, policy, theta,
                                    DeriveSeed(seed, Stream::kRollout, i));
    total += ComputeFisherMatrix(traj, env, theta, cfg.fd,
                                 cfg.information_scale)
                 .RegularizedTraceInverse(cfg.ridge);
  }
  return total / cfg.n_rollouts;
}

double CrlbBound(const FisherMatrix& info, double episodes) {
  if (!(episodes > 0.0)) throw DomainError("crlb: episode count must be > 0");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info.entries());
  const Eigen::VectorXd& ev = eig.eigenvalues();
  if (ev.minCoeff() <= 1e-12 * info.scale()) {
    return std::numeric_limits<double>::infinity();
  }
  return ev.cwiseInverse().sum() / episodes;
}

}  // namespace asid
