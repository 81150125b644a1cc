#ifndef ASID_FISHER_H_
#define ASID_FISHER_H_

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "asid/envlab.h"

namespace asid {

struct FdConfig {
  // Central-difference step in parameter units.
  double step = 1e-4;
  // Scale the step by |theta_i| when |theta_i| > 1.
  bool relative = true;

  void Validate() const;
};

struct ParamJacobian {
  Eigen::MatrixXd jacobian;  // n_s x d
  // A bound clipped theta +- step and the difference was taken over an
  // asymmetric (possibly one-sided) interval.
  bool one_sided = false;
};

// d f_theta(s, a) / d theta by central differences on the noiseless dynamics.
ParamJacobian FdParamJacobian(const Environment& env,
                              const Eigen::VectorXd& s,
                              const Eigen::VectorXd& a,
                              const ParamVector& theta, const FdConfig& cfg,
                              Phase phase = Phase::kExplore);

// Symmetric positive semidefinite d x d information matrix. Construction
// checks both properties.
class FisherMatrix {
 public:
  explicit FisherMatrix(Eigen::MatrixXd entries);
  static FisherMatrix Zero(int d);

  const Eigen::MatrixXd& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  // max |entry|, or 1 for the zero matrix.
  double scale() const;

  // tr((I + ridge Id)^-1).
  double RegularizedTraceInverse(double ridge) const;

 private:
  Eigen::MatrixXd entries_;
};

// I = sigma_w^-2 sum_h J_h^T J_h with J_h evaluated at the realised (s_h,
// a_h). information_scale replaces sigma_w^-2 and is required when
// sigma_w = 0.
FisherMatrix ComputeFisherMatrix(
    const Trajectory& traj, const Environment& env, const ParamVector& theta,
    const FdConfig& cfg, std::optional<double> information_scale = {});

struct AOptimalConfig {
  int n_rollouts = 8;
  double ridge = 1e-3;
  FdConfig fd;
  std::optional<double> information_scale;

  void Validate() const;
};

// Monte-Carlo estimate of E_{theta ~ q}[tr((I(theta, pi) + ridge Id)^-1)],
// one rollout per sampled theta. Rollout i uses parameter and noise seeds
// derived from (seed, i), so every policy evaluated with the same seed sees
// the same theta samples and noise.
double AOptimalObjective(const Policy& policy, const Environment& env,
                         const ParamDistribution& q,
                         const AOptimalConfig& cfg, std::uint64_t seed);

// Cramer-Rao bound T^-1 tr(I^-1); +inf when I is singular.
double CrlbBound(const FisherMatrix& info, double episodes);

}  // namespace asid

#endif  // ASID_FISHER_H_
