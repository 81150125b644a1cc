#ifndef ASID_SYSID_H_
#define ASID_SYSID_H_

#include <cstdint>

#include <Eigen/Core>

#include "asid/cem.h"
#include "asid/envlab.h"

namespace asid {

struct IdentificationResult {
  ParamVector point_estimate;
  // Final CEM sampling distribution, truncated at the parameter bounds.
  ParamDistribution posterior;
  double discrepancy = 0.0;  // at the point estimate
  int evaluations = 0;
  // False when the discrepancy did not depend on theta anywhere the search
  // looked (e.g. the object never moved).
  bool identifiable = true;
};

// Per-dimension weights applied to squared state errors: 1 / var of the
// real trajectory's states when the env asks for normalisation, else 1.
Eigen::VectorXd DiscrepancyWeights(const Trajectory& real,
                                   const Environment& env);

// Mean over n_noise_draws replays of the real action sequence from the real
// initial state under theta of sum_h w . (s_h^real - s_h^sim)^2. Replay noise
// seeds are derived from `seed`, so the value is deterministic in it.
double TrajectoryDiscrepancy(const Trajectory& real, const ParamVector& theta,
                             const Environment& env, int n_noise_draws,
                             std::uint64_t seed);

// CEM over theta inside the prior's box, starting from the prior.
// cem.init_std is ignored in favour of prior.std; cem.lower/upper are
// replaced by the prior bounds.
IdentificationResult Identify(const Trajectory& real, const Environment& env,
                              const ParamDistribution& prior,
                              const CemConfig& cem, int n_noise_draws);

}  // namespace asid

#endif  // ASID_SYSID_H_
