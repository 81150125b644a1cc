#ifndef ASID_EXPLORE_H_
#define ASID_EXPLORE_H_

#include <cstdint>
#include <string_view>

#include "asid/cem.h"
#include "asid/envlab.h"
#include "asid/fisher.h"
#include "asid/policy.h"

namespace asid {

// Policy classes used by default: open loop for single-shot excitation,
// linear feedback where the ball's position matters.
PolicyKind DefaultExplorationKind(std::string_view env_id);
PolicyKind DefaultTaskKind(std::string_view env_id);

struct ExplorationResult {
  Policy policy;
  double objective = 0.0;
  CemResult search;
};

// Minimises the domain-randomised A-optimality objective over the policy
// class with CEM. The same theta samples and noise seeds (derived from
// cem.seed) are used for every candidate.
ExplorationResult TrainExplorationPolicy(const Environment& env,
                                         const ParamDistribution& q0,
                                         PolicyKind kind,
                                         const CemConfig& cem,
                                         const AOptimalConfig& fisher);

// Naive baseline: open-loop policy whose every action entry is uniform in
// the action box.
Policy RandomPolicy(const Environment& env, std::uint64_t seed,
                    Phase phase = Phase::kExplore);

}  // namespace asid

#endif  // ASID_EXPLORE_H_
