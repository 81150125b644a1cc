#include <gtest/gtest.h>

#include "asid/error.h"
#include "asid/explore.h"
#include "test_util.h"

namespace asid {
namespace {

using testing::Env;
using testing::Prior;

CemConfig ExploreCem(std::uint64_t seed) {
  CemConfig cfg;
  cfg.population = 32;
  cfg.elite_frac = 0.2;
  cfg.iterations = 15;
  cfg.seed = seed;
  return cfg;
}

TEST(ExploreTest, Linear1dReachesAnalyticOptimum) {
  // With sigma_w = 1 the best any policy can do is a_h = +-1 throughout:
  // tr((I + ridge)^-1) = 1 / (H + ridge).
  for (int horizon : {3, 5}) {
    auto env = Env("linear1d", 1.0, horizon);
    AOptimalConfig fisher;
    const ExplorationResult r = TrainExplorationPolicy(
        *env, Prior(*env, 1.0, 0.5), PolicyKind::kOpenLoop, ExploreCem(1),
        fisher);
    const double optimum = 1.0 / (horizon + fisher.ridge);
    EXPECT_GE(r.objective, optimum * (1.0 - 1e-9));
    EXPECT_LE(r.objective, optimum * 1.05) << horizon;
    EXPECT_EQ(r.policy.params().size(), horizon);
  }
}

TEST(ExploreTest, Deterministic) {
  auto env = Env("rod-pivot");
  AOptimalConfig fisher;
  fisher.n_rollouts = 4;
  CemConfig cem = ExploreCem(3);
  cem.iterations = 4;
  const auto a = TrainExplorationPolicy(*env, Prior(*env, 0.0, 0.3),
                                        PolicyKind::kOpenLoop, cem, fisher);
  const auto b = TrainExplorationPolicy(*env, Prior(*env, 0.0, 0.3),
                                        PolicyKind::kOpenLoop, cem, fisher);
  EXPECT_EQ(a.policy.params(), b.policy.params());
  EXPECT_EQ(a.objective, b.objective);
}

TEST(ExploreTest, PointmassPolicyTouchesBall) {
  auto env = Env("pointmass-friction");
  AOptimalConfig fisher;
  fisher.n_rollouts = 6;
  const auto r = TrainExplorationPolicy(
      *env, Prior(*env, 0.25, 0.1), DefaultExplorationKind(env->id()),
      ExploreCem(5), fisher);
  int contacts = 0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto t = Rollout(*env, r.policy, testing::Theta(*env, {0.33}), k);
    contacts += env->Summarize(t).contact;
  }
  EXPECT_GE(contacts, 8);
}

TEST(ExploreTest, RejectsMismatchedPrior) {
  auto env = Env("multi-region");
  EXPECT_THROW(TrainExplorationPolicy(*env, Prior(*Env("linear1d"), 1.0, 0.5),
                                      PolicyKind::kLinearFeedback,
                                      ExploreCem(0), {}),
               ConfigError);
}

TEST(RandomPolicyTest, InsideActionBoxAndSeeded) {
  auto env = Env("rod-pivot");
  const Policy a = RandomPolicy(*env, 4);
  const Policy b = RandomPolicy(*env, 4);
  const Policy c = RandomPolicy(*env, 5);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_NE(a.params(), c.params());
  EXPECT_EQ(a.kind(), PolicyKind::kOpenLoop);
  const EnvSpec& s = env->spec();
  for (int h = 0; h < s.horizon; ++h) {
    for (int j = 0; j < s.n_a; ++j) {
      const double u = a.params()[h * s.n_a + j];
      EXPECT_GE(u, s.action_low[j]);
      EXPECT_LE(u, s.action_high[j]);
    }
  }
  const Policy task = RandomPolicy(*env, 4, Phase::kTask);
  EXPECT_EQ(task.horizon(), 1);
  EXPECT_EQ(task.n_a(), 1);
}

TEST(DefaultKindTest, FeedbackWhereStateMatters) {
  EXPECT_EQ(DefaultExplorationKind("linear1d"), PolicyKind::kOpenLoop);
  EXPECT_EQ(DefaultExplorationKind("rod-pivot"), PolicyKind::kOpenLoop);
  EXPECT_EQ(DefaultExplorationKind("pointmass-friction"),
            PolicyKind::kLinearFeedback);
  EXPECT_EQ(DefaultTaskKind("multi-region"), PolicyKind::kLinearFeedback);
}

}  // namespace
}  // namespace asid
