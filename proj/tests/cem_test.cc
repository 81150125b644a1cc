#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "asid/cem.h"
#include "asid/error.h"
#include "test_util.h"

namespace asid {
namespace {

using testing::V;

double Sphere(const Eigen::VectorXd& x) {
  return (x - V({1.0, -2.0, 0.5})).squaredNorm();
}

CemConfig Small() {
  CemConfig cfg;
  cfg.population = 48;
  cfg.elite_frac = 0.2;
  cfg.iterations = 40;
  cfg.seed = 11;
  return cfg;
}

TEST(CemTest, MinimisesSphere) {
  const CemResult r = CemMinimize(Sphere, Eigen::VectorXd::Zero(3), Small());
  EXPECT_LT(r.best_value, 1e-3);
  EXPECT_LT((r.best_params - V({1.0, -2.0, 0.5})).norm(), 3e-2);
  EXPECT_EQ(r.evaluations, 40 * 49);
  ASSERT_EQ(r.history.size(), 40u);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LE(r.history[i].best_value, r.history[i - 1].best_value);
  }
}

TEST(CemTest, DeterministicAndThreadIndependent) {
  CemConfig cfg = Small();
  const CemResult a = CemMinimize(Sphere, Eigen::VectorXd::Zero(3), cfg);
  const CemResult b = CemMinimize(Sphere, Eigen::VectorXd::Zero(3), cfg);
  cfg.threads = 4;
  const CemResult c = CemMinimize(Sphere, Eigen::VectorXd::Zero(3), cfg);
  EXPECT_EQ(a.best_params, b.best_params);
  EXPECT_EQ(a.best_params, c.best_params);
  EXPECT_EQ(a.best_value, c.best_value);
  cfg.seed = 12;
  EXPECT_NE(CemMinimize(Sphere, Eigen::VectorXd::Zero(3), cfg).best_params,
            a.best_params);
}

TEST(CemTest, MeanIsScoredFirst) {
  // The initial mean is already optimal; nothing sampled can beat it.
  const CemResult r = CemMinimize(Sphere, V({1.0, -2.0, 0.5}), Small());
  EXPECT_EQ(r.best_value, 0.0);
  EXPECT_EQ(r.best_params, V({1.0, -2.0, 0.5}));
}

TEST(CemTest, EliteCount) {
  CemConfig cfg;
  cfg.population = 32;
  cfg.elite_frac = 0.2;
  EXPECT_EQ(cfg.EliteCount(), 7);
  cfg.elite_frac = 0.25;
  EXPECT_EQ(cfg.EliteCount(), 8);
  cfg.elite_frac = 0.001;
  EXPECT_EQ(cfg.EliteCount(), 1);
}

TEST(CemTest, FlatObjectiveKeepsDistribution) {
  CemConfig cfg = Small();
  cfg.iterations = 5;
  cfg.init_std = V({0.3});
  const CemResult r =
      CemMinimize([](const Eigen::VectorXd&) { return 2.0; }, V({4.0, 5.0}),
                  cfg);
  EXPECT_EQ(r.mean, V({4.0, 5.0}));
  EXPECT_EQ(r.std, V({0.3, 0.3}));
  EXPECT_EQ(r.best_params, V({4.0, 5.0}));
  for (const auto& it : r.history) EXPECT_TRUE(it.flat);
}

TEST(CemTest, NonFiniteCountsAsInfinity) {
  CemConfig cfg = Small();
  const auto obj = [](const Eigen::VectorXd& x) {
    return x[0] < 0.0 ? std::numeric_limits<double>::quiet_NaN()
                      : (x[0] - 1.0) * (x[0] - 1.0);
  };
  const CemResult r = CemMinimize(obj, V({0.5}), cfg);
  EXPECT_NEAR(r.best_params[0], 1.0, 1e-2);
  EXPECT_THROW(CemMinimize(
                   [](const Eigen::VectorXd&) {
                     return std::numeric_limits<double>::infinity();
                   },
                   V({0.0}), cfg),
               std::runtime_error);
}

TEST(CemTest, RespectsSearchBox) {
  CemConfig cfg = Small();
  cfg.lower = V({-1.0, -1.0, -1.0});
  cfg.upper = V({0.0, 0.0, 0.0});
  std::atomic<bool> outside{false};
  const CemResult r = CemMinimize(
      [&](const Eigen::VectorXd& x) {
        if ((x.array() < -1.0).any() || (x.array() > 0.0).any()) outside = true;
        return Sphere(x);
      },
      V({3.0, 3.0, 3.0}), cfg);
  EXPECT_FALSE(outside);
  // Constrained optimum is the projection of the target onto the box.
  EXPECT_LT((r.best_params - V({0.0, -1.0, 0.0})).norm(), 1e-2);
}

TEST(CemTest, ValidationErrors) {
  const auto obj = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  CemConfig cfg;
  cfg.population = 1;
  EXPECT_THROW(CemMinimize(obj, V({0.0}), cfg), ConfigError);
  cfg = CemConfig{};
  cfg.elite_frac = 0.0;
  EXPECT_THROW(CemMinimize(obj, V({0.0}), cfg), ConfigError);
  cfg = CemConfig{};
  cfg.init_std = V({1.0, 1.0});
  EXPECT_THROW(CemMinimize(obj, V({0.0, 0.0, 0.0}), cfg), ConfigError);
  cfg = CemConfig{};
  cfg.lower = V({1.0});
  cfg.upper = V({0.0});
  EXPECT_THROW(CemMinimize(obj, V({0.0}), cfg), ConfigError);
  cfg = CemConfig{};
  cfg.threads = 0;
  EXPECT_THROW(CemMinimize(obj, V({0.0}), cfg), ConfigError);
  EXPECT_THROW(CemMinimize(obj, Eigen::VectorXd(), CemConfig{}), ConfigError);
}

}  // namespace
}  // namespace asid
