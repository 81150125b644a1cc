#ifndef ASID_CEM_H_
#define ASID_CEM_H_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace asid {

struct CemConfig {
  int population = 64;
  double elite_frac = 0.125;
  int iterations = 30;
  // Initial sampling std per parameter; a single entry is broadcast.
  Eigen::VectorXd init_std = Eigen::VectorXd::Ones(1);
  double min_std = 1e-6;
  std::uint64_t seed = 0;
  // Optional search box (empty = unbounded). Samples are clipped into it.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  // Population evaluations in parallel; results do not depend on it.
  int threads = 1;

  int EliteCount() const;
  // Throws ConfigError. p is the search dimension.
  void Validate(int p) const;
};

struct CemIteration {
  double best_value = 0.0;       // best-ever after this iteration
  double iteration_best = 0.0;   // best of this iteration's population
  double elite_mean = 0.0;
  double mean_std = 0.0;         // average sampling std after refit
  bool flat = false;             // every candidate scored the same
};

struct CemResult {
  Eigen::VectorXd best_params;
  double best_value = 0.0;
  std::vector<CemIteration> history;
  // Final sampling distribution.
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  int evaluations = 0;
};

using CemObjective = std::function<double(const Eigen::VectorXd&)>;

// Cross-entropy minimisation with a diagonal Gaussian. Each iteration scores
// the current mean plus `population` samples, refits mean/std on the elite
// fraction (std floored at min_std) and tracks the best-ever candidate.
// Non-finite objective values count as +inf; an iteration in which every
// candidate is +inf is an error. When all finite scores tie the refit is
// skipped, since ties carry no information about where the minimum is.
CemResult CemMinimize(const CemObjective& objective,
                      const Eigen::VectorXd& init_mean, const CemConfig& cfg);

}  // namespace asid

#endif  // ASID_CEM_H_
