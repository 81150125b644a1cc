#include "asid/cem.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "asid/error.h"
#include "asid/parallel.h"
#include "asid/random.h"

namespace asid {

int CemConfig::EliteCount() const {
  const int n = static_cast<int>(std::ceil(elite_frac * population - 1e-9));
  return std::clamp(n, 1, std::max(population, 1));
}

void CemConfig::Validate(int p) const {
  if (population < 2) throw ConfigError("cem: population must be >= 2");
  if (!(elite_frac > 0.0 && elite_frac <= 1.0)) {
    throw ConfigError("cem: elite_frac must be in (0, 1]");
  }
  if (iterations < 1) throw ConfigError("cem: iterations must be >= 1");
  if (!(min_std >= 0.0)) throw ConfigError("cem: min_std must be >= 0");
  if (init_std.size() != 1 && init_std.size() != p) {
    throw ConfigError("cem: init_std must have 1 or p entries");
  }
  if ((init_std.array() < 0.0).any() || !init_std.allFinite()) {
    throw ConfigError("cem: init_std must be finite and >= 0");
  }
  if (lower.size() != upper.size() ||
      (lower.size() != 0 && lower.size() != p)) {
    throw ConfigError("cem: search box must be empty or have p entries");
  }
  if (lower.size() != 0 && (lower.array() > upper.array()).any()) {
    throw ConfigError("cem: lower > upper in search box");
  }
  if (threads < 1) throw ConfigError("cem: threads must be >= 1");
}

CemResult CemMinimize(const CemObjective& objective,
                      const Eigen::VectorXd& init_mean, const CemConfig& cfg) {
  const int p = static_cast<int>(init_mean.size());
  if (p < 1) throw ConfigError("cem: empty search space");
  cfg.Validate(p);
  const bool boxed = cfg.lower.size() == p;
  const auto clip = [&](Eigen::VectorXd x) {
    if (boxed) x = x.cwiseMax(cfg.lower).cwiseMin(cfg.upper);
    return x;
  };
  const auto score = [&](const Eigen::VectorXd& x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  const int n_elite = cfg.EliteCount();
  Eigen::VectorXd mean = clip(init_mean);
  Eigen::VectorXd std = cfg.init_std.size() == p
                            ? cfg.init_std
                            : Eigen::VectorXd::Constant(p, cfg.init_std[0]);
  std = std.cwiseMax(cfg.min_std);

  CemResult result;
  result.best_value = std::numeric_limits<double>::infinity();
  result.best_params = mean;

  const int n_cand = cfg.population + 1;
  std::vector<Eigen::VectorXd> cand(n_cand);
  std::vector<double> value(n_cand);
  std::vector<int> order(cfg.population);

  for (int it = 0; it < cfg.iterations; ++it) {
    Rng rng(DeriveSeed(cfg.seed, Stream::kCem, it));
    cand[0] = mean;
    for (int k = 1; k < n_cand; ++k) {
      Eigen::VectorXd x(p);
      for (int j = 0; j < p; ++j) x[j] = mean[j] + std[j] * rng.Gaussian();
      cand[k] = clip(std::move(x));
    }
    ParallelFor(n_cand, cfg.threads,
                [&](int k) { value[k] = score(cand[k]); });
    result.evaluations += n_cand;

    CemIteration rec;
    rec.iteration_best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_cand; ++k) {
      rec.iteration_best = std::min(rec.iteration_best, value[k]);
      // Strict improvement keeps the earliest candidate on ties.
      if (value[k] < result.best_value) {
        result.best_value = value[k];
        result.best_params = cand[k];
      }
    }
    if (!std::isfinite(rec.iteration_best)) {
      throw std::runtime_error("cem: every candidate in iteration " +
                               std::to_string(it) + " scored +inf");
    }

    // Elites come from the sampled population only (slots 1..population).
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return value[a] < value[b]; });
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < n_cand; ++k) {
      if (!std::isfinite(value[k])) continue;
      lo = std::min(lo, value[k]);
      hi = std::max(hi, value[k]);
    }
    const bool all_finite = std::all_of(
        value.begin() + 1, value.end(),
        [](double v) { return std::isfinite(v); });
    rec.flat = all_finite && hi - lo <= 1e-12 * std::max(1.0, std::abs(lo));

    rec.elite_mean = 0.0;
    for (int e = 0; e < n_elite; ++e) rec.elite_mean += value[order[e]];
    rec.elite_mean /= n_elite;

    if (!rec.flat) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(p);
      for (int e = 0; e < n_elite; ++e) m += cand[order[e]];
      m /= n_elite;
      Eigen::VectorXd var = Eigen::VectorXd::Zero(p);
      for (int e = 0; e < n_elite; ++e) {
        var += (cand[order[e]] - m).cwiseAbs2();
      }
      var /= n_elite;
      mean = m;
      std = var.cwiseSqrt().cwiseMax(cfg.min_std);
    }
    rec.best_value = result.best_value;
    rec.mean_std = std.mean();
    result.history.push_back(rec);
  }
  result.mean = mean;
  result.std = std;
  return result;
}

}  // namespace asid
