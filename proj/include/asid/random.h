#ifndef ASID_RANDOM_H_
#define ASID_RANDOM_H_

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace asid {

// Independent streams derived from one user seed.
enum class Stream : std::uint64_t {
  kProcessNoise = 1,
  kInitialState = 2,
  kParamSample = 3,
  kCem = 4,
  kPolicy = 5,
  kRollout = 6,
  kReplay = 7,
  kEvaluation = 8,
};

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t seed, Stream stream,
                         std::uint64_t index = 0);
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view tag,
                         std::uint64_t index = 0);

// Counter-based generator: the k-th output is Mix64 of (key, k), so any draw
// can be reproduced from its key and position alone. Gaussians use
// Box-Muller, which keeps results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(Mix64(key)) {}

  std::uint64_t NextU64() { return Mix64(key_ ^ Mix64(counter_++)); }
  // Uniform on the open interval (0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Gaussian();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Process noise w_h for one step: dim i.i.d. N(0, sigma^2) keyed on
// (seed, step), independent of the parameters being simulated.
Eigen::VectorXd ProcessNoise(std::uint64_t seed, int step, int dim,
                             double sigma);

}  // namespace asid

#endif  // ASID_RANDOM_H_
