#include "asid/random.h"

#include <cmath>
#include <numbers>

namespace asid {

std::uint64_t DeriveSeed(std::uint64_t seed, Stream stream,
                         std::uint64_t index) {
  return Mix64(Mix64(seed ^ Mix64(static_cast<std::uint64_t>(stream))) +
               Mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view tag,
                         std::uint64_t index) {
  // FNV-1a over the tag.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return Mix64(Mix64(seed ^ h) + Mix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::Uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::Gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

Eigen::VectorXd ProcessNoise(std::uint64_t seed, int step, int dim,
                             double sigma) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  if (sigma == 0.0) return w;
  Rng rng(DeriveSeed(seed, Stream::kProcessNoise,
                     static_cast<std::uint64_t>(step)));
  for (int i = 0; i < dim; ++i) w[i] = sigma * rng.Gaussian();
  return w;
}

}  // namespace asid
