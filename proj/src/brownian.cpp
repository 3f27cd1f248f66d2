#include "sac/brownian.hpp"

#include <cmath>
#include <numbers>

#include "sac/errors.hpp"

namespace sac {

namespace {

// Uniform on (0, 1) from the top 53 bits.
double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t mode, std::uint64_t counter) {
  std::uint64_t key = mix64(seed ^ mix64(mode ^ 0x6d6f6465ULL));
  std::uint64_t a = mix64(key ^ mix64(2 * counter));
  std::uint64_t b = mix64(key ^ mix64(2 * counter + 1));
  // Box-Muller, cosine branch
  double r = std::sqrt(-2.0 * std::log(to_open_unit(a)));
  return r * std::cos(2.0 * std::numbers::pi * to_open_unit(b));
}

BrownianPath::BrownianPath(std::uint64_t seed, double fine_dt, std::uint64_t substeps)
    : seed_(seed), fine_dt_(fine_dt), sqrt_fine_dt_(std::sqrt(fine_dt)), substeps_(substeps) {
  if (!(fine_dt > 0.0)) throw ParameterError("Brownian path needs fine_dt > 0");
  if (substeps == 0) throw ParameterError("Brownian path needs substeps >= 1");
}

double BrownianPath::increment(std::uint64_t mode, std::uint64_t step) const {
  double acc = 0.0;
  const std::uint64_t first = step * substeps_;
  for (std::uint64_t c = first; c < first + substeps_; ++c) {
    acc += sqrt_fine_dt_ * counter_normal(seed_, mode, c);
  }
  return acc;
}

void BrownianPath::increments(std::uint64_t step, std::span<double> out) const {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = increment(k, step);
}

}  // namespace sac
