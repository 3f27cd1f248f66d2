#pragma once

#include <cstdint>
#include <span>

namespace sac {

/// SplitMix64 finaliser; bijective avalanche mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory i: mix64(master ^ mix64(i)).
constexpr std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t trajectory_id) {
  return mix64(master_seed ^ mix64(trajectory_id + 0x5ac0000000000000ULL));
}

/// Standard normal variate addressed by (seed, mode, counter); no state.
double counter_normal(std::uint64_t seed, std::uint64_t mode, std::uint64_t counter);

/// Brownian increments for one trajectory. The path is defined at the
/// resolution fine_dt: the increment of mode k over fine step c is
/// sqrt(fine_dt) Z(seed, k, c). A solver stepping with dt = substeps * fine_dt
/// receives, for its step m, the sum over c = m*substeps .. m*substeps +
/// substeps - 1 in increasing order, so runs at different dt see the same path.
class BrownianPath {
 public:
  BrownianPath(std::uint64_t seed, double fine_dt, std::uint64_t substeps = 1);

  std::uint64_t seed() const { return seed_; }
  double fine_dt() const { return fine_dt_; }
  std::uint64_t substeps() const { return substeps_; }
  double dt() const { return fine_dt_ * static_cast<double>(substeps_); }

  double increment(std::uint64_t mode, std::uint64_t step) const;
  void increments(std::uint64_t step, std::span<double> out) const;

 private:
  std::uint64_t seed_;
  double fine_dt_;
  double sqrt_fine_dt_;
  std::uint64_t substeps_;
};

}  // namespace sac
