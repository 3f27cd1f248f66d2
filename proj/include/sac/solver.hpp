#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sac/brownian.hpp"
#include "sac/diagnostics.hpp"
#include "sac/discretization.hpp"
#include "sac/noise.hpp"
#include "sac/potential.hpp"

namespace sac {

enum class SchemeKind { split_implicit, yosida_galerkin };

const char* to_string(SchemeKind k);
SchemeKind scheme_from_string(const std::string& s);

struct SchemeConfig {
  double dt = 1e-3;
  SchemeKind kind = SchemeKind::split_implicit;
  double lambda = 1e-2;      // yosida_galerkin only
  std::size_t n_modes = 0;   // Galerkin cut; 0 keeps every mode
  double newton_tol = 1e-12;
  int max_newton = 100;
  bool reaction = true;      // false switches F off (pure stochastic heat equation)
};

/// Throws ParameterError when the scheme cannot run on this problem.
void validate(const SchemeConfig& cfg, const Grid& g, const PotentialConstants& c, double T);

/// Guard of the explicit noise substep: values are clamped to
/// [-1 + kNoiseGuard, 1 - kNoiseGuard].
inline constexpr double kNoiseGuard = 1e-12;

struct SolverState {
  double t = 0.0;
  std::uint64_t step = 0;
  Field u;
  BrownianPath rng_stream;
  std::uint64_t clamp_count = 0;
};

/// Time stepper for du - Delta u dt + F'(u) dt = sum_k h_k(u) dW_k with zero
/// Dirichlet data. Owns the sine spectrum of the grid and scratch buffers, so
/// a Stepper is confined to one thread.
class Stepper {
 public:
  Stepper(const Grid& g, const SchemeConfig& cfg, const LogPotential& p,
          const PotentialConstants& c, const NoiseFamily& noise);

  const SchemeConfig& config() const { return cfg_; }
  const Spectrum& spectrum() const { return spec_; }

  void step(SolverState& s);

  /// Noise substep, implicit heat substep, then the implicit singular
  /// reaction y + dt theta atanh(y) = v + dt theta0 v per node.
  void step_split_implicit(SolverState& s);

  /// u <- (I - dt Delta)^{-1} [u - dt P_n F'_lambda(u) + P_n H(J_lambda(u)) dW].
  /// Excursions beyond +-1 are possible and are not clamped.
  void step_yosida_galerkin(SolverState& s);

 private:
  void draw(SolverState& s);
  void project_inplace(std::vector<double>& v);

  Grid grid_;
  SchemeConfig cfg_;
  LogPotential pot_;
  PotentialConstants constants_;
  NoiseFamily noise_;
  Spectrum spec_;
  std::vector<double> dW_;
  std::vector<double> work_;
};

/// Root of y + dt theta atanh(y) = rhs in (-1, 1), bracketed Newton in the
/// logit coordinate with bisection fallback.
double solve_reaction(double rhs, double dt, double theta, double tol, int max_iter);

struct RecordOptions {
  std::uint64_t trajectory_id = 0;
  std::string config_fingerprint;
  std::uint64_t stride = 1;  // snapshot every stride-th step (and at T)
  double alpha = 0.45;
  /// Reject initial data with sup |u0| > 1 - delta0 when set.
  std::optional<double> delta0;
};

/// Integrates from u0 over [0, T] and collects snapshot diagnostics. For
/// split_implicit a step leaving (-1, 1) is a hard ConvergenceError.
TrajectoryRecord run_trajectory(const Field& u0, double T, const SchemeConfig& cfg,
                                const LogPotential& p, const PotentialConstants& c,
                                const NoiseFamily& noise, const BrownianPath& path,
                                const RecordOptions& opts, Field* final_state = nullptr);

/// Final state only, without diagnostics (used by the refinement studies).
Field integrate_to(const Field& u0, double T, const SchemeConfig& cfg, const LogPotential& p,
                   const PotentialConstants& c, const NoiseFamily& noise,
                   const BrownianPath& path);

std::uint64_t step_count(double T, double dt);

}  // namespace sac
