#include "sac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sac/errors.hpp"

namespace sac {

const char* to_string(SchemeKind k) {
  return k == SchemeKind::split_implicit ? "split_implicit" : "yosida_galerkin";
}

SchemeKind scheme_from_string(const std::string& s) {
  if (s == "split_implicit") return SchemeKind::split_implicit;
  if (s == "yosida_galerkin") return SchemeKind::yosida_galerkin;
  throw ParameterError("unknown scheme kind '" + s + "'");
}

std::uint64_t step_count(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ParameterError("need T > 0 and dt > 0");
  double steps = T / dt;
  double rounded = std::round(steps);
  if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    std::ostringstream os;
    os << "final time " << T << " is not an integer multiple of dt " << dt;
    throw ParameterError(os.str());
  }
  return static_cast<std::uint64_t>(rounded);
}

void validate(const SchemeConfig& cfg, const Grid& g, const PotentialConstants& c, double T) {
  if (!(cfg.dt > 0.0) || !(cfg.dt <= T)) throw ParameterError("scheme needs 0 < dt <= T");
  if (!(cfg.newton_tol > 0.0) || cfg.newton_tol > 1e-10) {
    throw ParameterError("scheme needs 0 < newton_tol <= 1e-10");
  }
  if (cfg.max_newton < 1) throw ParameterError("scheme needs max_newton >= 1");
  if (cfg.n_modes > g.size()) throw ParameterError("n_modes exceeds the number of grid modes");
  if (cfg.kind == SchemeKind::yosida_galerkin) {
    if (!(cfg.lambda > 0.0)) throw ParameterError("yosida_galerkin needs lambda > 0");
    double guard = cfg.dt * (c.c_f + 1.0 / cfg.lambda);
    if (!(guard < 1.0)) {
      std::ostringstream os;
      os << "yosida_galerkin stability guard violated: dt (C_F + 1/lambda) = " << guard
         << " >= 1";
      throw ParameterError(os.str());
    }
  }
}

double solve_reaction(double rhs, double dt, double theta, double tol, int max_iter) {
  // g(z) = tanh z + b z - rhs with b = dt theta; root in [(rhs-1)/b, (rhs+1)/b].
  const double b = dt * theta;
  double lo = (rhs - 1.0) / b;
  double hi = (rhs + 1.0) / b;
  double z = std::clamp(std::atanh(std::clamp(rhs, -0.999999, 0.999999)), lo, hi);
  for (int it = 0; it < max_iter; ++it) {
    double th = std::tanh(z);
    double r = th + b * z - rhs;
    if (std::abs(r) <= tol) return th;
    if (r < 0.0) {
      lo = z;
    } else {
      hi = z;
    }
    double next = z - r / (1.0 - th * th + b);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == z) break;
    z = next;
  }
  double th = std::tanh(z);
  if (std::abs(th + b * z - rhs) <= tol) return th;
  std::ostringstream os;
  os << "reaction solve did not reach tolerance " << tol << " for rhs " << rhs;
  throw ConvergenceError(os.str());
}

Stepper::Stepper(const Grid& g, const SchemeConfig& cfg, const LogPotential& p,
                 const PotentialConstants& c, const NoiseFamily& noise)
    : grid_(g),
      cfg_(cfg),
      pot_(p),
      constants_(c),
      noise_(noise),
      spec_(g),
      dW_(noise.modes()),
      work_(g.size()) {}

void Stepper::draw(SolverState& s) {
  if (std::abs(s.rng_stream.dt() - cfg_.dt) > 1e-12 * cfg_.dt) {
    throw ParameterError("Brownian path resolution does not match the scheme dt");
  }
  s.rng_stream.increments(s.step, dW_);
}

void Stepper::project_inplace(std::vector<double>& v) {
  if (cfg_.n_modes == 0 || cfg_.n_modes >= spec_.mode_count()) return;
  auto coeffs = spec_.forward(v);
  for (std::size_t slot = 0; slot < coeffs.size(); ++slot) {
    if (spec_.rank(slot) >= cfg_.n_modes) coeffs[slot] = 0.0;
  }
  v = spec_.inverse(coeffs);
}

void Stepper::step(SolverState& s) {
  if (cfg_.kind == SchemeKind::split_implicit) {
    step_split_implicit(s);
  } else {
    step_yosida_galerkin(s);
  }
}

void Stepper::step_split_implicit(SolverState& s) {
  auto& u = s.u.values;
  const double dt = cfg_.dt;

  draw(s);
  double drive = 0.0;
  for (int k = 0; k < noise_.modes(); ++k) drive += noise_.sigma(k) * dW_[k];
  if (drive != 0.0) {
    const double edge = 1.0 - kNoiseGuard;
    for (double& v : u) {
      v += noise_.shape(v) * drive;
      if (std::abs(v) > edge) {
        v = std::copysign(edge, v);
        ++s.clamp_count;
      }
    }
  }

  spec_.solve_heat(u, dt);

  if (cfg_.reaction) {
    const double theta = pot_.theta();
    const double theta0 = pot_.theta0();
    for (double& v : u) {
      v = solve_reaction(v + dt * theta0 * v, dt, theta, cfg_.newton_tol, cfg_.max_newton);
    }
  }
  s.t = static_cast<double>(s.step + 1) * dt;
  ++s.step;

  for (double v : u) {
    if (!(std::abs(v) < 1.0)) {
      std::ostringstream os;
      os << "split_implicit state left (-1, 1) at t=" << s.t;
      throw ConvergenceError(os.str());
    }
  }
}

void Stepper::step_yosida_galerkin(SolverState& s) {
  auto& u = s.u.values;
  const double dt = cfg_.dt;
  draw(s);
  double drive = 0.0;
  for (int k = 0; k < noise_.modes(); ++k) drive += noise_.sigma(k) * dW_[k];

  ResolventConfig rcfg{cfg_.newton_tol, std::max(cfg_.max_newton, 100)};
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto j = resolvent_point(pot_, constants_, cfg_.lambda, u[i], rcfg);
    double drift = cfg_.reaction ? pot_.dF_from_logit(j.logit) : 0.0;
    work_[i] = -dt * drift + noise_.shape(j.y) * drive;
  }
  for (std::size_t i = 0; i < u.size(); ++i) work_[i] += u[i];
  project_inplace(work_);
  spec_.solve_heat(work_, dt);
  u = work_;
  s.t = static_cast<double>(s.step + 1) * dt;
  ++s.step;
}

namespace {

double g_mass_or_nan(const Field& u, double s) {
  if (1.0 - sup_norm(u) < LogPotential::kEdgeGuard) return NAN;
  return g_mass(u, s);
}

}  // namespace

TrajectoryRecord run_trajectory(const Field& u0, double T, const SchemeConfig& cfg,
                                const LogPotential& p, const PotentialConstants& c,
                                const NoiseFamily& noise, const BrownianPath& path,
                                const RecordOptions& opts, Field* final_state) {
  validate(cfg, u0.grid, c, T);
  if (opts.stride == 0) throw ParameterError("snapshot stride must be >= 1");
  const double sup0 = sup_norm(u0);
  if (opts.delta0 && sup0 > 1.0 - *opts.delta0 + 1e-15) {
    std::ostringstream os;
    os << "initial datum not separated: sup |u0| = " << sup0 << " > 1 - delta0";
    throw DomainError(os.str());
  }
  if (!(sup0 < 1.0)) throw DomainError("initial datum must lie strictly inside (-1, 1)");

  const std::uint64_t n_steps = step_count(T, cfg.dt);
  const Grid& g = u0.grid;
  const int s0 = noise.s0();
  const double range = 0.25 * g.L;

  TrajectoryRecord rec;
  rec.trajectory_id = opts.trajectory_id;
  rec.seed = path.seed();
  rec.config_fingerprint = opts.config_fingerprint;
  rec.meta = {g.d, g.L, s0, opts.alpha, range, g.n};

  Stepper stepper(g, cfg, p, c, noise);
  SolverState state{0.0, 0, u0, path, 0};

  rec.snapshots.push_back(snapshot(state.u, 0.0, p, s0, opts.alpha, range));
  double delta_min_steps = 1.0 - sup0;
  double integral = 0.0;
  for (std::uint64_t m = 0; m < n_steps; ++m) {
    // left-point rule in time
    integral += cfg.dt * g_mass_or_nan(state.u, s0 + 1);
    stepper.step(state);
    delta_min_steps = std::min(delta_min_steps, 1.0 - sup_norm(state.u));
    if ((m + 1) % opts.stride == 0 || m + 1 == n_steps) {
      rec.snapshots.push_back(snapshot(state.u, state.t, p, s0, opts.alpha, range));
    }
  }
  rec.delta_min = INFINITY;
  for (const auto& s : rec.snapshots) rec.delta_min = std::min(rec.delta_min, s.delta);
  rec.delta_min_steps = delta_min_steps;
  rec.g_mass_s0p1_integral = integral;
  rec.clamp_count = state.clamp_count;
  if (cfg.kind == SchemeKind::split_implicit && !(delta_min_steps > 0.0)) {
    throw ConvergenceError("split_implicit trajectory reached the barrier");
  }
  if (final_state) *final_state = state.u;
  return rec;
}

Field integrate_to(const Field& u0, double T, const SchemeConfig& cfg, const LogPotential& p,
                   const PotentialConstants& c, const NoiseFamily& noise,
                   const BrownianPath& path) {
  validate(cfg, u0.grid, c, T);
  const std::uint64_t n_steps = step_count(T, cfg.dt);
  Stepper stepper(u0.grid, cfg, p, c, noise);
  SolverState state{0.0, 0, u0, path, 0};
  for (std::uint64_t m = 0; m < n_steps; ++m) stepper.step(state);
  return state.u;
}

}  // namespace sac
