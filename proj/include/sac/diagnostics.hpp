#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sac/discretization.hpp"
#include "sac/potential.hpp"

namespace sac {

/// Diagnostics of one stored snapshot. Quantities that require |u| < 1
/// (energy, G masses) are NaN for fields outside the barriers.
struct Snapshot {
  double t = 0.0;
  double delta = 0.0;  // 1 - sup |u|
  double energy = 0.0;
  double g_mass_s0 = 0.0;
  double g_mass_s0p1 = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double h2_proxy = 0.0;
  double sup = 0.0;
  double holder_alpha = 0.0;

  bool operator==(const Snapshot&) const = default;
};

/// Geometry and exponents a record needs to be audited on its own.
struct RecordMeta {
  int d = 1;
  double L = 1.0;
  int s0 = 1;
  double alpha = 0.45;
  double holder_range = 0.25;
  int n = 0;  // interior nodes per axis; 0 certifies the full box

  bool operator==(const RecordMeta&) const = default;
};

struct TrajectoryRecord {
  std::uint64_t trajectory_id = 0;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  RecordMeta meta;
  std::vector<Snapshot> snapshots;
  double delta_min = 0.0;              // min over snapshots
  double delta_min_steps = 0.0;        // min over every time step
  double g_mass_s0p1_integral = 0.0;   // int_0^T int_O G_{s0+1}(u)
  std::uint64_t clamp_count = 0;

  double max_g_mass() const;
  double max_holder() const;

  bool operator==(const TrajectoryRecord&) const = default;
};

double separation_layer(const Field& u);

/// 1/2 |grad_h u|^2 + h^d sum F(u_i). Throws DomainError if |u_i| >= 1.
double energy(const Field& u, const LogPotential& p);

/// h^d sum G_s(u_i); DomainError outside (-1, 1).
double g_mass(const Field& u, double s);

Snapshot snapshot(const Field& u, double t, const LogPotential& p, int s0, double alpha,
                  double holder_range);

/// alpha default per dimension: 0.45, except d = 2 where 0.75 is needed so
/// that alpha s0 > d holds at the smallest admissible s0 = 3.
double default_alpha(int d);

struct CertificateInput {
  double M = 1.0;             // bound on int_O G_{s0}(u)
  double Lambda = 0.0;        // Hoelder seminorm bound
  double alpha = 0.45;
  int s0 = 3;
  int d = 1;
  double L = 1.0;             // box edge, |O| = L^d
  double holder_range = 0.0; // pair range of Lambda; <= 0 means global

  double measure() const;
};

struct QuadratureResolution {
  int gauss_points = 12;
  double panel_ratio = 2.0;
};

/// Lower bound for int_O (eps + 2 Lambda k(r) |x - x0|^alpha)^{-s0} dx over
/// all x0 in the closed box, attained at a corner. k(r) = ceil(r/R)^{1-alpha}
/// extends a seminorm measured on pairs within distance R to all pairs.
double certificate_integral(const CertificateInput& c, double eps,
                            const QuadratureResolution& res = {});

/// eps* with certificate_integral(eps*) = M. Any field with int G_{s0}(u) <= M
/// and Hoelder seminorm <= Lambda then satisfies 1 - u^2 >= eps* everywhere.
double separation_certificate(const CertificateInput& c,
                              const QuadratureResolution& res = {});

struct AuditEntry {
  double t;
  double measured;  // 1 - sup u^2
  double slack;     // measured - eps*
  bool passed;
};

struct AuditReport {
  double epsilon_star = 0.0;
  double M = 0.0;
  double Lambda = 0.0;
  std::vector<AuditEntry> entries;
  bool all_passed() const;
};

AuditReport certificate_audit(const TrajectoryRecord& rec);

struct MomentEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  bool overflow = false;

  bool operator==(const MomentEstimate&) const = default;
};

/// Monte Carlo mean and standard error of exp(q v) via log-sum-exp.
MomentEstimate exp_moment_estimate(std::span<const double> values, double q);

}  // namespace sac
