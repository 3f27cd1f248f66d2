#pragma once

#include <string>
#include <vector>

namespace sac {

/// Curvature constants of a singular potential: -c_f <= F'' <= c_f (1 + G_{s_f}).
struct PotentialConstants {
  double c_f = 1.0;
  double s_f = 1.0;
};

struct PotentialValue {
  double F;
  double dF;
  double d2F;
};

/// Logarithmic (Flory-Huggins) double-well potential on (-1, 1),
///
///   F(r) = theta/2 [(1+r) ln(1+r) + (1-r) ln(1-r)] - theta0/2 r^2 + shift,
///
/// with 0 < theta < theta0. The shift makes min F = 0 and leaves F' and F''
/// unchanged. Inputs with 1 - |r| < kEdgeGuard raise DomainError.
class LogPotential {
 public:
  static constexpr double kEdgeGuard = 1e-14;

  LogPotential(double theta, double theta0);

  double theta() const { return theta_; }
  double theta0() const { return theta0_; }
  double shift() const { return shift_; }
  /// Positive minimiser of F (the right well).
  double well() const { return well_; }

  PotentialValue eval(double r) const;
  double F(double r) const;
  double dF(double r) const;
  double d2F(double r) const;

  /// F'(tanh z) evaluated through z = atanh(r); finite for every real z.
  double dF_from_logit(double z) const;

  /// Sharpest admissible (C_F, s_F): C_F = theta0 - theta, s_F = 1.
  PotentialConstants default_constants() const;

 private:
  double theta_;
  double theta0_;
  double shift_ = 0.0;
  double well_ = 0.0;
};

/// Barrier weight G_s(x) = (1 - x^2)^{-s}.
struct BarrierWeight {
  double s = 1.0;

  explicit BarrierWeight(double s_);

  double G(double x) const;
  /// G_s'(x) = 2 s x G_{s+1}(x).
  double dG(double x) const;
};

struct ResolventConfig {
  double tol = 1e-13;
  int max_iter = 200;
};

struct ResolventPoint {
  double y;      // J_lambda(x) in (-1, 1)
  double logit;  // atanh(y), kept so callers near +-1 stay finite
};

/// Resolvent J_lambda of the monotone map A(y) = F'(y) + C_F y: the unique
/// y in (-1, 1) with y + lambda A(y) = x. Solved in the coordinate
/// z = atanh(y), where the equation is a strictly increasing map of R onto R,
/// by bracketed Newton with bisection fallback.
ResolventPoint resolvent_point(const LogPotential& p, const PotentialConstants& c,
                               double lambda, double x,
                               const ResolventConfig& cfg = {});

double resolvent(const LogPotential& p, const PotentialConstants& c,
                 double lambda, double x, const ResolventConfig& cfg = {});

/// |y + lambda (F'(y) + C_F y) - x| at y = J_lambda(x), evaluated in logit form.
double resolvent_residual(const LogPotential& p, const PotentialConstants& c,
                          double lambda, double x, const ResolventPoint& y);

/// Yosida-type approximation F'_lambda = F' o J_lambda.
double yosida_dF(const LogPotential& p, const PotentialConstants& c,
                 double lambda, double x, const ResolventConfig& cfg = {});

struct CheckEntry {
  std::string name;
  bool passed;
  double measured;
  std::string detail;
};

struct H1Report {
  std::vector<CheckEntry> entries;
  bool all_passed() const;
};

/// Samples (-1, 1) at Chebyshev points clustered towards the barriers and
/// checks each bullet of the structural potential hypothesis.
H1Report check_H1(const LogPotential& p, const PotentialConstants& c,
                  int n_samples = 4096);

}  // namespace sac
