#include "sac/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sac/errors.hpp"

namespace sac {

namespace {

void require_open_interval(double r, const char* what) {
  if (!(std::abs(r) < 1.0) || 1.0 - std::abs(r) < LogPotential::kEdgeGuard) {
    std::ostringstream os;
    os << what << ": argument " << r << " outside (-1, 1)";
    throw DomainError(os.str());
  }
}

// (1+r) ln(1+r) + (1-r) ln(1-r), continuous up to the endpoints.
double entropy(double r) {
  return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r);
}

}  // namespace

LogPotential::LogPotential(double theta, double theta0)
    : theta_(theta), theta0_(theta0) {
  if (!(theta > 0.0) || !(theta0 > theta) || !std::isfinite(theta0)) {
    throw ParameterError("LogPotential requires 0 < theta < theta0");
  }
  // Right well: root of theta atanh(r) = theta0 r on (0, 1). The left side
  // minus the right is negative just above 0 and positive near 1.
  double lo = 0.0;
  double hi = 1.0 - 1e-15;
  auto g = [&](double r) { return theta_ * std::atanh(r) - theta0_ * r; };
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == 0.0 || g(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  well_ = 0.5 * (lo + hi);
  shift_ = -(0.5 * theta_ * entropy(well_) - 0.5 * theta0_ * well_ * well_);
}

double LogPotential::F(double r) const {
  require_open_interval(r, "F");
  return 0.5 * theta_ * entropy(r) - 0.5 * theta0_ * r * r + shift_;
}

double LogPotential::dF(double r) const {
  require_open_interval(r, "F'");
  // atanh(r) = 1/2 ln((1+r)/(1-r)), computed through log1p
  return theta_ * std::atanh(r) - theta0_ * r;
}

double LogPotential::d2F(double r) const {
  require_open_interval(r, "F''");
  return theta_ / ((1.0 - r) * (1.0 + r)) - theta0_;
}

PotentialValue LogPotential::eval(double r) const {
  return {F(r), dF(r), d2F(r)};
}

double LogPotential::dF_from_logit(double z) const {
  return theta_ * z - theta0_ * std::tanh(z);
}

PotentialConstants LogPotential::default_constants() const {
  return {theta0_ - theta_, 1.0};
}

BarrierWeight::BarrierWeight(double s_) : s(s_) {
  if (!(s_ >= 1.0)) throw ParameterError("barrier weight exponent must be >= 1");
}

double BarrierWeight::G(double x) const {
  require_open_interval(x, "G_s");
  return std::pow((1.0 - x) * (1.0 + x), -s);
}

double BarrierWeight::dG(double x) const {
  require_open_interval(x, "G_s'");
  return 2.0 * s * x * std::pow((1.0 - x) * (1.0 + x), -(s + 1.0));
}

ResolventPoint resolvent_point(const LogPotential& p, const PotentialConstants& c,
                               double lambda, double x,
                               const ResolventConfig& cfg) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("resolvent requires lambda > 0");
  }
  if (!std::isfinite(x)) throw ParameterError("resolvent requires finite x");

  // With y = tanh z: g(z) = a tanh z + b z - x, a = 1 + lambda (C_F - theta0),
  // b = lambda theta > 0. g is strictly increasing and |a tanh z| <= |a|.
  const double a = 1.0 + lambda * (c.c_f - p.theta0());
  const double b = lambda * p.theta();
  auto g = [&](double z) { return a * std::tanh(z) + b * z - x; };
  auto dg = [&](double z) {
    double sech = 1.0 / std::cosh(z);
    return a * sech * sech + b;
  };

  double lo = (x - std::abs(a)) / b;
  double hi = (x + std::abs(a)) / b;
  if (x == 0.0) return {0.0, 0.0};

  double z = std::clamp(x, lo, hi);
  for (int it = 0; it < cfg.max_iter; ++it) {
    double r = g(z);
    if (std::abs(r) <= cfg.tol) return {std::tanh(z), z};
    if (r < 0.0) {
      lo = z;
    } else {
      hi = z;
    }
    double slope = dg(z);
    double next = z - r / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == z) break;
    z = next;
  }
  double r = g(z);
  if (std::abs(r) <= cfg.tol) return {std::tanh(z), z};
  std::ostringstream os;
  os << "resolvent: residual " << std::abs(r) << " above tolerance " << cfg.tol
     << " after " << cfg.max_iter << " iterations (lambda=" << lambda
     << ", x=" << x << ")";
  throw ConvergenceError(os.str());
}

double resolvent(const LogPotential& p, const PotentialConstants& c,
                 double lambda, double x, const ResolventConfig& cfg) {
  return resolvent_point(p, c, lambda, x, cfg).y;
}

double resolvent_residual(const LogPotential& p, const PotentialConstants& c,
                          double lambda, double x, const ResolventPoint& y) {
  return std::abs(y.y + lambda * (p.dF_from_logit(y.logit) + c.c_f * y.y) - x);
}

double yosida_dF(const LogPotential& p, const PotentialConstants& c,
                 double lambda, double x, const ResolventConfig& cfg) {
  return p.dF_from_logit(resolvent_point(p, c, lambda, x, cfg).logit);
}

bool H1Report::all_passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const CheckEntry& e) { return e.passed; });
}

H1Report check_H1(const LogPotential& p, const PotentialConstants& c,
                  int n_samples) {
  if (n_samples < 1000) throw ParameterError("check_H1 needs n_samples >= 1000");
  H1Report report;
  const BarrierWeight weight(std::max(1.0, c.s_f));

  double min_F = INFINITY;
  double worst_lower = INFINITY;  // min of F'' + c_f
  double worst_upper = INFINITY;  // min of c_f (1 + G) - F''
  for (int i = 0; i < n_samples; ++i) {
    double r = std::cos(std::numbers::pi * (i + 0.5) / n_samples);
    if (1.0 - std::abs(r) < LogPotential::kEdgeGuard) continue;
    auto v = p.eval(r);
    min_F = std::min(min_F, v.F);
    worst_lower = std::min(worst_lower, v.d2F + c.c_f);
    worst_upper = std::min(worst_upper, c.c_f * (1.0 + weight.G(r)) - v.d2F);
  }
  // F'(0) and F''(0) are not necessarily on the Chebyshev sample.
  min_F = std::min(min_F, p.F(0.0));
  worst_lower = std::min(worst_lower, p.d2F(0.0) + c.c_f);

  const double tiny = 1e-12;
  report.entries.push_back({"F_nonnegative", min_F >= -tiny, min_F,
                            "sampled minimum of F"});
  double dF0 = p.dF(0.0);
  report.entries.push_back({"dF_zero_at_origin", std::abs(dF0) <= 1e-14, dF0,
                            "F'(0)"});
  // Probe r = 1 - 10^-k, k = 6..12: |F'| must grow along the probes and pass
  // 10 by the innermost one. A single probe at 1 - 1e-6 is too coarse for
  // the logarithmic divergence when theta is small.
  auto blowup = [&](double sign, double& last) {
    bool growing = true;
    double prev = -INFINITY;
    for (int k = 6; k <= 12; ++k) {
      double v = sign * p.dF(sign * (1.0 - std::pow(10.0, -k)));
      growing = growing && v > prev;
      prev = v;
    }
    last = sign * prev;
    return growing && prev > 10.0;
  };
  double left = 0.0, right = 0.0;
  bool left_ok = blowup(-1.0, left);
  bool right_ok = blowup(1.0, right);
  report.entries.push_back({"dF_blowup_left", left_ok, left,
                            "F'(-1 + 10^-k) decreasing in k = 6..12, < -10 at k = 12"});
  report.entries.push_back({"dF_blowup_right", right_ok, right,
                            "F'(1 - 10^-k) increasing in k = 6..12, > 10 at k = 12"});
  report.entries.push_back({"d2F_lower_bound", c.c_f > 0.0 && worst_lower >= -tiny,
                            worst_lower, "min of F'' + C_F"});
  report.entries.push_back({"d2F_upper_bound", c.s_f >= 1.0 && worst_upper >= -tiny,
                            worst_upper, "min of C_F (1 + G_{s_F}) - F''"});
  return report;
}

}  // namespace sac
