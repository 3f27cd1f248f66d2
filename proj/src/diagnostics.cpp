#include "sac/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sac/errors.hpp"

namespace sac {

double TrajectoryRecord::max_g_mass() const {
  double m = -INFINITY;
  for (const auto& s : snapshots) {
    if (std::isnan(s.g_mass_s0)) return NAN;
    m = std::max(m, s.g_mass_s0);
  }
  return m;
}

double TrajectoryRecord::max_holder() const {
  double m = 0.0;
  for (const auto& s : snapshots) m = std::max(m, s.holder_alpha);
  return m;
}

double separation_layer(const Field& u) { return 1.0 - sup_norm(u); }

double energy(const Field& u, const LogPotential& p) {
  return 0.5 * gradient_energy(u) + integrate(u, [&](double v) { return p.F(v); });
}

double g_mass(const Field& u, double s) {
  const BarrierWeight w(s);
  return integrate(u, [&](double v) { return w.G(v); });
}

Snapshot snapshot(const Field& u, double t, const LogPotential& p, int s0, double alpha,
                  double holder_range) {
  Snapshot s;
  s.t = t;
  s.sup = sup_norm(u);
  s.delta = 1.0 - s.sup;
  if (1.0 - s.sup >= LogPotential::kEdgeGuard) {
    s.energy = energy(u, p);
    s.g_mass_s0 = g_mass(u, s0);
    s.g_mass_s0p1 = g_mass(u, s0 + 1);
  } else {
    s.energy = s.g_mass_s0 = s.g_mass_s0p1 = NAN;
  }
  s.l2 = l2_norm(u);
  s.h1 = std::sqrt(s.l2 * s.l2 + gradient_energy(u));
  s.h2_proxy = l2_norm(laplacian_apply(u));
  s.holder_alpha = holder_seminorm(u, alpha, holder_range);
  return s;
}

double default_alpha(int d) { return d == 2 ? 0.75 : 0.45; }

double CertificateInput::measure() const { return std::pow(L, d); }

namespace {

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

double certificate_integral(const CertificateInput& c, double eps,
                            const QuadratureResolution& res) {
  if (!(eps > 0.0)) throw ParameterError("certificate integral needs eps > 0");
  const double L = c.L;
  const int d = c.d;
  const double s0 = c.s0;
  const double alpha = c.alpha;
  const double R = c.holder_range;

  auto spread = [&](double r) {
    double k = 1.0;
    if (R > 0.0 && r > R) k = std::pow(std::ceil(r / R), 1.0 - alpha);
    return 2.0 * c.Lambda * k * std::pow(r, alpha);
  };
  auto f = [&](double r) { return std::pow(eps + spread(r), -s0); };

  // Orthant of the ball of radius L around a corner: c_d r^{d-1} dr.
  const double cd = d == 1 ? 1.0 : std::numbers::pi / 2.0;
  const double rmax = L;

  // Panel boundaries: geometric towards r = 0 from the transition scale
  // where spread(r) ~ eps, plus the kinks of k(r).
  std::vector<double> bounds{rmax};
  double rc = c.Lambda > 0.0 ? std::pow(eps / (2.0 * c.Lambda), 1.0 / alpha) : rmax;
  double r_min = std::min(rc, rmax) * 1e-9;
  for (double r = rmax / res.panel_ratio; r > r_min; r /= res.panel_ratio) bounds.push_back(r);
  bounds.push_back(r_min);
  if (R > 0.0) {
    for (double r = R; r < rmax; r += R) bounds.push_back(r);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  static thread_local int cached_n = 0;
  static thread_local GaussRule rule;
  if (cached_n != res.gauss_points) {
    rule = gauss_legendre(res.gauss_points);
    cached_n = res.gauss_points;
  }

  // [0, r_min]: integrand ~ f(0) r^{d-1}
  double total = f(0.0) * std::pow(r_min, d) / d;
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    double a = bounds[p], b = bounds[p + 1];
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < res.gauss_points; ++i) {
      double r = mid + half * rule.nodes[i];
      acc += rule.weights[i] * f(r) * std::pow(r, d - 1);
    }
    total += acc * half;
  }
  total *= cd;
  if (d >= 2) {
    // remainder of the box, where |x - x0| <= L sqrt(d)
    double ball = cd * std::pow(L, d) / d;
    total += (c.measure() - ball) * f(L * std::sqrt(static_cast<double>(d)));
  }
  return total;
}

double separation_certificate(const CertificateInput& c, const QuadratureResolution& res) {
  if (!(c.alpha * c.s0 > c.d)) {
    std::ostringstream os;
    os << "separation certificate requires alpha s0 > d (alpha=" << c.alpha
       << ", s0=" << c.s0 << ", d=" << c.d << ")";
    throw ParameterError(os.str());
  }
  if (!(c.M > 0.0) || !std::isfinite(c.M) || !(c.Lambda >= 0.0) || !std::isfinite(c.Lambda)) {
    throw ParameterError("separation certificate needs finite M > 0 and Lambda >= 0");
  }
  const double hi0 = 2.0 * std::pow(c.measure() / c.M, 1.0 / c.s0);
  double log_hi = std::log(hi0);
  double log_lo = log_hi;
  // I(eps) decreases in eps and diverges as eps -> 0.
  for (int it = 0; it < 400; ++it) {
    log_lo -= std::log(8.0);
    if (certificate_integral(c, std::exp(log_lo), res) > c.M) break;
    if (log_lo < std::log(DBL_MIN) + 10.0) {
      throw ConvergenceError("separation certificate: no lower bracket above DBL_MIN");
    }
  }
  for (int it = 0; it < 200 && log_hi - log_lo > 1e-15; ++it) {
    double mid = 0.5 * (log_lo + log_hi);
    if (certificate_integral(c, std::exp(mid), res) > c.M) {
      log_lo = mid;
    } else {
      log_hi = mid;
    }
  }
  // lower end keeps the certificate on the safe side
  return std::exp(log_lo);
}

bool AuditReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const AuditEntry& e) { return e.passed; });
}

AuditReport certificate_audit(const TrajectoryRecord& rec) {
  AuditReport rep;
  rep.M = rec.max_g_mass();
  rep.Lambda = rec.max_holder();
  if (!std::isfinite(rep.M)) {
    // a snapshot outside (-1, 1): nothing can be certified
    rep.epsilon_star = NAN;
    for (const auto& s : rec.snapshots) rep.entries.push_back({s.t, 1.0 - s.sup * s.sup, NAN, false});
    return rep;
  }
  CertificateInput in;
  in.M = rep.M;
  in.Lambda = rep.Lambda;
  in.alpha = rec.meta.alpha;
  in.s0 = rec.meta.s0;
  in.d = rec.meta.d;
  // The nodal G mass covers n^d cells of volume h^d, a box of side n h.
  in.L = rec.meta.n > 0 ? rec.meta.L * rec.meta.n / (rec.meta.n + 1.0) : rec.meta.L;
  in.holder_range = rec.meta.holder_range;
  rep.epsilon_star = separation_certificate(in);
  for (const auto& s : rec.snapshots) {
    double measured = (1.0 - s.sup) * (1.0 + s.sup);
    double slack = measured - rep.epsilon_star;
    rep.entries.push_back({s.t, measured, slack, slack >= 0.0});
  }
  return rep;
}

MomentEstimate exp_moment_estimate(std::span<const double> values, double q) {
  if (values.empty()) throw ParameterError("exp_moment_estimate: no values");
  if (!(q >= 0.0)) throw ParameterError("exp_moment_estimate: q must be >= 0");
  for (double v : values) {
    if (!std::isfinite(v)) throw ParameterError("exp_moment_estimate: non-finite value");
  }
  const double n = static_cast<double>(values.size());
  double shift = -INFINITY;
  for (double v : values) shift = std::max(shift, q * v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(q * v - shift);
  double mean_w = sum / n;
  double var_w = 0.0;
  if (values.size() > 1) {
    for (double v : values) {
      double w = std::exp(q * v - shift) - mean_w;
      var_w += w * w;
    }
    var_w /= n - 1.0;
  }
  MomentEstimate est;
  double log_mean = shift + std::log(mean_w);
  if (log_mean > std::log(DBL_MAX)) {
    est.mean = INFINITY;
    est.stderr_ = INFINITY;
    est.overflow = true;
    return est;
  }
  est.mean = std::exp(log_mean);
  est.stderr_ = std::exp(shift) * std::sqrt(var_w / n);
  if (!std::isfinite(est.stderr_)) {
    est.stderr_ = INFINITY;
    est.overflow = true;
  }
  return est;
}

}  // namespace sac
