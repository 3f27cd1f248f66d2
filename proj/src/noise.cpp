#include "sac/noise.hpp"

#include <cmath>
#include <sstream>

#include "sac/errors.hpp"

namespace sac {

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(c_.size() - 1);
  for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
  return Polynomial(std::move(d));
}

NoiseFamily::NoiseFamily(int s0, int K, double sigma0, double gamma, int exponent)
    : s0_(s0), K_(K), sigma0_(sigma0), gamma_(gamma), exponent_(exponent) {
  if (s0 < 1) throw ParameterError("noise family requires s0 >= 1");
  if (K < 1) throw ParameterError("noise family requires K >= 1");
  if (!(sigma0 >= 0.0) || !std::isfinite(sigma0)) {
    throw ParameterError("noise family requires sigma0 >= 0");
  }
  if (!(gamma > 0.5)) throw ParameterError("noise family requires gamma > 1/2");
  if (exponent < 1) throw ParameterError("noise family requires exponent >= 1");

  sigma_.resize(K);
  for (int k = 0; k < K; ++k) sigma_[k] = sigma0 * std::pow(k + 1.0, -gamma);

  // (1 - x^2)^m = sum_j C(m, j) (-1)^j x^{2j}
  std::vector<double> c(2 * exponent + 1, 0.0);
  double binom = 1.0;
  for (int j = 0; j <= exponent; ++j) {
    c[2 * j] = (j % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (exponent - j) / (j + 1);
  }
  const int max_order = std::max(1 + 2 * s0, exponent) + 1;
  derivs_.reserve(max_order + 1);
  derivs_.emplace_back(std::move(c));
  for (int j = 1; j <= max_order; ++j) derivs_.push_back(derivs_.back().derivative());
}

double NoiseFamily::shape(double x) const {
  return std::pow((1.0 - x) * (1.0 + x), exponent_);
}

double NoiseFamily::shape_derivative(int order, double x) const {
  if (order == 0) return shape(x);
  if (order < 0) throw ParameterError("negative derivative order");
  if (order >= static_cast<int>(derivs_.size())) return 0.0;
  return derivs_[order](x);
}

NoiseFamily make_polynomial_family(int s0, int K, double sigma0, double gamma) {
  return NoiseFamily(s0, K, sigma0, gamma, s0 + 2);
}

namespace {

double sobolev_sup_norm(const NoiseFamily& f, int order) {
  double total = 0.0;
  for (int j = 0; j <= order; ++j) {
    total += sup_abs([&](double x) { return f.shape_derivative(j, x); }, -1.0, 1.0);
  }
  return total;
}

}  // namespace

NoiseConstants constants(const NoiseFamily& f, const LogPotential& p) {
  const double w1 = sobolev_sup_norm(f, 1);
  const double w2 = sobolev_sup_norm(f, 1 + 2 * f.s0());
  // F'' b^2 = theta (1-x^2)^{2m-1} - theta0 (1-x^2)^{2m}; bounded since m >= 1.
  const int m = f.exponent();
  const double curv = sup_abs(
      [&](double x) {
        double q = (1.0 - x) * (1.0 + x);
        return p.theta() * std::pow(q, 2 * m - 1) - p.theta0() * std::pow(q, 2 * m);
      },
      -1.0, 1.0);

  double s1 = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < f.modes(); ++k) {
    double sk = f.sigma(k);
    double wk1 = sk * w1;
    double ck = sk * sk * curv;
    double wk2 = sk * w2;
    if (!std::isfinite(wk1) || !std::isfinite(ck) || !std::isfinite(wk2)) {
      std::ostringstream os;
      os << "noise constants: non-finite norm for mode " << k;
      throw OverflowError(os.str());
    }
    s1 += wk1 * wk1 + ck;
    s2 += wk2 * wk2;
  }
  return {std::sqrt(s1), std::sqrt(s2)};
}

TaylorReport taylor_bound_check(const NoiseFamily& f, int k, int n_samples) {
  if (k < 0 || k >= f.modes()) throw ParameterError("taylor_bound_check: mode out of range");
  if (n_samples < 2) throw ParameterError("taylor_bound_check: need >= 2 samples");
  const int order = f.s0() + 2;
  TaylorReport rep;
  rep.remainder_sup =
      sup_abs([&](double x) { return f.h_derivative(k, order, x); }, -1.0, 1.0);
  const double factorial = std::tgamma(order + 1.0);
  const double scale = rep.remainder_sup / factorial;
  for (int i = 0; i < n_samples; ++i) {
    double x = -1.0 + 2.0 * i / (n_samples - 1);
    double dist = std::min(std::abs(x - 1.0), std::abs(x + 1.0));
    double lhs = std::abs(f.h(k, x));
    double bound = scale * std::pow(dist, order);
    // relative slack for rounding in the closed-form evaluation
    if (lhs > bound * (1.0 + 1e-12) + 1e-300) {
      ++rep.violations;
      rep.passed = false;
    }
    if (bound > 0.0) {
      double ratio = lhs / bound;
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.worst_x = x;
      }
    } else if (lhs > 0.0) {
      rep.max_ratio = INFINITY;
      rep.worst_x = x;
    }
  }
  return rep;
}

std::vector<double> apply_noise_increment(const NoiseFamily& f,
                                          std::span<const double> u,
                                          std::span<const double> dW) {
  if (static_cast<int>(dW.size()) != f.modes()) {
    std::ostringstream os;
    os << "apply_noise_increment: expected " << f.modes() << " increments, got "
       << dW.size();
    throw DimensionError(os.str());
  }
  // All modes share the shape b, so sum_k h_k(u) dW_k = b(u) sum_k sigma_k dW_k.
  double drive = 0.0;
  for (int k = 0; k < f.modes(); ++k) drive += f.sigma(k) * dW[k];
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = f.shape(u[i]) * drive;
  return out;
}

}  // namespace sac
