#pragma once

#include <span>
#include <vector>

#include "sac/potential.hpp"

namespace sac {

/// Dense polynomial in x, coefficients by increasing power.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  double operator()(double x) const;
  Polynomial derivative() const;
  std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }
  const std::vector<double>& coefficients() const { return c_; }

 private:
  std::vector<double> c_;
};

/// Barrier-degenerate diffusion coefficients h_k(x) = sigma_k (1 - x^2)^m,
/// sigma_k = sigma0 (k+1)^{-gamma}, k < K. The polynomial family uses
/// m = s0 + 2; other exponents exist to exercise the admissibility checks.
///
/// Mode k is driven by its own scalar Brownian motion, so the diffusion
/// operator maps u to sum_k h_k(u) dW_k pointwise.
class NoiseFamily {
 public:
  NoiseFamily(int s0, int K, double sigma0, double gamma, int exponent);

  int s0() const { return s0_; }
  int modes() const { return K_; }
  double sigma0() const { return sigma0_; }
  double gamma() const { return gamma_; }
  /// Vanishing order m of every h_k at +-1.
  int exponent() const { return exponent_; }

  double sigma(int k) const { return sigma_[k]; }
  const std::vector<double>& sigmas() const { return sigma_; }

  /// Shape b(x) = (1 - x^2)^m shared by all modes; h_k = sigma_k b.
  double shape(double x) const;
  /// j-th derivative of the shape (closed-form polynomial).
  double shape_derivative(int order, double x) const;
  double h(int k, double x) const { return sigma_[k] * shape(x); }
  double h_derivative(int k, int order, double x) const {
    return sigma_[k] * shape_derivative(order, x);
  }

  /// s0 >= d s_F - 1.
  bool admissible(int d, double s_f) const { return s0_ >= d * s_f - 1.0; }

 private:
  int s0_;
  int K_;
  double sigma0_;
  double gamma_;
  int exponent_;
  std::vector<double> sigma_;
  std::vector<Polynomial> derivs_;  // derivs_[j] = b^{(j)}
};

NoiseFamily make_polynomial_family(int s0, int K, double sigma0, double gamma);

struct NoiseConstants {
  double c1 = 0.0;  // C_{1,H}
  double c2 = 0.0;  // C_{2,H}
};

/// sup over [a, b] of |f|, by dense sampling and golden-section refinement
/// around the sampled maximiser.
template <class Fn>
double sup_abs(Fn&& f, double a, double b, int samples = 100000);

/// C_{1,H}^2 = sum_k ||h_k||^2_{W^{1,inf}} + ||F'' h_k^2||_inf and
/// C_{2,H}^2 = sum_k ||h_k||^2_{W^{1+2 s0,inf}}, with W^{m,inf} norms taken
/// as the sum of the sup norms of derivatives of order 0..m.
NoiseConstants constants(const NoiseFamily& f, const LogPotential& p);

struct TaylorReport {
  bool passed = true;
  double max_ratio = 0.0;   // max |h_k(x)| / bound(x) over samples with bound > 0
  double worst_x = 0.0;
  double remainder_sup = 0.0;  // M_k = sup |h_k^{(s0+2)}|
  int violations = 0;
};

/// Checks |h_k(x)| <= M_k / (s0+2)! min(|x-1|, |x+1|)^{s0+2} on a uniform
/// sample of [-1, 1].
TaylorReport taylor_bound_check(const NoiseFamily& f, int k, int n_samples = 20001);

/// Pointwise increment sum_k h_k(u_i) dW_k.
std::vector<double> apply_noise_increment(const NoiseFamily& f,
                                          std::span<const double> u,
                                          std::span<const double> dW);

}  // namespace sac

#include "sac/detail/sup_abs.hpp"
