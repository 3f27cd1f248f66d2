#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sac/errors.hpp"
#include "sac/noise.hpp"

using namespace sac;

namespace {
const LogPotential kPot(1.0, 2.0);
}

TEST_CASE("polynomial family values") {
  auto f = make_polynomial_family(3, 16, 0.1, 1.0);
  CHECK(f.exponent() == 5);
  for (int k = 0; k < f.modes(); ++k) {
    CHECK(f.h(k, 1.0) == 0.0);
    CHECK(f.h(k, -1.0) == 0.0);
  }
  CHECK(f.h(0, 0.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(f.h(0, 0.5) == doctest::Approx(0.02373046875).epsilon(1e-15));
  CHECK(f.sigma(3) == doctest::Approx(0.025).epsilon(1e-15));
  CHECK_THROWS_AS(make_polynomial_family(0, 4, 0.1, 1.0), ParameterError);
  CHECK_THROWS_AS(make_polynomial_family(3, 0, 0.1, 1.0), ParameterError);
  CHECK_THROWS_AS(make_polynomial_family(3, 4, 0.1, 0.5), ParameterError);
}

TEST_CASE("closed-form derivatives match finite differences") {
  auto f = make_polynomial_family(3, 1, 1.0, 1.0);
  for (double x : {-0.8, -0.3, 0.1, 0.7}) {
    for (int j = 0; j < 6; ++j) {
      double h = 1e-5;
      double fd = (f.shape_derivative(j, x + h) - f.shape_derivative(j, x - h)) / (2 * h);
      CHECK(fd == doctest::Approx(f.shape_derivative(j + 1, x)).epsilon(1e-6));
    }
  }
  // degree 10: the 11th derivative vanishes
  CHECK(f.shape_derivative(11, 0.3) == 0.0);
}

TEST_CASE("noise constants against the dense-grid oracle") {
  auto f = make_polynomial_family(3, 16, 0.1, 1.0);
  auto c = constants(f, kPot);
  // numpy/mpmath: sup norms of (1-x^2)^5 and its derivatives up to order 7
  CHECK(c.c1 == doctest::Approx(0.40772162611445340).epsilon(1e-9));
  CHECK(c.c2 == doctest::Approx(58521.973801841540).epsilon(1e-9));

  auto zero = constants(make_polynomial_family(3, 16, 0.0, 1.0), kPot);
  CHECK(zero.c1 == 0.0);
  CHECK(zero.c2 == 0.0);

  auto doubled = constants(make_polynomial_family(3, 16, 0.2, 1.0), kPot);
  CHECK(doubled.c1 == 2.0 * c.c1);
  CHECK(doubled.c2 == 2.0 * c.c2);
}

TEST_CASE("constants grow with the truncation and converge") {
  double prev1 = 0.0, prev2 = 0.0;
  double last_inc = INFINITY;
  for (int K : {1, 2, 4, 8, 16, 32, 64, 128, 256, 512}) {
    auto c = constants(make_polynomial_family(3, K, 0.1, 1.0), kPot);
    CHECK(c.c1 >= prev1);
    CHECK(c.c2 >= prev2);
    if (K > 1) {
      double inc = c.c1 - prev1;
      CHECK(inc < last_inc);
      last_inc = inc;
    }
    prev1 = c.c1;
    prev2 = c.c2;
  }
  // for gamma = 2 the per-mode increment of C_{1,H} beyond K = 256 is < 1e-8
  auto a = constants(make_polynomial_family(3, 256, 0.1, 2.0), kPot);
  auto b = constants(make_polynomial_family(3, 257, 0.1, 2.0), kPot);
  CHECK(b.c1 - a.c1 < 1e-8);
  CHECK(b.c1 - a.c1 >= 0.0);
}

TEST_CASE("degeneracy and Lipschitz bounds") {
  auto f = make_polynomial_family(3, 16, 0.1, 1.0);
  auto c = constants(f, kPot);
  for (int i = 0; i <= 20000; ++i) {
    double x = -1.0 + 2.0 * i / 20000.0;
    for (int k : {0, 5, 15}) {
      CHECK(std::abs(f.h(k, x)) <= f.sigma(k) * 32.0 * std::pow(1.0 - std::abs(x), 5) * (1 + 1e-12));
    }
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> X(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double a = X(rng), b = X(rng);
    double lhs = 0.0;
    for (int k = 0; k < f.modes(); ++k) lhs += std::pow(f.h(k, a) - f.h(k, b), 2);
    CHECK(lhs <= c.c1 * c.c1 * (a - b) * (a - b) * (1 + 1e-12));
  }
}

TEST_CASE("Taylor remainder bound") {
  auto f = make_polynomial_family(3, 16, 0.1, 1.0);
  for (int k : {0, 7, 15}) {
    auto rep = taylor_bound_check(f, k);
    CHECK(rep.passed);
    CHECK(rep.max_ratio <= 1.0);
    CHECK(rep.remainder_sup == doctest::Approx(f.sigma(k) * 3840.0).epsilon(1e-12));
  }
  CHECK(std::abs(f.h(0, 1.0)) == 0.0);

  // vanishing order 1 declared as s0 = 3: the remainder bound collapses
  NoiseFamily adversarial(3, 1, 0.1, 1.0, 1);
  auto bad = taylor_bound_check(adversarial, 0);
  CHECK_FALSE(bad.passed);
  CHECK(bad.violations > 0);
  CHECK_THROWS_AS(taylor_bound_check(f, 16), ParameterError);
}

TEST_CASE("noise increment") {
  auto f = make_polynomial_family(3, 4, 0.1, 1.0);
  std::vector<double> zero(5, 0.0), half(5, 0.5);
  std::vector<double> dW{0.3, 0.0, 0.0, 0.0};
  for (double v : apply_noise_increment(f, zero, dW)) CHECK(v == doctest::Approx(0.03).epsilon(1e-15));
  for (double v : apply_noise_increment(f, zero, std::vector<double>(4, 0.0))) CHECK(v == 0.0);
  std::vector<double> unit{1.0, 0.0, 0.0, 0.0};
  for (double v : apply_noise_increment(f, half, unit)) {
    CHECK(v == doctest::Approx(0.02373046875).epsilon(1e-14));
  }
  // vanishes to order (s0 + 2) at the barriers
  double eps = 1e-3;
  std::vector<double> edge{1.0 - eps};
  double inc = apply_noise_increment(f, edge, unit)[0];
  CHECK(std::abs(inc) <= 0.1 * 32.0 * std::pow(eps, 5));
  CHECK_THROWS_AS(apply_noise_increment(f, zero, std::vector<double>(3, 0.0)), DimensionError);
}

TEST_CASE("admissibility floor") {
  auto f = make_polynomial_family(3, 1, 0.1, 1.0);
  CHECK(f.admissible(1, 1.0));
  CHECK(f.admissible(3, 1.0));
  CHECK_FALSE(make_polynomial_family(1, 1, 0.1, 1.0).admissible(3, 1.0));
  CHECK(make_polynomial_family(1, 1, 0.1, 1.0).admissible(2, 1.0));
}
