#pragma once

#include <algorithm>
#include <cmath>

namespace sac {

template <class Fn>
double sup_abs(Fn&& f, double a, double b, int samples) {
  const double step = (b - a) / (samples - 1);
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < samples; ++i) {
    double v = std::abs(f(a + step * i));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section search for the local maximum of |f| in the neighbouring cells.
  double lo = std::max(a, a + step * (best - 1));
  double hi = std::min(b, a + step * (best + 1));
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = std::abs(f(x1));
  double f2 = std::abs(f(x2));
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = std::abs(f(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = std::abs(f(x1));
    }
  }
  return std::max({best_val, f1, f2});
}

}  // namespace sac
