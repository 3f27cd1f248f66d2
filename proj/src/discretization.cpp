#include "sac/discretization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sac/errors.hpp"

namespace sac {

Grid::Grid(int d_, int n_, double L_) : d(d_), n(n_), L(L_) {
  if (d < 1 || d > 3) throw ParameterError("grid dimension must be 1, 2 or 3");
  if (n < 3) throw ParameterError("grid needs at least 3 interior nodes per dimension");
  if (!(L > 0.0) || !std::isfinite(L)) throw ParameterError("grid edge length must be positive");
}

std::size_t Grid::size() const {
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  return total;
}

double Grid::cell_volume() const { return std::pow(h(), d); }

double Grid::measure() const { return std::pow(L, d); }

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) {
    std::ostringstream os;
    os << "field has " << values.size() << " values, grid has " << g.size() << " nodes";
    throw DimensionError(os.str());
  }
}

namespace {

std::size_t stride_of(const Grid& g, int axis) {
  std::size_t s = 1;
  for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(g.n);
  return s;
}

std::array<int, 3> unravel(const Grid& g, std::size_t idx) {
  std::array<int, 3> out{0, 0, 0};
  for (int a = 0; a < g.d; ++a) {
    out[a] = static_cast<int>(idx % g.n);
    idx /= g.n;
  }
  return out;
}

}  // namespace

Field laplacian_apply(const Field& u) {
  const Grid& g = u.grid;
  const double inv_h2 = 1.0 / (g.h() * g.h());
  Field out(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto idx = unravel(g, i);
    double acc = -2.0 * g.d * u[i];
    for (int a = 0; a < g.d; ++a) {
      std::size_t s = stride_of(g, a);
      if (idx[a] > 0) acc += u[i - s];
      if (idx[a] < g.n - 1) acc += u[i + s];
    }
    out[i] = acc * inv_h2;
  }
  return out;
}

Spectrum::Spectrum(const Grid& g) : grid_(g) {
  const int n = g.n;
  const double h = g.h();
  sine_.resize(static_cast<std::size_t>(n) * n);
  const double norm = std::sqrt(2.0 / (n + 1));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      sine_[static_cast<std::size_t>(j) * n + i] =
          norm * std::sin(std::numbers::pi * (j + 1) * (i + 1) / (n + 1));
    }
  }
  eig1d_.resize(n);
  for (int j = 1; j <= n; ++j) {
    double s = std::sin(j * std::numbers::pi * h / (2.0 * g.L));
    eig1d_[j - 1] = 4.0 / (h * h) * s * s;
  }
  const std::size_t total = g.size();
  eig_.resize(total);
  for (std::size_t slot = 0; slot < total; ++slot) {
    auto idx = unravel(g, slot);
    double e = 0.0;
    for (int a = 0; a < g.d; ++a) e += eig1d_[idx[a]];
    eig_[slot] = e;
  }
  order_.resize(total);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return eig_[a] < eig_[b]; });
  rank_.resize(total);
  for (std::size_t j = 0; j < total; ++j) rank_[order_[j]] = j;
}

void Spectrum::transform(std::vector<double>& data, double scale) const {
  const Grid& g = grid_;
  const int n = g.n;
  std::vector<double> line(n), out(n);
  for (int axis = 0; axis < g.d; ++axis) {
    const std::size_t s = stride_of(g, axis);
    const std::size_t block = s * n;
    for (std::size_t base = 0; base < data.size(); base += block) {
      for (std::size_t off = 0; off < s; ++off) {
        const std::size_t start = base + off;
        for (int i = 0; i < n; ++i) line[i] = data[start + i * s];
        for (int j = 0; j < n; ++j) {
          const double* row = &sine_[static_cast<std::size_t>(j) * n];
          double acc = 0.0;
          for (int i = 0; i < n; ++i) acc += row[i] * line[i];
          out[j] = acc;
        }
        for (int j = 0; j < n; ++j) data[start + j * s] = out[j];
      }
    }
  }
  if (scale != 1.0) {
    for (double& v : data) v *= scale;
  }
}

std::vector<double> Spectrum::forward(std::span<const double> u) const {
  std::vector<double> data(u.begin(), u.end());
  transform(data, std::pow(grid_.h(), 0.5 * grid_.d));
  return data;
}

std::vector<double> Spectrum::inverse(std::span<const double> coeffs) const {
  std::vector<double> data(coeffs.begin(), coeffs.end());
  transform(data, std::pow(grid_.h(), -0.5 * grid_.d));
  return data;
}

Field Spectrum::eigenvector(std::size_t j) const {
  if (j >= mode_count()) throw ParameterError("eigenvector index out of range");
  std::vector<double> coeffs(mode_count(), 0.0);
  coeffs[order_[j]] = 1.0;
  return Field(grid_, inverse(coeffs));
}

void Spectrum::solve_heat(std::span<double> u, double dt) const {
  std::vector<double> data(u.begin(), u.end());
  transform(data, 1.0);
  for (std::size_t slot = 0; slot < data.size(); ++slot) data[slot] /= 1.0 + dt * eig_[slot];
  transform(data, 1.0);
  std::copy(data.begin(), data.end(), u.begin());
}

Spectrum dirichlet_spectrum(const Grid& g, std::size_t n_modes) {
  if (n_modes > g.size()) {
    std::ostringstream os;
    os << "requested " << n_modes << " modes, grid supports " << g.size();
    throw ParameterError(os.str());
  }
  return Spectrum(g);
}

Field project(const Spectrum& spec, const Field& u, std::size_t n_modes) {
  if (n_modes > spec.mode_count()) throw ParameterError("projection: too many modes");
  if (n_modes == spec.mode_count()) return u;
  auto coeffs = spec.forward(u.values);
  for (std::size_t slot = 0; slot < coeffs.size(); ++slot) {
    if (spec.rank(slot) >= n_modes) coeffs[slot] = 0.0;
  }
  return Field(u.grid, spec.inverse(coeffs));
}

double gradient_energy(const Field& u) {
  const Grid& g = u.grid;
  const double h = g.h();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto idx = unravel(g, i);
    for (int a = 0; a < g.d; ++a) {
      std::size_t s = stride_of(g, a);
      double next = idx[a] < g.n - 1 ? u[i + s] : 0.0;
      double diff = next - u[i];
      acc += diff * diff;
      // edge between the lower ghost and the first interior node
      if (idx[a] == 0) acc += u[i] * u[i];
    }
  }
  return acc / (h * h) * g.cell_volume();
}

double l2_norm(const Field& u) {
  double acc = 0.0;
  for (double v : u.values) acc += v * v;
  return std::sqrt(acc * u.grid.cell_volume());
}

double sup_norm(const Field& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

double holder_seminorm(const Field& u, double alpha, double range) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("Hoelder exponent must lie in (0, 1]");
  const Grid& g = u.grid;
  const int n = g.n;
  const int ext = n + 2;  // with one boundary layer on each side
  const double h = g.h();

  std::size_t ext_total = 1;
  for (int a = 0; a < g.d; ++a) ext_total *= ext;
  std::vector<double> val(ext_total, 0.0);
  auto ext_index = [&](const std::array<int, 3>& e) {
    std::size_t idx = 0;
    for (int a = g.d - 1; a >= 0; --a) idx = idx * ext + e[a];
    return idx;
  };
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto idx = unravel(g, i);
    std::array<int, 3> e{0, 0, 0};
    for (int a = 0; a < g.d; ++a) e[a] = idx[a] + 1;
    val[ext_index(e)] = u[i];
  }

  const int reach = range > 0.0 ? std::min(ext - 1, static_cast<int>(std::floor(range / h + 1e-9)))
                                : ext - 1;
  const double reach2 = range > 0.0 ? (range / h) * (range / h) * (1.0 + 1e-12) : INFINITY;

  // Half-space of offsets: each unordered pair visited once.
  struct Offset {
    std::array<int, 3> o;
    double inv_dist_alpha;
  };
  std::vector<Offset> offsets;
  const int r1 = g.d >= 2 ? reach : 0;
  const int r2 = g.d >= 3 ? reach : 0;
  for (int o2 = -r2; o2 <= r2; ++o2) {
    for (int o1 = -r1; o1 <= r1; ++o1) {
      for (int o0 = -reach; o0 <= reach; ++o0) {
        std::array<int, 3> o{o0, o1, o2};
        // lexicographically positive (last axis most significant)
        bool positive = o2 > 0 || (o2 == 0 && (o1 > 0 || (o1 == 0 && o0 > 0)));
        if (!positive) continue;
        double dist2 = double(o0) * o0 + double(o1) * o1 + double(o2) * o2;
        if (dist2 > reach2) continue;
        offsets.push_back({o, std::pow(std::sqrt(dist2) * h, -alpha)});
      }
    }
  }

  double best = 0.0;
  std::array<int, 3> e{0, 0, 0};
  const int e1_max = g.d >= 2 ? ext : 1;
  const int e2_max = g.d >= 3 ? ext : 1;
  for (e[2] = 0; e[2] < e2_max; ++e[2]) {
    for (e[1] = 0; e[1] < e1_max; ++e[1]) {
      for (e[0] = 0; e[0] < ext; ++e[0]) {
        const double a_val = val[ext_index(e)];
        for (const auto& off : offsets) {
          std::array<int, 3> f{e[0] + off.o[0], e[1] + off.o[1], e[2] + off.o[2]};
          bool inside = true;
          for (int a = 0; a < g.d; ++a) inside = inside && f[a] >= 0 && f[a] < ext;
          if (!inside) continue;
          double diff = std::abs(val[ext_index(f)] - a_val);
          if (diff == 0.0) continue;
          best = std::max(best, diff * off.inv_dist_alpha);
        }
      }
    }
  }
  return best;
}

Norms norms(const Field& u, double alpha) {
  Norms out;
  out.l2 = l2_norm(u);
  out.h1 = std::sqrt(out.l2 * out.l2 + gradient_energy(u));
  out.h2_proxy = l2_norm(laplacian_apply(u));
  out.sup = sup_norm(u);
  out.holder = holder_seminorm(u, alpha, 0.25 * u.grid.L);
  return out;
}

double integrate(const Field& u, const std::function<double(double)>& phi) {
  double acc = 0.0;
  for (double v : u.values) acc += phi(v);
  return acc * u.grid.cell_volume();
}

}  // namespace sac
