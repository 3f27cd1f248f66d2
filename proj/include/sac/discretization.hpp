#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sac {

/// Uniform grid of interior nodes on the box (0, L)^d with homogeneous
/// Dirichlet data on the boundary. Node (i_0, ..., i_{d-1}), 0-based, sits
/// at x_a = (i_a + 1) h and is stored at i_0 + n i_1 + n^2 i_2.
struct Grid {
  int d = 1;
  int n = 3;
  double L = 1.0;

  Grid() = default;
  Grid(int d_, int n_, double L_);

  double h() const { return L / (n + 1); }
  std::size_t size() const;
  /// h^d, the quadrature weight of one node.
  double cell_volume() const;
  double measure() const;

  bool operator==(const Grid&) const = default;
};

struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0)
      : grid(g), values(g.size(), fill) {}
  Field(const Grid& g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Second-order (2d+1)-point discrete Laplacian with zero ghost values.
Field laplacian_apply(const Field& u);

/// Discrete sine eigenbasis of the Dirichlet Laplacian, tensorised over
/// dimensions. Modes are ordered by eigenvalue (ties by multi-index).
/// Transforms map nodal values to coefficients in the basis that is
/// orthonormal for the h^d-weighted inner product.
class Spectrum {
 public:
  explicit Spectrum(const Grid& g);

  const Grid& grid() const { return grid_; }
  std::size_t mode_count() const { return order_.size(); }

  /// Eigenvalue of -Delta_h for the j-th mode in sorted order.
  double eigenvalue(std::size_t j) const { return eig_[order_[j]]; }
  /// Eigenvalue of the tensor mode stored at coefficient slot `slot`.
  double slot_eigenvalue(std::size_t slot) const { return eig_[slot]; }
  /// Coefficient slot of the j-th sorted mode.
  std::size_t slot(std::size_t j) const { return order_[j]; }
  /// Sorted rank of the mode stored at coefficient slot `slot`.
  std::size_t rank(std::size_t slot) const { return rank_[slot]; }

  /// 1D eigenvalue (4/h^2) sin^2(j pi h / (2L)), j = 1..n.
  double eigenvalue_1d(int j) const { return eig1d_[j - 1]; }

  /// Nodal values of the j-th sorted eigenvector, unit norm in l2_h.
  Field eigenvector(std::size_t j) const;

  std::vector<double> forward(std::span<const double> u) const;
  std::vector<double> inverse(std::span<const double> coeffs) const;

  /// Solves (I - dt Delta_h) v = u.
  void solve_heat(std::span<double> u, double dt) const;

 private:
  void transform(std::vector<double>& data, double scale) const;

  Grid grid_;
  std::vector<double> sine_;   // n x n, entries sqrt(2/(n+1)) sin(pi j i/(n+1))
  std::vector<double> eig1d_;
  std::vector<double> eig_;    // per slot
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;
};

Spectrum dirichlet_spectrum(const Grid& g, std::size_t n_modes);

/// Orthogonal projection onto the span of the first n_modes eigenvectors.
Field project(const Spectrum& spec, const Field& u, std::size_t n_modes);

struct Norms {
  double l2 = 0.0;
  double h1 = 0.0;
  double h2_proxy = 0.0;
  double sup = 0.0;
  double holder = 0.0;
};

/// sum over forward differences (zero ghosts) of |grad u|^2, weighted by h^d.
double gradient_energy(const Field& u);
double l2_norm(const Field& u);
double sup_norm(const Field& u);

/// Hoelder seminorm max |u(x) - u(y)| / |x - y|^alpha over node pairs
/// (boundary nodes included, value 0) with |x - y| <= range. range <= 0
/// means all pairs.
double holder_seminorm(const Field& u, double alpha, double range);

/// Default pair range L/4.
Norms norms(const Field& u, double alpha);

/// Rectangle rule h^d sum_i phi(u_i).
double integrate(const Field& u, const std::function<double(double)>& phi);

}  // namespace sac
