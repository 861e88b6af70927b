#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "horo/grid.hpp"

namespace horo {

/// Homotopy weight phi(r) = exp(k (r0 - r)). For any r1 < r0 < r2 this
/// satisfies: positive, > 1 below r1, < 1 above r2, strictly decreasing.
struct PhiWeight {
  double r0 = 1.0;
  double k = 1.0;

  double value(double r) const { return std::exp(k * (r0 - r)); }
  double deriv(double r) const { return -k * std::exp(k * (r0 - r)); }
};

/// Tabulated f(x, r): one radius lattice shared by all nodes, values stored
/// radius-major. Radial interpolation is a not-a-knot cubic spline per node;
/// outside the lattice the end value continues linearly with the end slope.
class RadialTable {
 public:
  RadialTable() = default;

  RadialTable(std::vector<double> radii, std::vector<double> values, int nodes)
      : radii_(std::move(radii)), values_(std::move(values)), nodes_(nodes) {
    const int nr = static_cast<int>(radii_.size());
    if (nr < 4) throw std::invalid_argument("RadialTable: need at least 4 radii");
    for (int k = 1; k < nr; ++k)
      if (!(radii_[static_cast<std::size_t>(k)] > radii_[static_cast<std::size_t>(k - 1)]))
        throw std::invalid_argument("RadialTable: radii must be strictly increasing");
    if (static_cast<int>(values_.size()) != nr * nodes_)
      throw std::invalid_argument("RadialTable: values size mismatch");
    build_splines();
  }

  int radius_count() const { return static_cast<int>(radii_.size()); }
  int node_count() const { return nodes_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& values() const { return values_; }

  double sample(int node, int radius_index) const {
    return values_[static_cast<std::size_t>(radius_index * nodes_ + node)];
  }

  /// Spline evaluation of f(node, r).
  double eval(int node, double r) const {
    const int nr = radius_count();
    const double r_lo = radii_.front();
    const double r_hi = radii_.back();
    if (r <= r_lo) return sample(node, 0) + end_slope(node, 0) * (r - r_lo);
    if (r >= r_hi) return sample(node, nr - 1) + end_slope(node, nr - 1) * (r - r_hi);
    int lo = 0, hi = nr - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (radii_[static_cast<std::size_t>(mid)] <= r)
        lo = mid;
      else
        hi = mid;
    }
    const double hk = radii_[static_cast<std::size_t>(lo + 1)] - radii_[static_cast<std::size_t>(lo)];
    const double t = (r - radii_[static_cast<std::size_t>(lo)]) / hk;
    const double ya = sample(node, lo), yb = sample(node, lo + 1);
    const double ma = m_at(node, lo), mb = m_at(node, lo + 1);
    // cubic from function values and second derivatives at the knots
    const double a = ya, b = yb;
    return (1.0 - t) * a + t * b +
           hk * hk / 6.0 * ((std::pow(1.0 - t, 3) - (1.0 - t)) * ma + (std::pow(t, 3) - t) * mb);
  }

 private:
  double m_at(int node, int k) const { return m_[static_cast<std::size_t>(k * nodes_ + node)]; }

  double end_slope(int node, int k) const {
    const int nr = radius_count();
    if (k == 0) {
      const double h0 = radii_[1] - radii_[0];
      return (sample(node, 1) - sample(node, 0)) / h0 - h0 / 6.0 * (2.0 * m_at(node, 0) + m_at(node, 1));
    }
    const double hl = radii_[static_cast<std::size_t>(nr - 1)] - radii_[static_cast<std::size_t>(nr - 2)];
    return (sample(node, nr - 1) - sample(node, nr - 2)) / hl +
           hl / 6.0 * (m_at(node, nr - 2) + 2.0 * m_at(node, nr - 1));
  }

  /// Not-a-knot cubic splines, one tridiagonal-with-corners solve per node.
  void build_splines() {
    const int nr = radius_count();
    m_.assign(static_cast<std::size_t>(nr) * static_cast<std::size_t>(nodes_), 0.0);
    std::vector<double> h(static_cast<std::size_t>(nr - 1));
    for (int k = 0; k + 1 < nr; ++k)
      h[static_cast<std::size_t>(k)] = radii_[static_cast<std::size_t>(k + 1)] - radii_[static_cast<std::size_t>(k)];

    // dense solve per node; lattice sizes are small (tens of radii)
    std::vector<double> a(static_cast<std::size_t>(nr) * static_cast<std::size_t>(nr));
    std::vector<double> rhs(static_cast<std::size_t>(nr)), sol(static_cast<std::size_t>(nr));
    for (int node = 0; node < nodes_; ++node) {
      std::fill(a.begin(), a.end(), 0.0);
      auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * nr + j)]; };
      // not-a-knot: third derivative continuous at the first and last interior knot
      at(0, 0) = h[1];
      at(0, 1) = -(h[0] + h[1]);
      at(0, 2) = h[0];
      rhs[0] = 0.0;
      for (int k = 1; k + 1 < nr; ++k) {
        at(k, k - 1) = h[static_cast<std::size_t>(k - 1)] / 6.0;
        at(k, k) = (h[static_cast<std::size_t>(k - 1)] + h[static_cast<std::size_t>(k)]) / 3.0;
        at(k, k + 1) = h[static_cast<std::size_t>(k)] / 6.0;
        rhs[static_cast<std::size_t>(k)] =
            (sample(node, k + 1) - sample(node, k)) / h[static_cast<std::size_t>(k)] -
            (sample(node, k) - sample(node, k - 1)) / h[static_cast<std::size_t>(k - 1)];
      }
      at(nr - 1, nr - 3) = h[static_cast<std::size_t>(nr - 2)];
      at(nr - 1, nr - 2) = -(h[static_cast<std::size_t>(nr - 3)] + h[static_cast<std::size_t>(nr - 2)]);
      at(nr - 1, nr - 1) = h[static_cast<std::size_t>(nr - 3)];
      rhs[static_cast<std::size_t>(nr - 1)] = 0.0;

      DenseLU lu(a, nr);
      lu.solve(rhs, sol);
      for (int k = 0; k < nr; ++k) m_[static_cast<std::size_t>(k * nodes_ + node)] = sol[static_cast<std::size_t>(k)];
    }
  }

  std::vector<double> radii_;
  std::vector<double> values_;  // radius-major: values[k * nodes + node]
  std::vector<double> m_;       // spline second derivatives, radius-major
  int nodes_ = 0;
};

/// The prescription det(h~) = f(x, r) together with barrier radii and the
/// homotopy weight. `f_raw` is the determinant prescription; the homotopy is
/// solved in n-th-root form, so the right-hand side entering the residual is
/// f_rhs = f_raw^{1/n}.
struct ProblemSpec {
  enum class Kind { radial_exp, constant_f, phi_compat, table };

  int dim = 2;
  Kind kind = Kind::radial_exp;
  double r1 = 0.2;
  double r2 = 3.0;
  PhiWeight phi{};
  double c_ref = 1.0;

  // radial_exp: f = (coth r - 1) exp(k_f (r0_f - r))
  double radial_r0 = 1.0;
  double radial_k = 1.0;
  // constant_f: f = const_value
  double const_value = 1.0;
  // table: collocated with table_grid
  GridSpec table_grid{};
  RadialTable table{};

  double f_raw(int node, double r) const {
    switch (kind) {
      case Kind::radial_exp:
        return (coth(r) - 1.0) * std::exp(radial_k * (radial_r0 - r));
      case Kind::constant_f:
        return const_value;
      case Kind::phi_compat: {
        const double base = phi.value(r) * (coth(r) - 1.0);
        return dim == 1 ? base : base * base;
      }
      case Kind::table:
        return table.eval(node, r);
    }
    return 0.0;
  }

  /// n-th root of the raw prescription; this is the f of the homotopy family.
  double f_rhs(int node, double r) const {
    const double raw = f_raw(node, r);
    if (dim == 1) return raw;
    const double s = std::sqrt(std::abs(raw));
    return raw < 0.0 ? -s : s;
  }

  /// Homotopy right-hand side t f + (1 - t) phi(r)(coth r - 1).
  double rhs(int node, double r, double t) const {
    return t * f_rhs(node, r) + (1.0 - t) * phi.value(r) * (coth(r) - 1.0);
  }

  void validate(const GridSpec* grid = nullptr) const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("problem.dim: must be 1 or 2");
    if (!(r1 >= 0.05)) throw std::invalid_argument("problem.r1: must be >= 0.05");
    if (!(r1 < r2)) throw std::invalid_argument("problem.r1/r2: require r1 < r2");
    if (!(phi.r0 > r1 && phi.r0 < r2))
      throw std::invalid_argument("problem.phi.r0: must lie strictly between r1 and r2");
    if (!(phi.k > 0.0)) throw std::invalid_argument("problem.phi.k: must be positive");
    if (kind == Kind::table) {
      if (table.node_count() == 0) throw std::invalid_argument("problem.table: empty");
      if (grid && !(table_grid == *grid))
        throw std::invalid_argument("problem.table: not collocated with the requested grid");
    }
    // positivity of f over the working radius range
    const double lo = 0.8 * r1, hi = 1.2 * r2;
    const int nodes = kind == Kind::table ? table.node_count() : 1;
    for (int s = 0; s <= 24; ++s) {
      const double r = lo + (hi - lo) * s / 24.0;
      for (int node = 0; node < nodes; ++node)
        if (!(f_raw(node, r) > 0.0))
          throw std::invalid_argument("problem.f: must be positive on the barrier annulus");
    }
  }
};

}  // namespace horo
