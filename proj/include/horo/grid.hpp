#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/linalg.hpp"

namespace horo {

/// Behaviour of a component field under the cross-pole identification
/// (theta, phi) -> (-theta, phi + pi): scalars and phi-type components are
/// even, each theta index flips the sign once.
enum class Parity : int { even = +1, odd = -1 };

/// Discretization of S^1 (periodic phi line) or S^2 (staggered
/// latitude-longitude grid with no nodes at the poles).
struct GridSpec {
  int dim = 2;
  int n_theta = 0;  // 1 for S^1
  int n_phi = 0;
  int order = 4;    // centered finite-difference order, 2 or 4

  static GridSpec s1(int n, int order = 4) {
    GridSpec s{1, 1, n, order};
    s.validate();
    return s;
  }
  static GridSpec s2(int nt, int np, int order = 4) {
    GridSpec s{2, nt, np, order};
    s.validate();
    return s;
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
    if (order != 2 && order != 4) throw std::invalid_argument("GridSpec: order must be 2 or 4");
    if (dim == 1) {
      if (n_phi < 8 || n_phi % 2 != 0)
        throw std::invalid_argument("GridSpec: S^1 resolution must be even and >= 8");
    } else {
      if (n_theta < 9) throw std::invalid_argument("GridSpec: n_theta must be >= 9");
      if (n_phi < 16 || n_phi % 2 != 0)
        throw std::invalid_argument("GridSpec: n_phi must be even and >= 16");
    }
  }

  int node_count() const { return dim == 1 ? n_phi : n_theta * n_phi; }
  double theta(int j) const { return kPi * (j + 0.5) / n_theta; }
  double phi(int i) const { return 2.0 * kPi * i / n_phi; }
  double h_theta() const { return kPi / n_theta; }
  double h_phi() const { return 2.0 * kPi / n_phi; }
  /// row-major layout, theta outer, phi inner
  int index(int j, int i) const { return j * n_phi + i; }
  int row(int node) const { return node / n_phi; }
  int col(int node) const { return node % n_phi; }
  ChartPoint point(int node) const {
    if (dim == 1) return ChartPoint{1, 0.0, phi(node)};
    return ChartPoint{2, theta(row(node)), phi(col(node))};
  }
  double max_spacing() const { return dim == 1 ? h_phi() : std::max(h_theta(), h_phi()); }

  bool operator==(const GridSpec&) const = default;
};

/// One real sample per node, row-major (theta outer, phi inner).
struct GridFunction {
  GridSpec spec;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& s, double fill = 0.0)
      : spec(s), values(static_cast<std::size_t>(s.node_count()), fill) {}

  double& operator[](int node) { return values[static_cast<std::size_t>(node)]; }
  double operator[](int node) const { return values[static_cast<std::size_t>(node)]; }
  int size() const { return static_cast<int>(values.size()); }
};

namespace detail {

/// Value of `f` at extended theta-row index `j` (may lie past a pole) and
/// longitude column `i`; crossing a pole lands on (reflected row, phi + pi)
/// and multiplies by the field parity.
inline double pole_value(const GridFunction& f, int j, int i, Parity parity) {
  const GridSpec& s = f.spec;
  const int np = s.n_phi;
  int ii = i % np;
  if (ii < 0) ii += np;
  if (j >= 0 && j < s.n_theta) return f[s.index(j, ii)];
  const int jj = (j < 0) ? -1 - j : 2 * s.n_theta - 1 - j;
  const int io = (ii + np / 2) % np;
  return static_cast<double>(parity) * f[s.index(jj, io)];
}

struct Stencil {
  int half = 0;
  std::array<double, 5> d1{};
  std::array<double, 5> d2{};
};

inline Stencil stencil_for(int order) {
  Stencil s;
  if (order == 2) {
    s.half = 1;
    s.d1 = {0.0, -0.5, 0.0, 0.5, 0.0};
    s.d2 = {0.0, 1.0, -2.0, 1.0, 0.0};
  } else {
    s.half = 2;
    s.d1 = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
    s.d2 = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
  }
  return s;
}

}  // namespace detail

/// d/dtheta of a component field (S^2 only).
inline GridFunction d_theta(const GridFunction& f, Parity parity) {
  const GridSpec& s = f.spec;
  if (s.dim != 2) throw std::logic_error("d_theta: S^2 grids only");
  const auto st = detail::stencil_for(s.order);
  const double inv_h = 1.0 / s.h_theta();
  GridFunction out(s);
  for (int j = 0; j < s.n_theta; ++j)
    for (int i = 0; i < s.n_phi; ++i) {
      double acc = 0.0;
      for (int k = -st.half; k <= st.half; ++k) {
        const double w = st.d1[static_cast<std::size_t>(k + 2)];
        if (w != 0.0) acc += w * detail::pole_value(f, j + k, i, parity);
      }
      out[s.index(j, i)] = acc * inv_h;
    }
  return out;
}

/// d^2/dtheta^2 of a component field (S^2 only).
inline GridFunction d_theta2(const GridFunction& f, Parity parity) {
  const GridSpec& s = f.spec;
  if (s.dim != 2) throw std::logic_error("d_theta2: S^2 grids only");
  const auto st = detail::stencil_for(s.order);
  const double inv_h2 = 1.0 / (s.h_theta() * s.h_theta());
  GridFunction out(s);
  for (int j = 0; j < s.n_theta; ++j)
    for (int i = 0; i < s.n_phi; ++i) {
      double acc = 0.0;
      for (int k = -st.half; k <= st.half; ++k) {
        const double w = st.d2[static_cast<std::size_t>(k + 2)];
        if (w != 0.0) acc += w * detail::pole_value(f, j + k, i, parity);
      }
      out[s.index(j, i)] = acc * inv_h2;
    }
  return out;
}

/// d/dphi with periodic closure (either dimension).
inline GridFunction d_phi(const GridFunction& f) {
  const GridSpec& s = f.spec;
  const auto st = detail::stencil_for(s.order);
  const double inv_h = 1.0 / s.h_phi();
  const int np = s.n_phi;
  GridFunction out(s);
  for (int j = 0; j < s.n_theta; ++j)
    for (int i = 0; i < np; ++i) {
      double acc = 0.0;
      for (int k = -st.half; k <= st.half; ++k) {
        const double w = st.d1[static_cast<std::size_t>(k + 2)];
        if (w != 0.0) acc += w * f[s.index(j, (i + k + np) % np)];
      }
      out[s.index(j, i)] = acc * inv_h;
    }
  return out;
}

/// d^2/dphi^2 with periodic closure (either dimension).
inline GridFunction d_phi2(const GridFunction& f) {
  const GridSpec& s = f.spec;
  const auto st = detail::stencil_for(s.order);
  const double inv_h2 = 1.0 / (s.h_phi() * s.h_phi());
  const int np = s.n_phi;
  GridFunction out(s);
  for (int j = 0; j < s.n_theta; ++j)
    for (int i = 0; i < np; ++i) {
      double acc = 0.0;
      for (int k = -st.half; k <= st.half; ++k) {
        const double w = st.d2[static_cast<std::size_t>(k + 2)];
        acc += w * f[s.index(j, (i + k + np) % np)];
      }
      out[s.index(j, i)] = acc * inv_h2;
    }
  return out;
}

/// Per-node jets of the substituted variable: covariant first and second
/// derivatives with respect to the round metric, plus the radius recovered
/// through the inverse substitution.
struct JetField {
  GridSpec spec;
  double c_ref = 1.0;
  std::vector<double> r, u, du_t, du_p, d2_tt, d2_tp, d2_pp;

  PointJet at(int node) const {
    PointJet j;
    j.dim = spec.dim;
    j.r = r[static_cast<std::size_t>(node)];
    j.u = u[static_cast<std::size_t>(node)];
    j.du = Vec::zero(spec.dim);
    j.d2u = Mat::zero(spec.dim);
    if (spec.dim == 1) {
      j.du[0] = du_p[static_cast<std::size_t>(node)];
      j.d2u(0, 0) = d2_pp[static_cast<std::size_t>(node)];
    } else {
      j.du[0] = du_t[static_cast<std::size_t>(node)];
      j.du[1] = du_p[static_cast<std::size_t>(node)];
      j.d2u(0, 0) = d2_tt[static_cast<std::size_t>(node)];
      j.d2u(0, 1) = j.d2u(1, 0) = d2_tp[static_cast<std::size_t>(node)];
      j.d2u(1, 1) = d2_pp[static_cast<std::size_t>(node)];
    }
    return j;
  }
};

/// Discrete realization of the covariant jet. On S^2 the round-metric
/// Christoffels enter as D_tD_p u = u_tp - cot(theta) u_p and
/// D_pD_p u = u_pp + sin(theta)cos(theta) u_t.
inline JetField covariant_jet(const GridFunction& u, double c_ref = 1.0) {
  const GridSpec& s = u.spec;
  const std::size_t n = static_cast<std::size_t>(s.node_count());
  JetField jf;
  jf.spec = s;
  jf.c_ref = c_ref;
  jf.u = u.values;
  jf.r.resize(n);
  // guarded inverse substitution: values past the image carry r = infinity,
  // so differentiation of arbitrary scalars stays total
  const double q0 = std::tanh(0.5 * c_ref);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = q0 * std::exp(u.values[i]);
    jf.r[i] = q < 1.0 ? 2.0 * std::atanh(q) : std::numeric_limits<double>::infinity();
  }

  if (s.dim == 1) {
    jf.du_p = d_phi(u).values;
    jf.d2_pp = d_phi2(u).values;
    jf.du_t.assign(n, 0.0);
    jf.d2_tt.assign(n, 0.0);
    jf.d2_tp.assign(n, 0.0);
    return jf;
  }

  const GridFunction ut = d_theta(u, Parity::even);
  const GridFunction up = d_phi(u);
  const GridFunction utt = d_theta2(u, Parity::even);
  const GridFunction upp = d_phi2(u);
  const GridFunction utp = d_theta(up, Parity::even);  // u_p stays even across poles

  jf.du_t = ut.values;
  jf.du_p = up.values;
  jf.d2_tt = utt.values;
  jf.d2_tp.resize(n);
  jf.d2_pp.resize(n);
  for (int j = 0; j < s.n_theta; ++j) {
    const double th = s.theta(j);
    const double ct = std::cos(th) / std::sin(th);
    const double sc = std::sin(th) * std::cos(th);
    for (int i = 0; i < s.n_phi; ++i) {
      const std::size_t node = static_cast<std::size_t>(s.index(j, i));
      jf.d2_tp[node] = utp.values[node] - ct * up.values[node];
      jf.d2_pp[node] = upp.values[node] + sc * ut.values[node];
    }
  }
  return jf;
}

namespace detail {

/// Trigonometric interpolation of one periodic row to twice the resolution.
/// Direct DFT; exact for modes below the Nyquist frequency.
inline std::vector<double> fourier_double(std::span<const double> row) {
  const int n = static_cast<int>(row.size());
  const int half = n / 2;
  std::vector<double> a(static_cast<std::size_t>(half) + 1, 0.0), b(static_cast<std::size_t>(half) + 1, 0.0);
  for (int m = 0; m <= half; ++m) {
    double ca = 0.0, cb = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ang = 2.0 * kPi * m * i / n;
      ca += row[static_cast<std::size_t>(i)] * std::cos(ang);
      cb += row[static_cast<std::size_t>(i)] * std::sin(ang);
    }
    a[static_cast<std::size_t>(m)] = ca;
    b[static_cast<std::size_t>(m)] = cb;
  }
  std::vector<double> out(static_cast<std::size_t>(2 * n));
  for (int k = 0; k < 2 * n; ++k) {
    const double phi = kPi * k / n;  // target angle 2*pi*k/(2n)
    double v = a[0] / n;
    for (int m = 1; m < half; ++m)
      v += 2.0 / n * (a[static_cast<std::size_t>(m)] * std::cos(m * phi) + b[static_cast<std::size_t>(m)] * std::sin(m * phi));
    v += a[static_cast<std::size_t>(half)] / n * std::cos(half * phi);
    out[static_cast<std::size_t>(k)] = v;
  }
  return out;
}

/// Periodic sinc (Dirichlet) kernel for an even number of uniform samples;
/// translation invariant, so it interpolates offset grids exactly below the
/// Nyquist frequency.
inline double dirichlet_kernel(double y, int m) {
  const double half = 0.5 * y;
  const double s = std::sin(half);
  if (std::abs(s) < 1e-14) return std::cos(half * m) >= 0 ? 1.0 : -1.0;  // y = 0 mod 2pi
  return std::sin(0.5 * m * y) / (m * std::tan(half));
}

}  // namespace detail

/// Doubles the resolution in every direction. Longitude transfers by Fourier
/// interpolation; latitude by trigonometric interpolation along the smooth
/// cross-pole-extended meridians. Band-limited data transfers exactly.
inline GridFunction refine(const GridFunction& f) {
  const GridSpec& s = f.spec;
  if (s.dim == 1) {
    GridSpec fine = GridSpec::s1(2 * s.n_phi, s.order);
    GridFunction out(fine);
    out.values = detail::fourier_double(f.values);
    return out;
  }
  // phi pass: each theta row to 2 n_phi
  GridSpec mid{2, s.n_theta, 2 * s.n_phi, s.order};
  GridFunction midf(mid);
  for (int j = 0; j < s.n_theta; ++j) {
    std::span<const double> row(f.values.data() + static_cast<std::ptrdiff_t>(j) * s.n_phi,
                                static_cast<std::size_t>(s.n_phi));
    const std::vector<double> fine_row = detail::fourier_double(row);
    std::copy(fine_row.begin(), fine_row.end(),
              midf.values.begin() + static_cast<std::ptrdiff_t>(j) * mid.n_phi);
  }
  // theta pass: the even continuation of each meridian pair
  // (phi, phi + pi) is a smooth periodic sequence of 2 n_theta samples at
  // colatitudes (j + 1/2) h; interpolate it at the fine colatitudes
  const int nt = s.n_theta;
  const int m = 2 * nt;
  GridSpec fine{2, 2 * nt, 2 * s.n_phi, s.order};
  GridFunction out(fine);
  std::vector<double> meridian(static_cast<std::size_t>(m));
  std::vector<double> kernel(static_cast<std::size_t>(2 * nt) * static_cast<std::size_t>(m));
  const double h = kPi / nt;
  for (int k = 0; k < 2 * nt; ++k) {
    const double target = (k + 0.5) * 0.5 * h;
    for (int j = 0; j < m; ++j)
      kernel[static_cast<std::size_t>(k * m + j)] =
          detail::dirichlet_kernel(target - (j + 0.5) * h, m);
  }
  for (int i = 0; i < mid.n_phi; ++i) {
    const int io = (i + mid.n_phi / 2) % mid.n_phi;
    for (int j = 0; j < nt; ++j) {
      meridian[static_cast<std::size_t>(j)] = midf[mid.index(j, i)];
      meridian[static_cast<std::size_t>(nt + j)] = midf[mid.index(nt - 1 - j, io)];
    }
    for (int k = 0; k < 2 * nt; ++k) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        acc += kernel[static_cast<std::size_t>(k * m + j)] * meridian[static_cast<std::size_t>(j)];
      out[fine.index(k, i)] = acc;
    }
  }
  return out;
}

/// Halves the resolution: longitude by exact subsampling (coarse nodes are a
/// subset), latitude by 6-point midpoint interpolation.
inline GridFunction coarsen(const GridFunction& f) {
  const GridSpec& s = f.spec;
  if (s.dim == 1) {
    GridSpec coarse = GridSpec::s1(s.n_phi / 2, s.order);
    GridFunction out(coarse);
    for (int i = 0; i < coarse.n_phi; ++i) out[i] = f[2 * i];
    return out;
  }
  if (s.n_theta % 2 != 0) throw std::invalid_argument("coarsen: n_theta must be even");
  GridSpec mid{2, s.n_theta, s.n_phi / 2, s.order};
  GridFunction midf(mid);
  for (int j = 0; j < s.n_theta; ++j)
    for (int i = 0; i < mid.n_phi; ++i) midf[mid.index(j, i)] = f[s.index(j, 2 * i)];
  GridSpec coarse{2, s.n_theta / 2, s.n_phi / 2, s.order};
  coarse.validate();
  GridFunction out(coarse);
  // coarse node j sits midway between fine rows 2j and 2j+1
  static constexpr std::array<double, 6> w{3.0 / 256, -25.0 / 256, 150.0 / 256,
                                           150.0 / 256, -25.0 / 256, 3.0 / 256};
  for (int j = 0; j < coarse.n_theta; ++j)
    for (int i = 0; i < coarse.n_phi; ++i) {
      double acc = 0.0;
      for (int k = 0; k < 6; ++k)
        acc += w[static_cast<std::size_t>(k)] * detail::pole_value(midf, 2 * j - 2 + k, i, Parity::even);
      out[coarse.index(j, i)] = acc;
    }
  return out;
}

/// Max |u| and the first node attaining it (row-major tie-break).
inline std::pair<double, int> sup_norm_and_argmax(const GridFunction& u) {
  double best = -1.0;
  int arg = 0;
  for (int i = 0; i < u.size(); ++i) {
    const double v = std::abs(u[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

/// Values of a scalar field continued to the two poles: even cross-pole
/// extension along meridians, 6-point interpolation at theta = 0 and pi,
/// averaged over longitudes.
inline std::pair<double, double> pole_values(const GridFunction& f) {
  const GridSpec& s = f.spec;
  if (s.dim != 2) throw std::logic_error("pole_values: S^2 grids only");
  // Lagrange weights at x = 0 for nodes (+-1/2, +-3/2, +-5/2) of an even pair
  // sum: value = sum_k w_k (f(theta_k, phi) + f(theta_k, phi + pi)) / 2 * 2
  const double w[3] = {75.0 / 64.0, -25.0 / 128.0, 3.0 / 128.0};
  double north = 0.0, south = 0.0;
  for (int i = 0; i < s.n_phi; ++i) {
    const int io = (i + s.n_phi / 2) % s.n_phi;
    for (int k = 0; k < 3; ++k) {
      north += w[k] * 0.5 * (f[s.index(k, i)] + f[s.index(k, io)]);
      south += w[k] * 0.5 * (f[s.index(s.n_theta - 1 - k, i)] + f[s.index(s.n_theta - 1 - k, io)]);
    }
  }
  return {north / s.n_phi, south / s.n_phi};
}

/// Quadrature against the round measure. The staggered midpoint rule in
/// latitude carries an Euler-Maclaurin endpoint correction built from the
/// interpolated pole values, making the rule fourth-order on smooth data.
inline double integrate(const GridFunction& f) {
  const GridSpec& s = f.spec;
  if (s.dim == 1) {
    double acc = 0.0;
    for (int i = 0; i < s.n_phi; ++i) acc += f[i];
    return acc * s.h_phi();
  }
  double acc = 0.0;
  for (int j = 0; j < s.n_theta; ++j) {
    const double w = std::sin(s.theta(j));
    double row = 0.0;
    for (int i = 0; i < s.n_phi; ++i) row += f[s.index(j, i)];
    acc += w * row;
  }
  const double midpoint = acc * s.h_theta() * s.h_phi();
  const auto [north, south] = pole_values(f);
  const double h = s.h_theta();
  return midpoint - kPi * h * h / 12.0 * (north + south);
}

inline GridFunction constant_grid(const GridSpec& s, double value) {
  return GridFunction(s, value);
}

}  // namespace horo
