#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "horo/linalg.hpp"

namespace horo {

/// Chart point on the sphere factor. For dim == 2 the coordinates are
/// colatitude theta in (0, pi) and longitude phi in [0, 2pi); for dim == 1
/// only phi is meaningful.
struct ChartPoint {
  int dim = 2;
  double theta = 0.0;
  double phi = 0.0;
};

/// Second-order data of the radial graph at one chart point. `du` and `d2u`
/// are covariant derivatives of the substituted variable u with respect to
/// the round metric (Christoffel corrections already applied).
struct PointJet {
  int dim = 2;
  double r = 0.0;
  double u = 0.0;
  Vec du{};
  Mat d2u{};
};

/// Everything pointwise the radial-graph formulas produce from one jet.
struct GeometryFields {
  double v = 1.0;        // graph slope factor, v^2 = 1 + |Du|^2_sigma
  Mat g{};               // induced metric
  Mat g_inv{};
  Mat g_tilde_inv{};     // sigma^{ij} - D^i u D^j u / v^2
  Mat h{};               // second fundamental form (outward normal)
  Mat W{};               // mixed shape operator h^i_j
  Mat S{};               // shifted Weingarten matrix W - I
  Vec kappa{};           // principal curvatures, ascending
  Vec lambda{};          // shifted principal curvatures kappa - 1, ascending
  double H = 0.0;        // mean curvature, trace of W
  double supp = 0.0;     // support function <V, nu> = sinh(r)/v
  double Lambda = 0.0;   // radial primitive cosh(r) - 1
};

inline double coth(double r) { return 1.0 / std::tanh(r); }

/// Round metric of the chart at a point: [1] on S^1, diag(1, sin^2 theta) on S^2.
inline Mat round_metric(const ChartPoint& p) {
  if (p.dim == 1) return Mat::diag(1, 1.0);
  const double st = std::sin(p.theta);
  return Mat::diag(2, 1.0, st * st);
}

inline Mat round_metric_inv(const ChartPoint& p) {
  if (p.dim == 1) return Mat::diag(1, 1.0);
  const double st = std::sin(p.theta);
  return Mat::diag(2, 1.0, 1.0 / (st * st));
}

/// Monotone substitution u(r) = \int_c^r ds / sinh s = ln tanh(r/2) - ln tanh(c/2).
inline double u_from_r(double r, double c = 1.0) {
  if (!(r > 0.0) || !(c > 0.0))
    throw std::domain_error("u_from_r: radius and reference must be positive");
  return std::log(std::tanh(0.5 * r)) - std::log(std::tanh(0.5 * c));
}

/// Inverse substitution r(u) = 2 artanh(tanh(c/2) e^u); finite only while
/// tanh(c/2) e^u < 1.
inline double r_from_u(double u, double c = 1.0) {
  if (!(c > 0.0)) throw std::domain_error("r_from_u: reference must be positive");
  const double q = std::tanh(0.5 * c) * std::exp(u);
  if (!(q < 1.0))
    throw std::domain_error("r_from_u: argument outside image, radius would be infinite");
  return 2.0 * std::atanh(q);
}

/// du/dr = 1 / sinh r; chart derivatives convert by D_i r = sinh(r) D_i u.
inline double du_dr(double r) { return 1.0 / std::sinh(r); }

inline double slope_factor(const Vec& du, const Mat& sigma_inv) {
  return std::sqrt(1.0 + quadratic_form(sigma_inv, du));
}

struct MetricFields {
  Mat g{};
  Mat g_inv{};
  Mat g_tilde_inv{};
};

/// g_ij = sinh^2 r (D_i u D_j u + sigma_ij); g~^{ij} = sigma^{ij} - D^i u D^j u / v^2;
/// g^{ij} = g~^{ij} / sinh^2 r.
inline MetricFields metric_fields(const PointJet& jet, const Mat& sigma) {
  if (!(jet.r > 0.0)) throw std::domain_error("metric_fields: radius must be positive");
  const Mat sigma_inv = inverse(sigma);
  const double sh = std::sinh(jet.r);
  const double v2 = 1.0 + quadratic_form(sigma_inv, jet.du);
  const Vec du_up = mul(sigma_inv, jet.du);

  MetricFields out;
  out.g = Mat::zero(jet.dim);
  out.g_tilde_inv = Mat::zero(jet.dim);
  for (int i = 0; i < jet.dim; ++i)
    for (int j = 0; j < jet.dim; ++j) {
      out.g(i, j) = sh * sh * (jet.du[i] * jet.du[j] + sigma(i, j));
      out.g_tilde_inv(i, j) = sigma_inv(i, j) - du_up[i] * du_up[j] / v2;
    }
  out.g_inv = out.g_tilde_inv;
  for (int i = 0; i < jet.dim; ++i)
    for (int j = 0; j < jet.dim; ++j) out.g_inv(i, j) /= sh * sh;
  return out;
}

struct ShapeFields {
  Mat h{};
  Mat W{};
  Mat S{};
  Vec kappa{};
  Vec lambda{};
};

/// h_ij = (sinh r / v)(cosh r (D_i u D_j u + sigma_ij) - D_i D_j u);
/// h^i_j = (1/(v sinh r))(cosh r delta^i_j - g~^{ik} D_k D_j u).
/// Eigenvalues come from the Cholesky congruence of g, which preserves the
/// spectrum of g^{-1} h and keeps them real and sorted.
inline ShapeFields shape_operator(const PointJet& jet, const Mat& sigma) {
  if (!(jet.r > 0.0)) throw std::domain_error("shape_operator: radius must be positive");
  const MetricFields mf = metric_fields(jet, sigma);
  const Mat sigma_inv = inverse(sigma);
  const double sh = std::sinh(jet.r);
  const double ch = std::cosh(jet.r);
  const double v = slope_factor(jet.du, sigma_inv);

  ShapeFields out;
  out.h = Mat::zero(jet.dim);
  for (int i = 0; i < jet.dim; ++i)
    for (int j = 0; j < jet.dim; ++j)
      out.h(i, j) = (sh / v) * (ch * (jet.du[i] * jet.du[j] + sigma(i, j)) - jet.d2u(i, j));

  const Mat m = mul(mf.g_tilde_inv, jet.d2u);
  out.W = Mat::zero(jet.dim);
  for (int i = 0; i < jet.dim; ++i)
    for (int j = 0; j < jet.dim; ++j)
      out.W(i, j) = ((i == j ? ch : 0.0) - m(i, j)) / (v * sh);

  out.S = out.W;
  for (int i = 0; i < jet.dim; ++i) out.S(i, i) -= 1.0;

  out.kappa = sym_eigenvalues(cholesky_congruence(mf.g, out.h));
  out.lambda = out.kappa;
  for (int i = 0; i < jet.dim; ++i) out.lambda[i] -= 1.0;
  return out;
}

/// Product of the shifted principal curvatures; sign preserved outside the cone.
inline double shifted_gauss(std::span<const double> lambda) {
  double p = 1.0;
  for (double x : lambda) p *= x;
  return p;
}

inline double shifted_gauss(const Vec& lambda) {
  return shifted_gauss(std::span<const double>(lambda.a.data(), static_cast<std::size_t>(lambda.n)));
}

/// Elementary symmetric polynomial sigma_k, k = 0..n, by direct recursion.
inline double elementary_symmetric(std::span<const double> x, int k) {
  const int n = static_cast<int>(x.size());
  if (k < 0 || k > n) throw std::invalid_argument("elementary_symmetric: order out of range");
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::min(i + 1, k); j >= 1; --j)
      e[static_cast<std::size_t>(j)] += x[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(j) - 1];
  return e[static_cast<std::size_t>(k)];
}

namespace detail {
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}
}  // namespace detail

/// k-th shifted mean curvature sigma_k(kappa - 1) through the binomial
/// conversion sum_{i=0}^{k} (-1)^{k-i} C(n-i, k-i) sigma_i(kappa).
inline double shifted_sigma_k(std::span<const double> kappa, int k) {
  const int n = static_cast<int>(kappa.size());
  if (k < 1 || k > n) throw std::invalid_argument("shifted_sigma_k: order must satisfy 1 <= k <= n");
  double s = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double sign = ((k - i) % 2 == 0) ? 1.0 : -1.0;
    s += sign * detail::binomial(n - i, k - i) * elementary_symmetric(kappa, i);
  }
  return s;
}

inline double shifted_sigma_k(const Vec& kappa, int k) {
  return shifted_sigma_k(std::span<const double>(kappa.a.data(), static_cast<std::size_t>(kappa.n)), k);
}

/// Support function <V, nu> = sinh(r)/v for V = sinh(r) d_r, and the radial
/// primitive Lambda(r) = cosh(r) - 1.
inline std::pair<double, double> support_and_primitive(const PointJet& jet, const Mat& sigma_inv) {
  const double v = slope_factor(jet.du, sigma_inv);
  return {std::sinh(jet.r) / v, std::cosh(jet.r) - 1.0};
}

/// Full field assembly at one point.
inline GeometryFields geometry_fields(const PointJet& jet, const Mat& sigma) {
  const Mat sigma_inv = inverse(sigma);
  GeometryFields out;
  out.v = slope_factor(jet.du, sigma_inv);
  const MetricFields mf = metric_fields(jet, sigma);
  out.g = mf.g;
  out.g_inv = mf.g_inv;
  out.g_tilde_inv = mf.g_tilde_inv;
  const ShapeFields sf = shape_operator(jet, sigma);
  out.h = sf.h;
  out.W = sf.W;
  out.S = sf.S;
  out.kappa = sf.kappa;
  out.lambda = sf.lambda;
  out.H = trace(sf.W);
  const auto [supp, primitive] = support_and_primitive(jet, sigma_inv);
  out.supp = supp;
  out.Lambda = primitive;
  return out;
}

/// Horo-convexity at a point: all shifted principal curvatures positive.
inline bool horo_convex(const Vec& lambda) {
  for (int i = 0; i < lambda.n; ++i)
    if (!(lambda[i] > 0.0)) return false;
  return true;
}

}  // namespace horo
