#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/grid.hpp"
#include "horo/problem.hpp"

namespace horo {

/// Analytic radial graphs with closed-form chart derivatives, used as
/// manufactured targets and as smooth inputs for the identity checks.
///   constant_radius : r = rho
///   cos_theta       : r = rho + eps cos(theta) on S^2, rho + eps cos(phi) on S^1
///   harmonic2       : r = rho + eps s_m(theta, phi), degree-2 harmonics
///                     s_0 = (3cos^2(theta)-1)/2, s_1 = sin cos(theta) cos(phi),
///                     s_2 = sin^2(theta) cos(2 phi)   (S^2 only)
///   cos_k           : r = rho + eps cos(k phi)        (S^1 only)
struct RadialFamily {
  enum class Kind { constant_radius, cos_theta, harmonic2, cos_k };

  Kind kind = Kind::constant_radius;
  double rho = 1.0;
  double eps = 0.0;
  int index = 0;  // m for harmonic2, k for cos_k

  struct Chart {
    double r = 0.0, r_t = 0.0, r_p = 0.0, r_tt = 0.0, r_tp = 0.0, r_pp = 0.0;
  };

  Chart eval(const ChartPoint& p) const {
    Chart c;
    c.r = rho;
    switch (kind) {
      case Kind::constant_radius:
        break;
      case Kind::cos_theta: {
        const double ang = p.dim == 2 ? p.theta : p.phi;
        const double d1 = -eps * std::sin(ang), d2 = -eps * std::cos(ang);
        c.r += eps * std::cos(ang);
        if (p.dim == 2) {
          c.r_t = d1;
          c.r_tt = d2;
        } else {
          c.r_p = d1;
          c.r_pp = d2;
        }
        break;
      }
      case Kind::harmonic2: {
        if (p.dim != 2) throw std::invalid_argument("RadialFamily: harmonic2 is S^2 only");
        const double th = p.theta, ph = p.phi;
        const double st = std::sin(th), ct = std::cos(th);
        switch (index) {
          case 0:
            c.r += eps * 0.5 * (3.0 * ct * ct - 1.0);
            c.r_t = -3.0 * eps * ct * st;
            c.r_tt = -3.0 * eps * std::cos(2.0 * th);
            break;
          case 1: {
            const double s2t = std::sin(2.0 * th), c2t = std::cos(2.0 * th);
            c.r += eps * 0.5 * s2t * std::cos(ph);
            c.r_t = eps * c2t * std::cos(ph);
            c.r_p = -eps * 0.5 * s2t * std::sin(ph);
            c.r_tt = -2.0 * eps * s2t * std::cos(ph);
            c.r_tp = -eps * c2t * std::sin(ph);
            c.r_pp = -eps * 0.5 * s2t * std::cos(ph);
            break;
          }
          case 2: {
            const double s2t = std::sin(2.0 * th);
            c.r += eps * st * st * std::cos(2.0 * ph);
            c.r_t = eps * s2t * std::cos(2.0 * ph);
            c.r_p = -2.0 * eps * st * st * std::sin(2.0 * ph);
            c.r_tt = 2.0 * eps * std::cos(2.0 * th) * std::cos(2.0 * ph);
            c.r_tp = -2.0 * eps * s2t * std::sin(2.0 * ph);
            c.r_pp = -4.0 * eps * st * st * std::cos(2.0 * ph);
            break;
          }
          default:
            throw std::invalid_argument("RadialFamily: harmonic2 index must be 0, 1 or 2");
        }
        break;
      }
      case Kind::cos_k: {
        if (p.dim != 1) throw std::invalid_argument("RadialFamily: cos_k is S^1 only");
        const double k = static_cast<double>(index);
        c.r += eps * std::cos(k * p.phi);
        c.r_p = -eps * k * std::sin(k * p.phi);
        c.r_pp = -eps * k * k * std::cos(k * p.phi);
        break;
      }
    }
    return c;
  }
};

/// Exact covariant jet of the substitution variable built from analytic chart
/// derivatives of r: u_i = r_i / sinh r, then the usual chain rule and the
/// round-metric Christoffel corrections.
inline PointJet analytic_jet(const RadialFamily& family, const ChartPoint& p, double c_ref = 1.0) {
  const RadialFamily::Chart c = family.eval(p);
  const double sh = std::sinh(c.r), ch = std::cosh(c.r);
  const double up = 1.0 / sh;          // du/dr
  const double upp = -ch / (sh * sh);  // d2u/dr2

  PointJet jet;
  jet.dim = p.dim;
  jet.r = c.r;
  jet.u = u_from_r(c.r, c_ref);
  jet.du = Vec::zero(p.dim);
  jet.d2u = Mat::zero(p.dim);

  if (p.dim == 1) {
    jet.du[0] = up * c.r_p;
    jet.d2u(0, 0) = upp * c.r_p * c.r_p + up * c.r_pp;
    return jet;
  }
  const double u_t = up * c.r_t;
  const double u_p = up * c.r_p;
  const double u_tt = upp * c.r_t * c.r_t + up * c.r_tt;
  const double u_tp = upp * c.r_t * c.r_p + up * c.r_tp;
  const double u_pp = upp * c.r_p * c.r_p + up * c.r_pp;
  const double ct = std::cos(p.theta) / std::sin(p.theta);
  const double sc = std::sin(p.theta) * std::cos(p.theta);
  jet.du[0] = u_t;
  jet.du[1] = u_p;
  jet.d2u(0, 0) = u_tt;
  jet.d2u(0, 1) = jet.d2u(1, 0) = u_tp - ct * u_p;
  jet.d2u(1, 1) = u_pp + sc * u_t;
  return jet;
}

inline GridFunction sample_r(const RadialFamily& family, const GridSpec& spec) {
  GridFunction out(spec);
  for (int node = 0; node < spec.node_count(); ++node) out[node] = family.eval(spec.point(node)).r;
  return out;
}

inline GridFunction sample_u(const RadialFamily& family, const GridSpec& spec, double c_ref = 1.0) {
  GridFunction out(spec);
  for (int node = 0; node < spec.node_count(); ++node)
    out[node] = u_from_r(family.eval(spec.point(node)).r, c_ref);
  return out;
}

struct ManufactureOptions {
  double beta = 2.0;
  int radii = 48;       // radius lattice size (>= 16)
  double r1 = 0.0;      // 0 -> derived from the target range
  double r2 = 0.0;
  double phi_r0 = 0.0;  // 0 -> base radius of the family
  double phi_k = 1.0;
  double c_ref = 1.0;
};

struct ManufacturedProblem {
  ProblemSpec problem;
  GridFunction r_star;       // target radius sampled on the collocation grid
  RadialFamily family{};
  double beta = 2.0;
  double min_lambda_probe = 0.0;  // horo-convexity margin on the 2x probe grid
};

/// Builds the tabulated problem f(x, r) = F*(x) e^{beta (r*(x) - r)} whose
/// exact solution is the analytic target: F* is the shifted Gauss curvature
/// of the target, evaluated from closed-form jets. Horo-convexity of the
/// target is probed on a grid of twice the requested resolution.
inline ManufacturedProblem manufacture(const RadialFamily& family, const GridSpec& grid,
                                       const ManufactureOptions& opt = {}) {
  if (opt.radii < 16) throw std::invalid_argument("manufacture: need at least 16 radii");

  const GridSpec probe = grid.dim == 1 ? GridSpec::s1(2 * grid.n_phi, grid.order)
                                       : GridSpec::s2(2 * grid.n_theta, 2 * grid.n_phi, grid.order);
  double min_lambda = std::numeric_limits<double>::infinity();
  for (int node = 0; node < probe.node_count(); ++node) {
    const ChartPoint p = probe.point(node);
    const ShapeFields sf = shape_operator(analytic_jet(family, p, opt.c_ref), round_metric(p));
    min_lambda = std::min(min_lambda, sf.lambda[0]);
  }
  if (!(min_lambda > 0.0))
    throw std::runtime_error("manufacture: target is not horo-convex, min lambda = " +
                             std::to_string(min_lambda));

  ManufacturedProblem out;
  out.family = family;
  out.beta = opt.beta;
  out.min_lambda_probe = min_lambda;
  out.r_star = sample_r(family, grid);

  double rs_min = out.r_star[0], rs_max = out.r_star[0];
  for (int node = 0; node < grid.node_count(); ++node) {
    rs_min = std::min(rs_min, out.r_star[node]);
    rs_max = std::max(rs_max, out.r_star[node]);
  }

  ProblemSpec& p = out.problem;
  p.dim = grid.dim;
  p.kind = ProblemSpec::Kind::table;
  p.r1 = opt.r1 > 0.0 ? opt.r1 : std::max(0.05, 0.6 * rs_min);
  p.r2 = opt.r2 > 0.0 ? opt.r2 : 1.8 * rs_max;
  p.phi = PhiWeight{opt.phi_r0 > 0.0 ? opt.phi_r0 : family.rho, opt.phi_k};
  p.c_ref = opt.c_ref;
  p.table_grid = grid;

  std::vector<double> radii(static_cast<std::size_t>(opt.radii));
  const double lo = 0.8 * p.r1, hi = 1.2 * p.r2;
  for (int k = 0; k < opt.radii; ++k)
    radii[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (opt.radii - 1);

  std::vector<double> values(static_cast<std::size_t>(opt.radii) * static_cast<std::size_t>(grid.node_count()));
  for (int node = 0; node < grid.node_count(); ++node) {
    const ChartPoint cp = grid.point(node);
    const ShapeFields sf = shape_operator(analytic_jet(family, cp, opt.c_ref), round_metric(cp));
    const double f_star = shifted_gauss(sf.lambda);
    for (int k = 0; k < opt.radii; ++k)
      values[static_cast<std::size_t>(k * grid.node_count() + node)] =
          f_star * std::exp(opt.beta * (out.r_star[node] - radii[static_cast<std::size_t>(k)]));
  }
  p.table = RadialTable(std::move(radii), std::move(values), grid.node_count());
  p.validate(&grid);
  return out;
}

}  // namespace horo
