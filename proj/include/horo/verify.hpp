#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "horo/continuation.hpp"
#include "horo/geometry.hpp"
#include "horo/grid.hpp"

namespace horo {

/// One verification record. `passed` always agrees with measured <= threshold
/// (up to the documented strictness of the individual check).
struct CheckResult {
  std::string name;
  std::string description;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  int worst_node = -1;
  std::optional<double> slope;  // refinement slope when the check runs one
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

/// Pointwise surface fields assembled on the grid (component fields of the
/// induced metric, the second fundamental form, support function, radius).
struct SurfaceFields {
  GridFunction r, supp, primitive;
  GridFunction g_tt, g_tp, g_pp;  // dim 1 uses g_pp only
  GridFunction h_tt, h_tp, h_pp;
};

inline SurfaceFields surface_fields(const GridFunction& u, double c_ref) {
  const GridSpec& s = u.spec;
  SurfaceFields f;
  for (GridFunction* g : {&f.r, &f.supp, &f.primitive, &f.g_tt, &f.g_tp, &f.g_pp, &f.h_tt,
                          &f.h_tp, &f.h_pp})
    *g = GridFunction(s);
  const JetField jets = covariant_jet(u, c_ref);
  for (int node = 0; node < s.node_count(); ++node) {
    const ChartPoint p = s.point(node);
    const PointJet jet = jets.at(node);
    const GeometryFields gf = geometry_fields(jet, round_metric(p));
    f.r[node] = jet.r;
    f.supp[node] = gf.supp;
    f.primitive[node] = gf.Lambda;
    if (s.dim == 1) {
      f.g_pp[node] = gf.g(0, 0);
      f.h_pp[node] = gf.h(0, 0);
    } else {
      f.g_tt[node] = gf.g(0, 0);
      f.g_tp[node] = gf.g(0, 1);
      f.g_pp[node] = gf.g(1, 1);
      f.h_tt[node] = gf.h(0, 0);
      f.h_tp[node] = gf.h(0, 1);
      f.h_pp[node] = gf.h(1, 1);
    }
  }
  return f;
}

/// Discrete Christoffels of the induced metric on S^2, from the same stencils
/// that build the jets; index order: gamma[k][ij] with k, i, j in {t, p} and
/// ij one of tt, tp, pp.
struct Christoffels2 {
  GridFunction t_tt, t_tp, t_pp;
  GridFunction p_tt, p_tp, p_pp;
};

inline Christoffels2 christoffels2(const SurfaceFields& f) {
  const GridSpec& s = f.g_tt.spec;
  const GridFunction dt_tt = d_theta(f.g_tt, Parity::even);
  const GridFunction dt_tp = d_theta(f.g_tp, Parity::odd);
  const GridFunction dt_pp = d_theta(f.g_pp, Parity::even);
  const GridFunction dp_tt = d_phi(f.g_tt);
  const GridFunction dp_tp = d_phi(f.g_tp);
  const GridFunction dp_pp = d_phi(f.g_pp);

  Christoffels2 g;
  for (GridFunction* x : {&g.t_tt, &g.t_tp, &g.t_pp, &g.p_tt, &g.p_tp, &g.p_pp})
    *x = GridFunction(s);

  for (int node = 0; node < s.node_count(); ++node) {
    const double det = f.g_tt[node] * f.g_pp[node] - f.g_tp[node] * f.g_tp[node];
    const double gi_tt = f.g_pp[node] / det;
    const double gi_tp = -f.g_tp[node] / det;
    const double gi_pp = f.g_tt[node] / det;
    // lowered symbols [ij, l] = (d_i g_lj + d_j g_li - d_l g_ij)/2
    const double l_tt_t = 0.5 * dt_tt[node];
    const double l_tt_p = dt_tp[node] - 0.5 * dp_tt[node];
    const double l_tp_t = 0.5 * dp_tt[node];
    const double l_tp_p = 0.5 * dt_pp[node];
    const double l_pp_t = dp_tp[node] - 0.5 * dt_pp[node];
    const double l_pp_p = 0.5 * dp_pp[node];
    g.t_tt[node] = gi_tt * l_tt_t + gi_tp * l_tt_p;
    g.p_tt[node] = gi_tp * l_tt_t + gi_pp * l_tt_p;
    g.t_tp[node] = gi_tt * l_tp_t + gi_tp * l_tp_p;
    g.p_tp[node] = gi_tp * l_tp_t + gi_pp * l_tp_p;
    g.t_pp[node] = gi_tt * l_pp_t + gi_tp * l_pp_p;
    g.p_pp[node] = gi_tp * l_pp_t + gi_pp * l_pp_p;
  }
  return g;
}

/// Full covariant derivative of the second fundamental form on S^2:
/// nabla_k h_ij = d_k h_ij - Gamma^l_{ki} h_lj - Gamma^l_{kj} h_il.
struct NablaH2 {
  // first index is k, remaining pair is ij
  GridFunction t_tt, t_tp, t_pp, p_tt, p_tp, p_pp;
};

inline NablaH2 nabla_h2(const SurfaceFields& f, const Christoffels2& g) {
  const GridSpec& s = f.h_tt.spec;
  NablaH2 n;
  for (GridFunction* x : {&n.t_tt, &n.t_tp, &n.t_pp, &n.p_tt, &n.p_tp, &n.p_pp})
    *x = GridFunction(s);

  const GridFunction dt_tt = d_theta(f.h_tt, Parity::even);
  const GridFunction dt_tp = d_theta(f.h_tp, Parity::odd);
  const GridFunction dt_pp = d_theta(f.h_pp, Parity::even);
  const GridFunction dp_tt = d_phi(f.h_tt);
  const GridFunction dp_tp = d_phi(f.h_tp);
  const GridFunction dp_pp = d_phi(f.h_pp);

  for (int node = 0; node < s.node_count(); ++node) {
    const double h_tt = f.h_tt[node], h_tp = f.h_tp[node], h_pp = f.h_pp[node];
    // k = t
    n.t_tt[node] = dt_tt[node] - 2.0 * (g.t_tt[node] * h_tt + g.p_tt[node] * h_tp);
    n.t_tp[node] = dt_tp[node] - (g.t_tt[node] * h_tp + g.p_tt[node] * h_pp) -
                   (g.t_tp[node] * h_tt + g.p_tp[node] * h_tp);
    n.t_pp[node] = dt_pp[node] - 2.0 * (g.t_tp[node] * h_tp + g.p_tp[node] * h_pp);
    // k = p
    n.p_tt[node] = dp_tt[node] - 2.0 * (g.t_tp[node] * h_tt + g.p_tp[node] * h_tp);
    n.p_tp[node] = dp_tp[node] - (g.t_tp[node] * h_tp + g.p_tp[node] * h_pp) -
                   (g.t_pp[node] * h_tt + g.p_pp[node] * h_tp);
    n.p_pp[node] = dp_pp[node] - 2.0 * (g.t_pp[node] * h_tp + g.p_pp[node] * h_pp);
  }
  return n;
}

/// Max over nodes of the Codazzi antisymmetry |nabla_k h_ij - nabla_j h_ik|.
inline std::pair<double, int> measure_codazzi(const GridFunction& u, double c_ref) {
  const GridSpec& s = u.spec;
  if (s.dim == 1) return {0.0, 0};  // a single index pair: antisymmetry is vacuous
  const SurfaceFields f = surface_fields(u, c_ref);
  const Christoffels2 g = christoffels2(f);
  const NablaH2 n = nabla_h2(f, g);
  double worst = 0.0;
  int arg = 0;
  for (int node = 0; node < s.node_count(); ++node) {
    const double a = std::abs(n.p_tt[node] - n.t_tp[node]);  // i=t: nabla_p h_tt vs nabla_t h_tp
    const double b = std::abs(n.t_pp[node] - n.p_tp[node]);  // i=p: nabla_t h_pp vs nabla_p h_tp
    const double m = std::max(a, b);
    if (m > worst) {
      worst = m;
      arg = node;
    }
  }
  return {worst, arg};
}

/// Intrinsic Hessian of a scalar grid field on the discrete surface:
/// Hess_ij = (d_i w_j + d_j w_i)/2 - Gamma^k_{ij} w_k with w = d(scalar).
struct Hessian2 {
  GridFunction tt, tp, pp;
};

inline Hessian2 intrinsic_hessian2(const GridFunction& scalar, const Christoffels2& g) {
  const GridSpec& s = scalar.spec;
  const GridFunction w_t = d_theta(scalar, Parity::even);
  const GridFunction w_p = d_phi(scalar);
  const GridFunction dtt = d_theta(w_t, Parity::odd);
  const GridFunction dtp_a = d_theta(w_p, Parity::even);
  const GridFunction dtp_b = d_phi(w_t);
  const GridFunction dpp = d_phi(w_p);
  Hessian2 h;
  h.tt = GridFunction(s);
  h.tp = GridFunction(s);
  h.pp = GridFunction(s);
  for (int node = 0; node < s.node_count(); ++node) {
    h.tt[node] = dtt[node] - (g.t_tt[node] * w_t[node] + g.p_tt[node] * w_p[node]);
    h.tp[node] = 0.5 * (dtp_a[node] + dtp_b[node]) -
                 (g.t_tp[node] * w_t[node] + g.p_tp[node] * w_p[node]);
    h.pp[node] = dpp[node] - (g.t_pp[node] * w_t[node] + g.p_pp[node] * w_p[node]);
  }
  return h;
}

/// Max Frobenius discrepancy of Hess(Lambda) = cosh(r) g - h <V, nu>.
inline std::pair<double, int> measure_primitive_hessian(const GridFunction& u, double c_ref) {
  const GridSpec& s = u.spec;
  const SurfaceFields f = surface_fields(u, c_ref);
  double worst = 0.0;
  int arg = 0;
  if (s.dim == 1) {
    const GridFunction w = d_phi(f.primitive);
    const GridFunction dw = d_phi(w);
    const GridFunction dg = d_phi(f.g_pp);
    for (int node = 0; node < s.node_count(); ++node) {
      const double gamma = 0.5 * dg[node] / f.g_pp[node];
      const double lhs = dw[node] - gamma * w[node];
      const double rhs = std::cosh(f.r[node]) * f.g_pp[node] - f.h_pp[node] * f.supp[node];
      const double m = std::abs(lhs - rhs);
      if (m > worst) {
        worst = m;
        arg = node;
      }
    }
    return {worst, arg};
  }
  const Christoffels2 g = christoffels2(f);
  const Hessian2 hess = intrinsic_hessian2(f.primitive, g);
  for (int node = 0; node < s.node_count(); ++node) {
    const double ch = std::cosh(f.r[node]);
    const double e_tt = hess.tt[node] - (ch * f.g_tt[node] - f.h_tt[node] * f.supp[node]);
    const double e_tp = hess.tp[node] - (ch * f.g_tp[node] - f.h_tp[node] * f.supp[node]);
    const double e_pp = hess.pp[node] - (ch * f.g_pp[node] - f.h_pp[node] * f.supp[node]);
    const double m = std::sqrt(e_tt * e_tt + 2.0 * e_tp * e_tp + e_pp * e_pp);
    if (m > worst) {
      worst = m;
      arg = node;
    }
  }
  return {worst, arg};
}

/// Support-function Hessian identity on S^1:
/// Hess(<V,nu>) = cosh(r) h + sinh(r) g^{pq} (nabla_p h) (nabla_q r) - h W <V,nu>.
inline std::pair<double, int> measure_support_hessian(const GridFunction& u, double c_ref) {
  const GridSpec& s = u.spec;
  if (s.dim != 1)
    throw std::logic_error("measure_support_hessian: checked on S^1 only");
  const SurfaceFields f = surface_fields(u, c_ref);
  const GridFunction w = d_phi(f.supp);
  const GridFunction dw = d_phi(w);
  const GridFunction dg = d_phi(f.g_pp);
  const GridFunction dh = d_phi(f.h_pp);
  const GridFunction dr = d_phi(f.r);
  double worst = 0.0;
  int arg = 0;
  for (int node = 0; node < s.node_count(); ++node) {
    const double gamma = 0.5 * dg[node] / f.g_pp[node];
    const double lhs = dw[node] - gamma * w[node];
    const double nabla_h = dh[node] - 2.0 * gamma * f.h_pp[node];
    const double rhs = std::cosh(f.r[node]) * f.h_pp[node] +
                       std::sinh(f.r[node]) * (nabla_h / f.g_pp[node]) * dr[node] -
                       f.h_pp[node] * (f.h_pp[node] / f.g_pp[node]) * f.supp[node];
    const double m = std::abs(lhs - rhs);
    if (m > worst) {
      worst = m;
      arg = node;
    }
  }
  return {worst, arg};
}

/// Shared wrapper for the refinement-slope checks: exact branch when both
/// resolutions sit at round-off, otherwise require the configured slope.
inline CheckResult slope_check(const std::string& name, const std::string& description,
                               double coarse, double fine, int coarse_node, double min_slope,
                               double exact_floor = 1e-12) {
  CheckResult c;
  c.name = name;
  c.description = description;
  c.worst_node = coarse_node;
  c.measured = coarse;
  if (coarse <= exact_floor && fine <= exact_floor) {
    c.threshold = exact_floor;
    c.passed = true;
    c.note = "identically zero to round-off";
    return c;
  }
  c.slope = std::log2(coarse / fine);
  c.threshold = coarse / std::pow(2.0, min_slope);
  c.passed = fine <= c.threshold;
  c.measured = fine;
  c.note = "coarse " + std::to_string(coarse) + ", fine " + std::to_string(fine);
  return c;
}

}  // namespace detail

/// Horo-convexity: min over nodes of min(lambda) must be positive.
inline CheckResult check_horoconvex(const GridFunction& u, double c_ref = 1.0) {
  const GridSpec& s = u.spec;
  const JetField jets = covariant_jet(u, c_ref);
  double min_lambda = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int node = 0; node < s.node_count(); ++node) {
    const ChartPoint p = s.point(node);
    const ShapeFields sf = shape_operator(jets.at(node), round_metric(p));
    if (sf.lambda[0] < min_lambda) {
      min_lambda = sf.lambda[0];
      arg = node;
    }
  }
  CheckResult c;
  c.name = "horoconvex";
  c.description = "all shifted principal curvatures positive";
  c.measured = -min_lambda;
  c.threshold = 0.0;
  c.passed = min_lambda > 0.0;
  c.worst_node = arg;
  c.note = "min lambda = " + std::to_string(min_lambda);
  return c;
}

/// Barrier confinement r1 < r(x) < r2 over all nodes.
inline CheckResult check_c0_barriers(const GridFunction& u, const ProblemSpec& problem) {
  double min_r = std::numeric_limits<double>::infinity(), max_r = -min_r;
  int arg_lo = 0, arg_hi = 0;
  for (int node = 0; node < u.size(); ++node) {
    const double r = r_from_u(u[node], problem.c_ref);
    if (r < min_r) {
      min_r = r;
      arg_lo = node;
    }
    if (r > max_r) {
      max_r = r;
      arg_hi = node;
    }
  }
  CheckResult c;
  c.name = "c0_barriers";
  c.description = "radius confined to the open barrier annulus (r1, r2)";
  const double lo_violation = problem.r1 - min_r;
  const double hi_violation = max_r - problem.r2;
  c.measured = std::max(lo_violation, hi_violation);
  // strict confinement: radii within round-off of a barrier count as touching it
  c.threshold = -1e-13 * std::max(1.0, problem.r2);
  c.passed = c.measured <= c.threshold;
  c.worst_node = lo_violation > hi_violation ? arg_lo : arg_hi;
  c.note = "r in [" + std::to_string(min_r) + ", " + std::to_string(max_r) + "]";
  return c;
}

/// Gradient mechanism at the maximum of |Du|^2: horo-convexity forces
/// v <= coth(r)/sinh(r) there, up to an O(h^2) slack because the discrete
/// argmax need not be a true critical point. A failure within the slack is
/// inconclusive rather than a refutation.
inline CheckResult check_gradient_mechanism(const GridFunction& u, double c_ref = 1.0,
                                            double slack_coefficient = 10.0) {
  const GridSpec& s = u.spec;
  const JetField jets = covariant_jet(u, c_ref);
  double best = -1.0;
  int arg = 0;
  for (int node = 0; node < s.node_count(); ++node) {
    const PointJet jet = jets.at(node);
    const double g2 = quadratic_form(round_metric_inv(s.point(node)), jet.du);
    if (g2 > best) {
      best = g2;
      arg = node;
    }
  }
  const PointJet jet = jets.at(arg);
  const double v = slope_factor(jet.du, round_metric_inv(s.point(arg)));
  const double bound = coth(jet.r) / std::sinh(jet.r);
  const double h = s.max_spacing();
  CheckResult c;
  c.name = "gradient_mechanism";
  c.description = "slope factor bounded by coth(r)/sinh(r) at the gradient maximum";
  c.measured = v - bound;
  c.threshold = slack_coefficient * h * h;
  c.passed = c.measured <= c.threshold;
  c.worst_node = arg;
  c.note = "v = " + std::to_string(v) + ", coth(r)/sinh(r) = " + std::to_string(bound);
  return c;
}

/// Codazzi symmetry of the covariant derivative of the second fundamental
/// form, with one refinement to confirm the stencil-order decay.
inline CheckResult check_codazzi(const GridFunction& u, double c_ref = 1.0,
                                 double min_slope = 3.5) {
  const auto [coarse, node] = detail::measure_codazzi(u, c_ref);
  const auto [fine, fine_node] = detail::measure_codazzi(refine(u), c_ref);
  (void)fine_node;
  return detail::slope_check("codazzi_symmetry",
                             "covariant derivative of the second fundamental form is totally symmetric",
                             coarse, fine, node, min_slope);
}

/// Hessian identities driven by the conformal Killing field sinh(r) d_r:
/// the radial primitive satisfies Hess(Lambda) = cosh(r) g - h <V,nu>, and on
/// S^1 also the support-function Hessian identity. Slope-checked under one
/// refinement.
inline std::vector<CheckResult> check_killing_identities(const GridFunction& u, double c_ref = 1.0,
                                                         double min_slope = 3.5) {
  std::vector<CheckResult> out;
  const GridFunction fine_u = refine(u);
  {
    const auto [coarse, node] = detail::measure_primitive_hessian(u, c_ref);
    const auto [fine, fn] = detail::measure_primitive_hessian(fine_u, c_ref);
    (void)fn;
    out.push_back(detail::slope_check(
        "primitive_hessian",
        "Hess(cosh r - 1) = cosh(r) g - h <V,nu> on the discrete surface", coarse, fine, node,
        min_slope));
  }
  if (u.spec.dim == 1) {
    const auto [coarse, node] = detail::measure_support_hessian(u, c_ref);
    const auto [fine, fn] = detail::measure_support_hessian(fine_u, c_ref);
    (void)fn;
    out.push_back(detail::slope_check(
        "support_hessian",
        "Hessian identity for the support function <V,nu> on S^1", coarse, fine, node,
        min_slope));
  }
  return out;
}

struct CurvatureCeilings {
  double mean_curvature_max = 1e3;
  double log_test_max = 15.0;  // ceiling for log H - log <V,nu>
};

/// Per-step maxima of the mean curvature along a continuation trace.
inline std::vector<double> trace_mean_curvature_maxima(const ContinuationTrace& trace,
                                                       double c_ref = 1.0) {
  std::vector<double> out;
  out.reserve(trace.steps.size());
  for (const auto& step : trace.steps) {
    const GridSpec& s = step.u.spec;
    const JetField jets = covariant_jet(step.u, c_ref);
    double h_max = -std::numeric_limits<double>::infinity();
    for (int node = 0; node < s.node_count(); ++node) {
      const GeometryFields gf = geometry_fields(jets.at(node), round_metric(s.point(node)));
      h_max = std::max(h_max, gf.H);
    }
    out.push_back(h_max);
  }
  return out;
}

/// Boundedness monitor for the curvature estimate: tracks max H and the test
/// quantity log H - log <V,nu> along the trace; report-only ceilings.
inline CheckResult check_curvature_bound_monitor(const ContinuationTrace& trace,
                                                 const CurvatureCeilings& ceilings = {},
                                                 double c_ref = 1.0) {
  double h_worst = -std::numeric_limits<double>::infinity();
  double w_worst = h_worst;
  int worst_step = 0;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& step = trace.steps[k];
    const GridSpec& s = step.u.spec;
    const JetField jets = covariant_jet(step.u, c_ref);
    for (int node = 0; node < s.node_count(); ++node) {
      const GeometryFields gf = geometry_fields(jets.at(node), round_metric(s.point(node)));
      const double w = std::log(gf.H) - std::log(gf.supp);
      if (gf.H > h_worst) {
        h_worst = gf.H;
        worst_step = static_cast<int>(k);
      }
      w_worst = std::max(w_worst, w);
    }
  }
  CheckResult c;
  c.name = "curvature_bound_monitor";
  c.description = "mean curvature and log H - log <V,nu> stay below the ceilings along the path";
  c.measured = h_worst;
  c.threshold = ceilings.mean_curvature_max;
  c.passed = h_worst <= ceilings.mean_curvature_max && w_worst <= ceilings.log_test_max;
  c.worst_node = worst_step;
  c.note = "max H = " + std::to_string(h_worst) + ", max (log H - log supp) = " +
           std::to_string(w_worst);
  return c;
}

}  // namespace horo
