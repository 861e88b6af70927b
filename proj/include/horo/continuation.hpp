#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "horo/newton.hpp"
#include "horo/problem.hpp"

namespace horo {

struct StepConfig {
  double dt_initial = 0.1;
  double dt_min = 1e-4;
  double dt_max = 0.25;
  double growth = 1.5;
  int growth_threshold = 5;  // grow after a success within this many Newton iterations
};

struct ContinuationStep {
  double t = 0.0;
  GridFunction u;               // solution snapshot
  double residual_norm = 0.0;
  double min_lambda = 0.0;
  double min_r = 0.0;
  double max_r = 0.0;
  int newton_iterations = 0;
  NewtonRecord newton;          // convergence record of the accepting solve
};

struct ContinuationTrace {
  std::vector<ContinuationStep> steps;
  bool success = false;
  double failed_at_t = 0.0;     // first t the solver could not reach (when !success)
  std::string message;
};

/// The unique t = 0 solution: the constant graph at the radius where the
/// homotopy weight equals one.
inline GridFunction round_start(const ProblemSpec& problem, const GridSpec& grid) {
  return GridFunction(grid, u_from_r(problem.phi.r0, problem.c_ref));
}

namespace detail {
inline ContinuationStep make_step(double t, const GridFunction& u, const ResidualField& res,
                                  const ProblemSpec& problem, NewtonRecord newton) {
  ContinuationStep s;
  s.t = t;
  s.u = u;
  s.residual_norm = res.norm_inf;
  s.min_lambda = res.min_lambda;
  s.newton_iterations = newton.iterations;
  s.newton = std::move(newton);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < u.size(); ++i) {
    const double r = r_from_u(u[i], problem.c_ref);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  s.min_r = lo;
  s.max_r = hi;
  return s;
}
}  // namespace detail

/// Follows the homotopy from the round t = 0 solution to t = 1 with the
/// adaptive step rule: halve on failure (floor dt_min, then abort keeping the
/// last good pair), grow by `growth` after fast successes (cap dt_max).
inline ContinuationTrace continue_to_one(const ProblemSpec& problem, const GridSpec& grid,
                                         const SolverConfig& solver_cfg = {},
                                         const StepConfig& step_cfg = {}) {
  problem.validate(&grid);
  ContinuationTrace trace;
  const LaplacePreconditioner precond(grid, 1.0);

  GridFunction u = round_start(problem, grid);
  ResidualField res0 = residual(u, 0.0, problem, solver_cfg.cone_floor, true);
  NewtonRecord start_record;
  start_record.converged = true;
  start_record.residual_history.push_back(res0.norm_inf);
  start_record.min_lambda_history.push_back(res0.min_lambda);
  trace.steps.push_back(detail::make_step(0.0, u, res0, problem, std::move(start_record)));

  double t = 0.0;
  double dt = step_cfg.dt_initial;
  while (t < 1.0) {
    const double t_next = std::min(t + dt, 1.0);
    NewtonResult attempt = newton_solve(u, t_next, problem, solver_cfg, &precond);
    if (attempt.record.converged) {
      u = attempt.u;
      t = t_next;
      const ResidualField res = residual(u, t, problem, solver_cfg.cone_floor, true);
      const int its = attempt.record.iterations;
      trace.steps.push_back(detail::make_step(t, u, res, problem, std::move(attempt.record)));
      if (its <= step_cfg.growth_threshold)
        dt = std::min(dt * step_cfg.growth, step_cfg.dt_max);
    } else {
      dt *= 0.5;
      if (dt < step_cfg.dt_min) {
        trace.success = false;
        trace.failed_at_t = t_next;
        trace.message = "continuation stalled at t = " + std::to_string(t_next) + " (" +
                        attempt.record.failure +
                        "); last converged solution retained. A path failure does not decide "
                        "solvability at t = 1: the continuation path need not be connected.";
        return trace;
      }
    }
  }
  trace.success = true;
  trace.message = "reached t = 1";
  return trace;
}

struct BarrierSample {
  double radius = 0.0;
  bool lower_side = false;   // true: requires f >= coth r - 1, false: f <= coth r - 1
  bool holds = false;
  double worst_margin = 0.0; // min over nodes of the signed slack
  int worst_node = 0;
};

struct BarrierReport {
  std::vector<BarrierSample> samples;
  bool passed = false;
};

/// Samples the barrier inequalities of the solved n-th-root equation at
/// radii {r1(1-d), r1, r2, r2(1+d)}: the homotopy right-hand side f must
/// dominate coth r - 1 below r1 and be dominated by it above r2. Report
/// only; the solver runs regardless.
inline BarrierReport barrier_crossing_check(const ProblemSpec& problem, const GridSpec& grid,
                                            double delta = 0.05) {
  BarrierReport rep;
  const int nodes = grid.node_count();
  const double radii[4] = {problem.r1 * (1.0 - delta), problem.r1, problem.r2,
                           problem.r2 * (1.0 + delta)};
  for (int s = 0; s < 4; ++s) {
    BarrierSample sample;
    sample.radius = radii[s];
    sample.lower_side = s < 2;
    sample.worst_margin = std::numeric_limits<double>::infinity();
    for (int node = 0; node < nodes; ++node) {
      const double f = problem.f_rhs(node, sample.radius);
      const double edge = coth(sample.radius) - 1.0;
      const double margin = sample.lower_side ? f - edge : edge - f;
      if (margin < sample.worst_margin) {
        sample.worst_margin = margin;
        sample.worst_node = node;
      }
    }
    sample.holds = sample.worst_margin >= 0.0;
    rep.samples.push_back(sample);
  }
  rep.passed = true;
  for (const auto& s : rep.samples) rep.passed = rep.passed && s.holds;
  return rep;
}

}  // namespace horo
