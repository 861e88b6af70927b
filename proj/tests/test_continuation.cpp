#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "horo/continuation.hpp"
#include "horo/families.hpp"
#include "horo/io.hpp"
#include "oracles.hpp"

using namespace horo;

namespace {
ProblemSpec radial_problem(int dim, double r0_phi, double r1, double r2) {
  ProblemSpec p;
  p.dim = dim;
  p.kind = ProblemSpec::Kind::radial_exp;
  p.radial_r0 = 1.0;
  p.radial_k = 1.0;
  p.r1 = r1;
  p.r2 = r2;
  p.phi = PhiWeight{r0_phi, 1.0};
  return p;
}

double sup_radius_error(const GridFunction& u, double target, double c_ref = 1.0) {
  double err = 0.0;
  for (int i = 0; i < u.size(); ++i)
    err = std::max(err, std::abs(r_from_u(u[i], c_ref) - target));
  return err;
}
}  // namespace

TEST_CASE("round start solves t = 0 exactly") {
  const ProblemSpec p = radial_problem(2, 1.0, 0.2, 3.0);
  const GridSpec grid = GridSpec::s2(16, 32);
  const GridFunction u = round_start(p, grid);
  for (int i = 0; i < u.size(); ++i)
    CHECK_THAT(u[i], Catch::Matchers::WithinAbs(u_from_r(1.0, 1.0), 1e-15));
  const ResidualField res = residual(u, 0.0, p);
  CHECK(res.norm_inf <= 1e-12);
  // umbilic start: lambda = coth(r0) - 1 > 0 everywhere
  const JetField jets = covariant_jet(u);
  for (int node = 0; node < grid.node_count(); ++node) {
    const ShapeFields sf = shape_operator(jets.at(node), round_metric(grid.point(node)));
    CHECK_THAT(sf.lambda[0], Catch::Matchers::WithinAbs(coth(1.0) - 1.0, 1e-12));
  }
}

TEST_CASE("t-independent family finishes in a single step") {
  ProblemSpec p;
  p.dim = 2;
  p.kind = ProblemSpec::Kind::phi_compat;
  p.r1 = 0.5;
  p.r2 = 2.0;
  p.phi = PhiWeight{1.0, 1.0};
  StepConfig sc;
  sc.dt_initial = 1.0;
  sc.dt_max = 1.0;
  const GridSpec grid = GridSpec::s2(12, 24);
  const ContinuationTrace tr = continue_to_one(p, grid, SolverConfig{}, sc);
  REQUIRE(tr.success);
  CHECK(tr.steps.size() == 2);  // the t = 0 record plus one jump to t = 1
  CHECK(sup_radius_error(tr.steps.back().u, 1.0) < 1e-10);
}

TEST_CASE("radial family on the circle converges to the collocation solution") {
  // with the weight rooted at the crossing radius the family is t-independent
  const ProblemSpec p = radial_problem(1, 1.0, 0.5, 2.0);
  const GridSpec grid = GridSpec::s1(64);
  const ContinuationTrace tr = continue_to_one(p, grid);
  REQUIRE(tr.success);

  // independent spectral collocation solve of (kappa - 1) = f(phi, r)
  const oracles::CollocationResult col = oracles::collocation_s1(
      32, [](double, double r) { return (1.0 / std::tanh(r) - 1.0) * std::exp(1.0 - r); }, 1.3);
  REQUIRE(col.converged);
  double col_radius = 0.0;
  for (double v : col.r) col_radius = std::max(col_radius, std::abs(v - 1.0));
  CHECK(col_radius < 1e-10);  // the collocation route lands on the same constant
  CHECK(sup_radius_error(tr.steps.back().u, col.r[0]) < 1e-8);
}

TEST_CASE("radial family on the sphere reaches the bisection root") {
  // raw-det prescription: constant solutions of det(h~) = f satisfy
  // (coth rho - 1)^{n-1} = e^{r0 - rho}
  const double rho_star = oracles::bisect(
      [](double rho) { return (1.0 / std::tanh(rho) - 1.0) - std::exp(1.0 - rho); }, 0.05, 5.0);
  CHECK_THAT(rho_star, Catch::Matchers::WithinAbs(0.3600496446091037, 1e-12));

  const ProblemSpec p = radial_problem(2, rho_star, 0.2, 3.0);
  const GridSpec grid = GridSpec::s2(16, 32);
  const ContinuationTrace tr = continue_to_one(p, grid);
  REQUIRE(tr.success);
  CHECK(sup_radius_error(tr.steps.back().u, rho_star) < 1e-8);
}

TEST_CASE("disconnected path fails cleanly with the last good pair") {
  // rooting the weight at the prescription crossing r0 = 1 sends the
  // constant branch off to a fold: the solver must stop with failed-at-t and
  // keep the last converged solution
  const ProblemSpec p = radial_problem(2, 1.0, 0.2, 3.0);
  const GridSpec grid = GridSpec::s2(12, 24);
  const ContinuationTrace tr = continue_to_one(p, grid);
  CHECK_FALSE(tr.success);
  CHECK(tr.failed_at_t > 0.0);
  CHECK(tr.failed_at_t < 1.0);
  REQUIRE(tr.steps.size() >= 2);
  CHECK(tr.message.find("does not decide") != std::string::npos);
  // the retained pair replays to its recorded residual
  const auto& last = tr.steps.back();
  const ResidualField res = residual(last.u, last.t, p);
  CHECK(std::abs(res.norm_inf - last.residual_norm) <= 1e-12);
}

TEST_CASE("trace invariants: monotone t, cone, replayable residual norms") {
  const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.05, 0};
  const GridSpec grid = GridSpec::s2(16, 32);
  ManufactureOptions opt;
  opt.beta = 2.0;
  const ManufacturedProblem mp = manufacture(fam, grid, opt);
  const ContinuationTrace tr = continue_to_one(mp.problem, grid);
  REQUIRE(tr.success);
  CHECK(tr.steps.front().t == 0.0);
  CHECK(tr.steps.back().t == 1.0);
  for (std::size_t k = 0; k + 1 < tr.steps.size(); ++k)
    CHECK(tr.steps[k].t < tr.steps[k + 1].t);
  for (const auto& s : tr.steps) {
    CHECK(s.min_lambda > SolverConfig{}.cone_floor);
    const ResidualField res = residual(s.u, s.t, mp.problem);
    CHECK(std::abs(res.norm_inf - s.residual_norm) <= 1e-12);
    CHECK(res.min_lambda == s.min_lambda);
  }
}

TEST_CASE("barrier crossing check") {
  const GridSpec grid2 = GridSpec::s2(12, 24);
  SECTION("radial family on S^1: crossing at the prescription root") {
    const ProblemSpec p = radial_problem(1, 1.0, 0.5, 2.0);
    const BarrierReport rep = barrier_crossing_check(p, GridSpec::s1(16));
    CHECK(rep.passed);
    REQUIRE(rep.samples.size() == 4);
    CHECK(rep.samples[0].lower_side);
    CHECK_FALSE(rep.samples[3].lower_side);
  }
  SECTION("large constant prescription fails above r2") {
    ProblemSpec p;
    p.dim = 2;
    p.kind = ProblemSpec::Kind::constant_f;
    p.const_value = 25.0;
    p.r1 = 0.5;
    p.r2 = 2.0;
    p.phi = PhiWeight{1.0, 1.0};
    const BarrierReport rep = barrier_crossing_check(p, grid2);
    CHECK_FALSE(rep.passed);
    CHECK(rep.samples[0].holds);      // f large: the lower inequality is easy
    CHECK_FALSE(rep.samples[2].holds);  // and the upper one fails at r2
  }
  SECTION("manufactured damping: the sampled inequalities need a steep beta") {
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.05, 0};
    // grid-sampling oracle for the wrapped inequalities at the four radii
    auto oracle_holds = [&](const ManufacturedProblem& mp) {
      const double radii[4] = {mp.problem.r1 * 0.95, mp.problem.r1, mp.problem.r2,
                               mp.problem.r2 * 1.05};
      bool ok = true;
      for (int s = 0; s < 4; ++s)
        for (int node = 0; node < grid2.node_count(); ++node) {
          const double f = mp.problem.f_rhs(node, radii[s]);
          const double edge = coth(radii[s]) - 1.0;
          ok = ok && (s < 2 ? f >= edge : f <= edge);
        }
      return ok;
    };
    ManufactureOptions lo;
    lo.beta = 2.0;
    lo.r1 = 0.5;
    lo.r2 = 2.0;
    const ManufacturedProblem weak = manufacture(fam, grid2, lo);
    CHECK_FALSE(oracle_holds(weak));
    CHECK_FALSE(barrier_crossing_check(weak.problem, grid2).passed);

    ManufactureOptions hi = lo;
    hi.beta = 6.0;
    const ManufacturedProblem steep = manufacture(fam, grid2, hi);
    CHECK(oracle_holds(steep));
    CHECK(barrier_crossing_check(steep.problem, grid2).passed);
  }
}

TEST_CASE("serial determinism: identical configs produce identical traces") {
  const double rho_star = oracles::bisect(
      [](double rho) { return (1.0 / std::tanh(rho) - 1.0) - std::exp(1.0 - rho); }, 0.05, 5.0);
  const ProblemSpec p = radial_problem(2, rho_star, 0.2, 3.0);
  const GridSpec grid = GridSpec::s2(12, 24);
  const ContinuationTrace a = continue_to_one(p, grid);
  const ContinuationTrace b = continue_to_one(p, grid);
  REQUIRE(a.success);
  REQUIRE(b.success);
  const std::string ja = trace_to_json(a).dump();
  const std::string jb = trace_to_json(b).dump();
  CHECK(ja == jb);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k)
    for (int i = 0; i < a.steps[k].u.size(); ++i)
      CHECK(a.steps[k].u[i] == b.steps[k].u[i]);
}
