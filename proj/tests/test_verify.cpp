#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "horo/continuation.hpp"
#include "horo/families.hpp"
#include "horo/verify.hpp"
#include "oracles.hpp"

using namespace horo;

namespace {
GridFunction sphere_u(const GridSpec& s, double rho) { return GridFunction(s, u_from_r(rho)); }
}  // namespace

TEST_CASE("horo-convexity check on spheres and dimples") {
  const GridSpec grid = GridSpec::s2(16, 32);
  SECTION("unit sphere passes with the expected margin") {
    const CheckResult c = check_horoconvex(sphere_u(grid, 1.0));
    CHECK(c.passed);
    // independent scalar route: coth(1) - 1 = (e^2 + 1)/(e^2 - 1) - 1
    const double e2 = std::exp(2.0);
    CHECK_THAT(-c.measured, Catch::Matchers::WithinAbs((e2 + 1.0) / (e2 - 1.0) - 1.0, 1e-12));
  }
  SECTION("large sphere sits at the cone boundary") {
    const CheckResult c = check_horoconvex(sphere_u(grid, 10.0));
    // series oracle: coth(10) - 1 = 2 e^{-20} (1 + e^{-20} + ...)
    const double series = 2.0 * std::exp(-20.0) / (1.0 - std::exp(-20.0));
    CHECK_THAT(-c.measured, Catch::Matchers::WithinAbs(series, 1e-12));
    CHECK(c.passed);                             // still strictly positive
    CHECK(-c.measured < SolverConfig{}.cone_floor);  // but below the solver floor
  }
  SECTION("a deep dimple fails and locates a polar node") {
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.8, 0};
    const CheckResult c = check_horoconvex(sample_u(fam, grid));
    CHECK_FALSE(c.passed);
    CHECK(c.worst_node >= 0);
    // eigenvalue oracle at the reported node via the embedding
    const ChartPoint p = grid.point(c.worst_node);
    const auto ch = fam.eval(p);
    const oracles::EmbeddedSurface emb =
        oracles::embed_s2(p.theta, p.phi, ch.r, ch.r_t, ch.r_p, ch.r_tt, ch.r_tp, ch.r_pp);
    CHECK(emb.kappa[0] - 1.0 < 0.0);  // the analytic eigenvalue confirms the violation
    CHECK_THAT(-c.measured, Catch::Matchers::WithinRel(emb.kappa[0] - 1.0, 0.05));
  }
}

TEST_CASE("barrier confinement check") {
  ProblemSpec p;
  p.dim = 2;
  p.kind = ProblemSpec::Kind::radial_exp;
  p.r1 = 0.5;
  p.r2 = 2.0;
  p.phi = PhiWeight{1.0, 1.0};
  const GridSpec grid = GridSpec::s2(12, 24);
  CHECK(check_c0_barriers(sphere_u(grid, 1.0), p).passed);
  const CheckResult boundary = check_c0_barriers(sphere_u(grid, 2.0), p);
  CHECK_FALSE(boundary.passed);  // r == r2 is outside the open annulus
  CHECK(check_c0_barriers(sphere_u(grid, 2.5), p).measured > 0.0);
}

TEST_CASE("gradient mechanism at the slope maximum") {
  SECTION("spheres pass while coth(r)/sinh(r) exceeds one") {
    const GridSpec grid = GridSpec::s2(16, 32);
    const CheckResult c = check_gradient_mechanism(sphere_u(grid, 1.0));
    CHECK(c.passed);
    // scalar oracle for the bound
    CHECK_THAT(c.measured, Catch::Matchers::WithinAbs(
                               1.0 - (1.0 / std::tanh(1.0)) / std::sinh(1.0), 1e-12));
  }
  SECTION("a mildly anisotropic solved surface passes with margin") {
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.05, 0};
    const GridSpec grid = GridSpec::s2(16, 32);
    ManufactureOptions opt;
    opt.beta = 2.0;
    const ManufacturedProblem mp = manufacture(fam, grid, opt);
    const ContinuationTrace tr = continue_to_one(mp.problem, grid);
    REQUIRE(tr.success);
    const CheckResult c = check_gradient_mechanism(tr.steps.back().u);
    CHECK(c.passed);
    CHECK(c.measured < 0.0);  // strict inequality, not saved by the slack
  }
  SECTION("a deliberately steep non-solution graph fails") {
    // the bound coth(r)/sinh(r) only bites at large radii, so the steep
    // feature must live there to demonstrate a violation
    const GridSpec grid = GridSpec::s1(128);
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 2.2, 0.9, 0};
    const CheckResult c = check_gradient_mechanism(sample_u(fam, grid));
    CHECK_FALSE(c.passed);
    CHECK(c.measured > c.threshold);
  }
}

TEST_CASE("codazzi symmetry") {
  SECTION("spheres are exact") {
    const CheckResult c = check_codazzi(sphere_u(GridSpec::s2(16, 32), 1.0));
    CHECK(c.passed);
    CHECK(c.measured <= 1e-12);
  }
  SECTION("axisymmetric surfaces converge at stencil order") {
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.1, 0};
    const CheckResult c = check_codazzi(sample_u(fam, GridSpec::s2(16, 32)));
    CHECK(c.passed);
    REQUIRE(c.slope.has_value());
    CHECK(*c.slope >= 3.5);
  }
  SECTION("band-limited circle graphs are vacuously symmetric") {
    const RadialFamily fam{RadialFamily::Kind::cos_k, 1.0, 0.2, 2};
    const CheckResult c = check_codazzi(sample_u(fam, GridSpec::s1(32)));
    CHECK(c.passed);
    CHECK(c.measured == 0.0);
  }
}

TEST_CASE("killing-field Hessian identities") {
  SECTION("spheres cancel exactly") {
    const auto checks = check_killing_identities(sphere_u(GridSpec::s2(16, 32), 1.0));
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].passed);
    CHECK(checks[0].measured <= 1e-12);
  }
  SECTION("axisymmetric S^2 family converges at stencil order") {
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.1, 0};
    const auto checks = check_killing_identities(sample_u(fam, GridSpec::s2(16, 32)));
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].passed);
    REQUIRE(checks[0].slope.has_value());
    CHECK(*checks[0].slope >= 3.5);
  }
  SECTION("circle graphs also satisfy the support-function identity") {
    const RadialFamily fam{RadialFamily::Kind::cos_k, 1.0, 0.2, 2};
    const auto checks = check_killing_identities(sample_u(fam, GridSpec::s1(64)));
    REQUIRE(checks.size() == 2);
    for (const auto& c : checks) {
      CHECK(c.passed);
      REQUIRE(c.slope.has_value());
      CHECK(*c.slope >= 3.5);
    }
  }
}

TEST_CASE("curvature bound monitor along traces") {
  SECTION("round path keeps H = n coth(r0)") {
    ProblemSpec p;
    p.dim = 2;
    p.kind = ProblemSpec::Kind::phi_compat;
    p.r1 = 0.5;
    p.r2 = 2.0;
    p.phi = PhiWeight{1.0, 1.0};
    const ContinuationTrace tr = continue_to_one(p, GridSpec::s2(12, 24));
    REQUIRE(tr.success);
    const std::vector<double> h_max = trace_mean_curvature_maxima(tr);
    for (double h : h_max) CHECK_THAT(h, Catch::Matchers::WithinAbs(2.0 * coth(1.0), 1e-10));
    CHECK(check_curvature_bound_monitor(tr).passed);
  }
  SECTION("radial family follows the reduced scalar path") {
    const double rho_star = oracles::bisect(
        [](double rho) { return (1.0 / std::tanh(rho) - 1.0) - std::exp(1.0 - rho); }, 0.05, 5.0);
    ProblemSpec p;
    p.dim = 2;
    p.kind = ProblemSpec::Kind::radial_exp;
    p.radial_r0 = 1.0;
    p.radial_k = 1.0;
    p.r1 = 0.2;
    p.r2 = 3.0;
    p.phi = PhiWeight{rho_star, 1.0};
    const ContinuationTrace tr = continue_to_one(p, GridSpec::s2(12, 24));
    REQUIRE(tr.success);
    // scalar oracle: at each recorded t the constant radius solves the
    // reduced equation; here the branch is stationary at rho*
    const std::vector<double> h_max = trace_mean_curvature_maxima(tr);
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      const double rho_t = oracles::bisect(
          [&](double rho) {
            const double fw = std::sqrt((1.0 / std::tanh(rho) - 1.0) * std::exp(1.0 - rho));
            return (1.0 / std::tanh(rho) - 1.0) - tr.steps[k].t * fw -
                   (1.0 - tr.steps[k].t) * std::exp(rho_star - rho) * (1.0 / std::tanh(rho) - 1.0);
          },
          0.05, 0.9);
      CHECK_THAT(h_max[k], Catch::Matchers::WithinAbs(2.0 / std::tanh(rho_t), 1e-7));
    }
  }
  SECTION("manufactured run stays below the ceilings") {
    const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.05, 0};
    const GridSpec grid = GridSpec::s2(12, 24);
    ManufactureOptions opt;
    opt.beta = 2.0;
    const ManufacturedProblem mp = manufacture(fam, grid, opt);
    const ContinuationTrace tr = continue_to_one(mp.problem, grid);
    REQUIRE(tr.success);
    const CheckResult c = check_curvature_bound_monitor(tr);
    CHECK(c.passed);
    CHECK(c.measured < 10.0);  // far below the 1e3 ceiling
  }
}

TEST_CASE("checks do not mutate their input") {
  const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.1, 0};
  const GridFunction u = sample_u(fam, GridSpec::s2(16, 32));
  const std::vector<double> snapshot = u.values;
  ProblemSpec p;
  p.dim = 2;
  p.kind = ProblemSpec::Kind::radial_exp;
  p.r1 = 0.5;
  p.r2 = 2.0;
  p.phi = PhiWeight{1.0, 1.0};
  (void)check_horoconvex(u);
  (void)check_c0_barriers(u, p);
  (void)check_gradient_mechanism(u);
  (void)check_codazzi(u);
  (void)check_killing_identities(u);
  CHECK(u.values == snapshot);
}
