#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "horo/continuation.hpp"
#include "horo/families.hpp"
#include "horo/newton.hpp"
#include "oracles.hpp"

using namespace horo;

namespace {
ProblemSpec radial_problem(int dim, double r0_phi = 1.0) {
  ProblemSpec p;
  p.dim = dim;
  p.kind = ProblemSpec::Kind::radial_exp;
  p.radial_r0 = 1.0;
  p.radial_k = 1.0;
  p.r1 = 0.2;
  p.r2 = 3.0;
  p.phi = PhiWeight{r0_phi, 1.0};
  return p;
}

ProblemSpec constant_problem(int dim, double value) {
  ProblemSpec p;
  p.dim = dim;
  p.kind = ProblemSpec::Kind::constant_f;
  p.const_value = value;
  p.r1 = 0.2;
  p.r2 = 3.0;
  p.phi = PhiWeight{1.0, 1.0};
  return p;
}
}  // namespace

TEST_CASE("residual vanishes at the round t = 0 solution") {
  const ProblemSpec p = radial_problem(2);
  const GridSpec grid = GridSpec::s2(16, 32);
  const GridFunction u0 = round_start(p, grid);
  const ResidualField res = residual(u0, 0.0, p);
  CHECK(res.norm_inf < 1e-12);
  CHECK_THAT(res.min_lambda, Catch::Matchers::WithinAbs(coth(1.0) - 1.0, 1e-12));
}

TEST_CASE("umbilic residual at t = 1 for the matching constant prescription") {
  // f = (coth rho - 1)^n at r = rho solves det(h~) = f exactly
  const double rho = 0.8;
  const double lam = coth(rho) - 1.0;
  for (int dim : {1, 2}) {
    ProblemSpec p = constant_problem(dim, dim == 1 ? lam : lam * lam);
    p.phi.r0 = rho;
    const GridSpec grid = dim == 1 ? GridSpec::s1(16) : GridSpec::s2(12, 24);
    const GridFunction u(grid, u_from_r(rho));
    const ResidualField res = residual(u, 1.0, p);
    CHECK(res.norm_inf < 1e-13);
  }
}

TEST_CASE("cone violation reports the offending node") {
  // a deep dimple pushes lambda negative somewhere
  const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.8, 0};
  const GridSpec grid = GridSpec::s2(16, 32);
  const GridFunction u = sample_u(fam, grid);
  const ProblemSpec p = radial_problem(2);
  try {
    residual(u, 0.0, p);
    FAIL("expected ConeViolation");
  } catch (const ConeViolation& e) {
    CHECK(e.min_lambda <= 1e-8);
    CHECK(e.node >= 0);
    CHECK(e.node < grid.node_count());
    // the probing mode reports instead of throwing
    const ResidualField res = residual(u, 0.0, p, 1e-8, false);
    CHECK(res.min_lambda == e.min_lambda);
    CHECK(res.argmin_lambda == e.node);
  }
}

TEST_CASE("matrix-free Jacobian action agrees with a dense difference Jacobian") {
  const GridSpec grid = GridSpec::s1(16);
  const ProblemSpec p = radial_problem(1);
  // a mildly perturbed horo-convex iterate
  GridFunction u(grid);
  for (int i = 0; i < grid.n_phi; ++i)
    u[i] = u_from_r(1.0 + 0.05 * std::cos(grid.phi(i)), 1.0);
  const double t = 0.4;
  const int n = grid.node_count();

  std::vector<double> dense(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const double eps = 1e-6;
  for (int k = 0; k < n; ++k) {
    GridFunction up = u, um = u;
    up[k] += eps;
    um[k] -= eps;
    const ResidualField rp = residual(up, t, p, 1e-8, false);
    const ResidualField rm = residual(um, t, p, 1e-8, false);
    for (int i = 0; i < n; ++i)
      dense[static_cast<std::size_t>(i * n + k)] = (rp.values[i] - rm.values[i]) / (2.0 * eps);
  }

  std::mt19937 rng(19);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const SolverConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(n)), jw(static_cast<std::size_t>(n), 0.0), ref(jw);
    double w_inf = 0.0;
    for (auto& x : w) {
      x = dist(rng);
      w_inf = std::max(w_inf, std::abs(x));
    }
    const double fd_eps = cfg.fd_epsilon * (1.0 + sup_norm_and_argmax(u).first) / w_inf;
    GridFunction up = u, um = u;
    for (int i = 0; i < n; ++i) {
      up[i] += fd_eps * w[static_cast<std::size_t>(i)];
      um[i] -= fd_eps * w[static_cast<std::size_t>(i)];
    }
    const ResidualField rp = residual(up, t, p, 1e-8, false);
    const ResidualField rm = residual(um, t, p, 1e-8, false);
    for (int i = 0; i < n; ++i)
      jw[static_cast<std::size_t>(i)] = (rp.values[i] - rm.values[i]) / (2.0 * fd_eps);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        ref[static_cast<std::size_t>(i)] +=
            dense[static_cast<std::size_t>(i * n + k)] * w[static_cast<std::size_t>(k)];
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num = std::max(num, std::abs(jw[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]));
      den = std::max(den, std::abs(ref[static_cast<std::size_t>(i)]));
    }
    CHECK(num / den < 1e-5);
  }
}

TEST_CASE("preconditioner inverts the shifted discrete Laplacian") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const GridSpec& s : {GridSpec::s2(12, 20), GridSpec::s1(32)}) {
    const LaplacePreconditioner m(s, 1.0);
    GridFunction x(s);
    for (int i = 0; i < x.size(); ++i) x[i] = dist(rng);
    std::vector<double> y(x.values.size());
    m.apply(x.values, y);
    GridFunction yg(s);
    yg.values = y;
    const GridFunction ypp = d_phi2(yg);
    GridFunction lap(s);
    if (s.dim == 1) {
      for (int i = 0; i < s.node_count(); ++i) lap[i] = ypp[i];
    } else {
      const GridFunction ytt = d_theta2(yg, Parity::even);
      const GridFunction yt = d_theta(yg, Parity::even);
      for (int j = 0; j < s.n_theta; ++j) {
        const double th = s.theta(j);
        const double ct = std::cos(th) / std::sin(th);
        const double is2 = 1.0 / (std::sin(th) * std::sin(th));
        for (int i = 0; i < s.n_phi; ++i) {
          const int node = s.index(j, i);
          lap[node] = ytt[node] + ct * yt[node] + is2 * ypp[node];
        }
      }
    }
    double worst = 0.0;
    for (int i = 0; i < s.node_count(); ++i)
      worst = std::max(worst, std::abs((yg[i] - lap[i]) - x[i]));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("newton from the exact round solution stops immediately") {
  const ProblemSpec p = radial_problem(2);
  const GridSpec grid = GridSpec::s2(12, 24);
  const NewtonResult res = newton_solve(round_start(p, grid), 0.0, p, SolverConfig{});
  CHECK(res.record.converged);
  CHECK(res.record.iterations <= 1);
}

TEST_CASE("newton at t = 0 recovers the unique round solution") {
  const ProblemSpec p = radial_problem(2);
  const GridSpec grid = GridSpec::s2(16, 32);
  GridFunction u0(grid);
  for (int node = 0; node < grid.node_count(); ++node)
    u0[node] = u_from_r(1.0 + 0.1 * std::cos(grid.point(node).theta), 1.0);
  const NewtonResult res = newton_solve(u0, 0.0, p, SolverConfig{});
  REQUIRE(res.record.converged);
  double err = 0.0;
  for (int node = 0; node < grid.node_count(); ++node)
    err = std::max(err, std::abs(r_from_u(res.u[node], 1.0) - 1.0));
  CHECK(err < 1e-8);
  // cone preservation along the whole iteration
  for (double ml : res.record.min_lambda_history) CHECK(ml > SolverConfig{}.cone_floor);
}

TEST_CASE("newton solves a manufactured problem from a shifted guess") {
  const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.05, 0};
  const GridSpec grid = GridSpec::s2(16, 32);
  ManufactureOptions opt;
  opt.beta = 2.0;
  const ManufacturedProblem mp = manufacture(fam, grid, opt);
  GridFunction u0(grid);
  for (int node = 0; node < grid.node_count(); ++node)
    u0[node] = u_from_r(mp.r_star[node] + 0.05, 1.0);
  const NewtonResult res = newton_solve(u0, 1.0, mp.problem, SolverConfig{});
  REQUIRE(res.record.converged);
  double err = 0.0;
  for (int node = 0; node < grid.node_count(); ++node)
    err = std::max(err, std::abs(r_from_u(res.u[node], 1.0) - mp.r_star[node]));
  CHECK(err < 1e-4);  // discretization-level agreement on the coarse grid

  // quadratic tail: once the residual is below 1e-3 the contraction is
  // at least quadratic with a bounded constant
  const auto& hist = res.record.residual_history;
  for (std::size_t k = 0; k + 1 < hist.size(); ++k)
    if (hist[k] < 1e-3 && hist[k + 1] > 1e-12)
      CHECK(hist[k + 1] <= 50.0 * hist[k] * hist[k]);
}

TEST_CASE("newton reports failure from outside the cone") {
  const ProblemSpec p = radial_problem(2);
  const GridSpec grid = GridSpec::s2(16, 32);
  const RadialFamily fam{RadialFamily::Kind::cos_theta, 1.0, 0.8, 0};
  CHECK_THROWS_AS(newton_solve(sample_u(fam, grid), 0.0, p, SolverConfig{}), ConeViolation);
}

TEST_CASE("sign of the linearization along the radial direction") {
  const GridSpec grid = GridSpec::s2(12, 24);
  SECTION("matches the closed form at r0 = 1") {
    const ProblemSpec p = radial_problem(2);
    const SignCheckReport rep = linearized_diagonal_sign_check(round_start(p, grid), 0.0, p);
    CHECK(rep.within_tolerance);
    CHECK_THAT(rep.expected, Catch::Matchers::WithinAbs(0.3130352854993312, 1e-13));
    CHECK(rep.rel_error < 1e-6);
    CHECK(rep.measured > 0.0);
  }
  SECTION("scales linearly with the weight steepness") {
    ProblemSpec p1 = radial_problem(2);
    ProblemSpec p2 = radial_problem(2);
    p2.phi.k = 2.0;
    const double m1 = linearized_diagonal_sign_check(round_start(p1, grid), 0.0, p1).measured;
    const double m2 = linearized_diagonal_sign_check(round_start(p2, grid), 0.0, p2).measured;
    CHECK_THAT(m2 / m1, Catch::Matchers::WithinRel(2.0, 0.05));
  }
  SECTION("rejects t away from zero") {
    const ProblemSpec p = radial_problem(2);
    CHECK_THROWS_AS(linearized_diagonal_sign_check(round_start(p, grid), 0.5, p),
                    std::invalid_argument);
  }
}

TEST_CASE("ellipticity: dominant Jacobian mode has a positive direction") {
  // power iteration on the matrix-free Jacobian at the round t = 0 solution:
  // the principal part acts like a positive Laplacian-type operator, so the
  // dominant eigenvalue must be positive
  const ProblemSpec p = radial_problem(1);
  const GridSpec grid = GridSpec::s1(32);
  const GridFunction u = round_start(p, grid);
  const int n = grid.node_count();
  const SolverConfig cfg;
  const double u_inf = sup_norm_and_argmax(u).first;

  auto jmul = [&](const std::vector<double>& w, std::vector<double>& jw) {
    double w_inf = 0.0;
    for (double x : w) w_inf = std::max(w_inf, std::abs(x));
    const double eps = cfg.fd_epsilon * (1.0 + u_inf) / w_inf;
    GridFunction up = u, um = u;
    for (int i = 0; i < n; ++i) {
      up[i] += eps * w[static_cast<std::size_t>(i)];
      um[i] -= eps * w[static_cast<std::size_t>(i)];
    }
    const ResidualField rp = residual(up, 0.0, p, cfg.cone_floor, false);
    const ResidualField rm = residual(um, 0.0, p, cfg.cone_floor, false);
    for (int i = 0; i < n; ++i)
      jw[static_cast<std::size_t>(i)] = (rp.values[i] - rm.values[i]) / (2.0 * eps);
  };

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n)), jv(v);
  for (auto& x : v) x = dist(rng);
  double rayleigh = 0.0;
  for (int it = 0; it < 60; ++it) {
    jmul(v, jv);
    double nrm = 0.0, dot = 0.0, vv = 0.0;
    for (int i = 0; i < n; ++i) {
      nrm += jv[static_cast<std::size_t>(i)] * jv[static_cast<std::size_t>(i)];
      dot += jv[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
      vv += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    rayleigh = dot / vv;
    nrm = std::sqrt(nrm);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = jv[static_cast<std::size_t>(i)] / nrm;
  }
  CHECK(rayleigh > 0.0);
}

TEST_CASE("frame covariance: longitude origin shift commutes with the solve") {
  // axisymmetric problem solved twice, the second time with the initial guess
  // (and hence the longitude origin) rotated by half a period
  const ProblemSpec p = radial_problem(2);
  const GridSpec grid = GridSpec::s2(12, 24);
  auto solve_from = [&](int shift) {
    GridFunction u0(grid);
    for (int j = 0; j < grid.n_theta; ++j)
      for (int i = 0; i < grid.n_phi; ++i) {
        const int is = (i + shift) % grid.n_phi;
        u0[grid.index(j, i)] =
            u_from_r(1.0 + 0.05 * std::cos(grid.theta(j)) +
                         0.02 * std::sin(grid.theta(j)) * std::cos(grid.phi(is)),
                     1.0);
      }
    return newton_solve(u0, 0.0, p, SolverConfig{});
  };
  const NewtonResult a = solve_from(0);
  const NewtonResult b = solve_from(6);
  REQUIRE(a.record.converged);
  REQUIRE(b.record.converged);
  double worst = 0.0;
  for (int j = 0; j < grid.n_theta; ++j)
    for (int i = 0; i < grid.n_phi; ++i)
      worst = std::max(worst, std::abs(a.u[grid.index(j, i)] -
                                       b.u[grid.index(j, (i + grid.n_phi - 6) % grid.n_phi)]));
  CHECK(worst < 1e-8);
}
