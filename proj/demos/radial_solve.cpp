// Minimal library use: continuation for the radially symmetric prescription
// det(h~) = (coth r - 1) e^{1 - r} on S^1, followed by the standard checks.

#include <cstdio>

#include "horo/horo.hpp"

int main() {
  using namespace horo;

  ProblemSpec problem;
  problem.dim = 1;
  problem.kind = ProblemSpec::Kind::radial_exp;
  problem.radial_r0 = 1.0;
  problem.radial_k = 1.0;
  problem.r1 = 0.5;
  problem.r2 = 2.0;
  problem.phi = PhiWeight{1.0, 1.0};

  const GridSpec grid = GridSpec::s1(64);
  const ContinuationTrace trace = continue_to_one(problem, grid);
  std::printf("continuation: %s in %zu steps\n", trace.success ? "success" : "failed",
              trace.steps.size());
  for (const auto& s : trace.steps)
    std::printf("  t = %.4f  residual = %.2e  r in [%.8f, %.8f]\n", s.t, s.residual_norm, s.min_r,
                s.max_r);

  const GridFunction& u = trace.steps.back().u;
  const CheckResult convex = check_horoconvex(u);
  const CheckResult barrier = check_c0_barriers(u, problem);
  std::printf("horo-convex: %s (%s)\n", convex.passed ? "yes" : "no", convex.note.c_str());
  std::printf("barriers:    %s (%s)\n", barrier.passed ? "yes" : "no", barrier.note.c_str());
  return trace.success ? 0 : 2;
}
