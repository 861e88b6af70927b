// Geometry of round spheres: shifted principal curvatures and the shifted
// Gauss curvature of r = rho for a few radii.

#include <cstdio>

#include "horo/geometry.hpp"
#include "horo/grid.hpp"

int main() {
  using namespace horo;
  const GridSpec grid = GridSpec::s2(16, 32);
  std::printf("%8s %14s %14s %14s\n", "rho", "kappa", "lambda", "shifted Gauss");
  for (double rho : {0.5, 1.0, 2.0, 4.0}) {
    const GridFunction u(grid, u_from_r(rho));
    const JetField jets = covariant_jet(u);
    const ShapeFields sf = shape_operator(jets.at(0), round_metric(grid.point(0)));
    std::printf("%8.2f %14.10f %14.10f %14.10f\n", rho, sf.kappa[0], sf.lambda[0],
                shifted_gauss(sf.lambda));
  }
  std::printf("\nhoro-convexity fades as rho grows: lambda -> 0 like 2 e^{-2 rho}\n");
  return 0;
}
