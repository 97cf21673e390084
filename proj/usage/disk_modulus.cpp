// Computes σ on the unit disk at a few β and compares with the radial ball value.
//   disk_modulus [cells per unit, default 64]

#include <cstdio>
#include <cstdlib>

#include "poisson_sharp/bathtub.hpp"
#include "poisson_sharp/sharp_bounds.hpp"

int main(int argc, char** argv) {
  namespace ps = poisson_sharp;
  const double resolution = argc > 1 ? std::atof(argv[1]) : 64.0;
  const auto disk = ps::make_domain("disk:1", resolution);
  const auto ball = ps::BallModulusParams::for_domain(*disk);
  ps::ExtremalOptimizer optimizer(disk);
  std::printf("%10s %12s %12s %10s\n", "beta/|D|", "sigma_D", "sigma_B", "rel.diff");
  for (double frac : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    const double beta = frac * disk->measure();
    const auto point = optimizer.optimize(beta);
    const double sb = ps::radial_sigma_ball(ball, beta);
    std::printf("%10.3f %12.6f %12.6f %10.2e\n", frac, point.sigma, sb, point.sigma / sb - 1.0);
  }
}
