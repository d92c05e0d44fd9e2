// Cyclic uniaxial loading at two stretch rates. Fast cycles open a wide
// hysteresis loop; at a rate well below the slowest relaxation time the
// loop collapses onto the equilibrium curve.

#include <cstdio>
#include <fstream>
#include <string>

#include "viscostep/viscostep.hpp"

using namespace viscostep;

int main(int argc, char** argv) {
  const auto params = GenViscParams<double>::benchmark();
  const GenViscParams<double> eq(params.c10, params.c20, params.c30, params.k, {});

  for (const double rate : {1.5, 0.015}) {
    const auto program = StretchProgram::cyclic(2.0, 1.6, rate, 3);
    const double dt = 0.01 / rate;  // one stretch increment of 0.01 per step
    const auto visc = uniaxial_drive(program, params, dt);
    const auto eq_run = uniaxial_drive(program, eq, dt);

    // widest gap to the equilibrium curve over the last (stable) cycle
    double gap = 0.0;
    for (std::size_t n = visc.rows() - 80; n < visc.rows(); ++n)
      gap = std::max(gap, std::abs(visc.cauchy[n](0, 0) - eq_run.cauchy[n](0, 0)));
    std::printf("rate %6.3f /s: %4zu steps, stress at the final peak %7.4f MPa, "
                "max gap to equilibrium over the stable cycle %.4f MPa\n",
                rate, visc.rows() - 1, visc.cauchy.back()(0, 0), gap);

    if (argc > 1) {
      const std::string path = std::string(argv[1]) + (rate > 0.1 ? ".fast.csv" : ".slow.csv");
      std::ofstream os(path);
      write_csv(os, visc);
      std::printf("  wrote %s\n", path.c_str());
    }
  }
  return 0;
}
