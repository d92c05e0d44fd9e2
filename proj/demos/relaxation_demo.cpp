// Stress relaxation after partial unload: ramp to stretch 2 at 0.005 /s,
// snap back to 1.5 at 1.5 /s, then hold for 500 s. During the hold the
// axial stress *rises* toward the equilibrium curve -- the signature effect
// of unloading faster than the dashpots can follow.

#include <cstdio>
#include <fstream>

#include "viscostep/viscostep.hpp"

using namespace viscostep;

int main(int argc, char** argv) {
  const auto params = GenViscParams<double>::benchmark();
  const auto program = StretchProgram::load_unload_hold(2.0, 0.005, 1.5, 1.5, 500.0);
  const double dt = 1.0 / 30.0;

  const auto series = uniaxial_drive(program, params, dt);

  if (argc > 1) {
    std::ofstream os(argv[1]);
    write_csv(os, series);
    std::printf("wrote %zu rows to %s\n", series.rows(), argv[1]);
  }

  // equilibrium stress at the held stretch, for reference
  const GenViscParams<double> eq(params.c10, params.c20, params.c30, params.k, {});
  const auto ramp = uniaxial_drive(StretchProgram::piecewise({{0.0, 1.0}, {1.0, 1.5}}), eq, 1.0);
  const double t_eq = ramp.cauchy.back()(0, 0);

  std::printf("#       t   stretch     T_axial    T_eq(1.5)\n");
  for (double tn : {0.0, 100.0, 200.0, 200.5, 210.0, 250.0, 350.0, 500.0, 700.0}) {
    const auto n = static_cast<std::size_t>(tn / dt + 0.5);
    if (n >= series.rows()) continue;
    std::printf("%9.1f  %8.4f  %10.4f  %10.4f\n", series.t[n], series.F[n](0, 0),
                series.cauchy[n](0, 0), t_eq);
  }
  std::printf("hold: starts at %.4f MPa, ends at %.4f MPa, equilibrium %.4f MPa\n",
              series.cauchy[6010](0, 0), series.cauchy.back()(0, 0), t_eq);
  return 0;
}
