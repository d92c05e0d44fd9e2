#pragma once

#include <vector>

#include "integrators.hpp"

// Generalized viscoelastic model: a third-order Yeoh equilibrium spring with a
// quadratic volumetric term, in parallel with N Maxwell branches. Branches
// evolve independently; each one is advanced by the corrected Euler-backward
// update (the exponential mapping is available behind a flag for cross-checks).

namespace viscostep {

enum class BranchIntegrator { ebmsc, em };

template <class T = double>
struct GenViscParams {
  T c10, c20, c30;  // Yeoh constants [MPa]
  T k;              // bulk modulus [MPa]
  std::vector<MaxwellParams<T>> branches;

  GenViscParams(T c10_, T c20_, T c30_, T k_, std::vector<MaxwellParams<T>> branches_)
      : c10(c10_), c20(c20_), c30(c30_), k(k_), branches(std::move(branches_)) {
    if (!(k > T(0))) throw InvalidParameter("GenViscParams: bulk modulus must be > 0");
  }

  T max_tau() const {
    T m = T(0);
    for (const auto& b : branches) m = std::max(m, b.tau());
    return m;
  }

  // The rubber-like benchmark parameter set used throughout the demos:
  // c10 = 0.45, c20 = -0.048, c30 = 0.011, k = 1000 MPa, four branches with
  // mu = 0.2 MPa and eta = 0.02, 0.2, 2, 20 MPa s (relaxation times 0.1..100 s).
  static GenViscParams benchmark() {
    std::vector<MaxwellParams<T>> br;
    for (int m = 1; m <= 4; ++m) br.push_back(MaxwellParams<T>(T(0.2), T(2) * std::pow(T(10), m - 3)));
    return GenViscParams(T(0.45), T(-0.048), T(0.011), T(1000), std::move(br));
  }
};

template <class T = double>
struct GenViscState {
  std::vector<MaxwellState<T>> branches;

  static GenViscState fresh(std::size_t n) {
    GenViscState s;
    s.branches.assign(n, MaxwellState<T>{});
    return s;
  }
};

// Equilibrium (Yeoh + volumetric) 2PK stress:
//   T_eq = (2 c10 + 4 c20 (tr Cbar - 3) + 6 c30 (tr Cbar - 3)^2) dev(Cbar) C^-1
//        + 3 k J^(1/3) (J^(1/3) - 1) C^-1
template <class T>
Tensor2<T> equilibrium_stress(const Kinematics<T>& kin, const GenViscParams<T>& p) {
  if (!(kin.J > T(0))) throw SingularTensor("equilibrium_stress: J <= 0");
  const Tensor2<T> Cinv = inv(kin.C);
  const Tensor2<T> Cbar = unimodular(kin.C);
  const T x = trace(Cbar) - T(3);
  const T w = T(2) * p.c10 + T(4) * p.c20 * x + T(6) * p.c30 * x * x;
  using std::cbrt;
  const T J13 = cbrt(kin.J);
  return symmetrize(dev(Cbar) * Cinv * w + Cinv * (T(3) * p.k * J13 * (J13 - T(1))));
}

// Total 2PK stress: equilibrium plus the branch overstresses.
template <class T>
Tensor2<T> total_stress(const Kinematics<T>& kin, const GenViscState<T>& state,
                        const GenViscParams<T>& p) {
  if (state.branches.size() != p.branches.size())
    throw InvalidParameter("total_stress: state/parameter branch count mismatch");
  Tensor2<T> t2 = equilibrium_stress(kin, p);
  const Tensor2<T> Cinv = inv(kin.C);
  const Tensor2<T> Cbar = unimodular(kin.C);
  for (std::size_t m = 0; m < p.branches.size(); ++m)
    t2 += symmetrize(Cinv * dev(Cbar * inv(state.branches[m].C_i)) * p.branches[m].mu);
  return t2;
}

template <class T>
StressResult<T> total_stress_result(const Kinematics<T>& kin, const GenViscState<T>& state,
                                    const GenViscParams<T>& p) {
  const Tensor2<T> t2 = total_stress(kin, state, p);
  const Tensor2<T> S = symmetrize(kin.F * t2 * transpose(kin.F));
  return {t2, S, S * (T(1) / kin.J)};
}

// Advance every branch independently over one step.
template <class T>
GenViscState<T> step(const GenViscState<T>& state, const Tensor2<T>& C_np1, T dt,
                     const GenViscParams<T>& p,
                     BranchIntegrator integ = BranchIntegrator::ebmsc) {
  if (state.branches.size() != p.branches.size())
    throw InvalidParameter("step: state/parameter branch count mismatch");
  GenViscState<T> out;
  out.branches.reserve(state.branches.size());
  for (std::size_t m = 0; m < state.branches.size(); ++m) {
    const StepInput<T> in(state.branches[m], C_np1, dt, p.branches[m]);
    out.branches.push_back(integ == BranchIntegrator::ebmsc ? step_ebmsc(in)
                                                            : step_em(in).first);
  }
  return out;
}

// rho_R psi: Yeoh + volumetric + per-branch overstress energies.
template <class T>
T total_free_energy(const Kinematics<T>& kin, const GenViscState<T>& state,
                    const GenViscParams<T>& p) {
  if (state.branches.size() != p.branches.size())
    throw InvalidParameter("total_free_energy: state/parameter branch count mismatch");
  const Tensor2<T> Cbar = unimodular(kin.C);
  const T x = trace(Cbar) - T(3);
  using std::cbrt;
  const T J13 = cbrt(kin.J);
  T psi = p.c10 * x + p.c20 * x * x + p.c30 * x * x * x +
          T(4.5) * p.k * (J13 - T(1)) * (J13 - T(1));
  for (std::size_t m = 0; m < p.branches.size(); ++m)
    psi += p.branches[m].mu / T(2) * (trace(Cbar * inv(state.branches[m].C_i)) - T(3));
  return psi;
}

}  // namespace viscostep
