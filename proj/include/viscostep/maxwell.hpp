#pragma once

#include "tensor.hpp"

// Single Maxwell element: free energy, overstress in the three configurations,
// and the continuous-time flow rule. The internal variable lives on the
// manifold of symmetric unimodular SPD tensors.

namespace viscostep {

template <class T = double>
struct MaxwellParams {
  T mu;   // shear modulus [MPa]
  T eta;  // viscosity [MPa s]

  MaxwellParams(T mu_, T eta_) : mu(mu_), eta(eta_) {
    if (!(mu >= T(0))) throw InvalidParameter("MaxwellParams: mu must be >= 0");
    if (!(eta > T(0))) throw InvalidParameter("MaxwellParams: eta must be > 0");
  }

  T tau() const { return eta / mu; }  // relaxation time [s]
};

template <class T = double>
struct Kinematics {
  Tensor2<T> F;
  Tensor2<T> C;  // F^T F
  T J;           // det F

  static Kinematics from_F(const Tensor2<T>& F) {
    const T J = det(F);
    if (!(J > T(0))) throw NonPositiveDeterminant("Kinematics: det F <= 0");
    return Kinematics{F, symmetrize(transpose(F) * F), J};
  }
};

template <class T = double>
struct MaxwellState {
  Tensor2<T> C_i = Tensor2<T>::identity();

  MaxwellState() = default;

  // Validates the manifold invariants: symmetric, det = 1, SPD.
  explicit MaxwellState(const Tensor2<T>& ci) : C_i(symmetrize(ci)) {
    if (norm(ci - transpose(ci)) > T(1e-9) * (norm(ci) + T(1)))
      throw InvalidParameter("MaxwellState: C_i not symmetric");
    if (std::abs(det(C_i) - T(1)) > T(1e-12) * (T(1) + std::abs(det(C_i))))
      throw InvalidParameter("MaxwellState: det C_i != 1");
    require_spd(C_i, "MaxwellState");
  }

  T det_drift() const { return std::abs(det(C_i) - T(1)); }
};

template <class T = double>
struct StressResult {
  Tensor2<T> T2pk;       // 2nd Piola-Kirchhoff [MPa]
  Tensor2<T> kirchhoff;  // S = F T2pk F^T [MPa]
  Tensor2<T> cauchy;     // T = S / J [MPa]
};

// Overstress of the element. The 2PK form is mu C^-1 (Cbar Ci^-1)^D; the
// product is symmetric for coaxial inputs and in general up to round-off,
// so results are symmetrized. The raw overload accepts an off-manifold C_i
// (the classical Euler-backward scheme produces those).
template <class T>
StressResult<T> overstress_2pk_raw(const Kinematics<T>& kin, const Tensor2<T>& C_i,
                                   const MaxwellParams<T>& p) {
  const Tensor2<T> Cbar = unimodular(kin.C);
  const Tensor2<T> t2 = symmetrize(inv(kin.C) * dev(Cbar * inv(C_i)) * p.mu);
  const Tensor2<T> S = symmetrize(kin.F * t2 * transpose(kin.F));
  return {t2, S, S * (T(1) / kin.J)};
}

template <class T>
StressResult<T> overstress_2pk(const Kinematics<T>& kin, const MaxwellState<T>& state,
                               const MaxwellParams<T>& p) {
  return overstress_2pk_raw(kin, state.C_i, p);
}

// rho_R psi with rho_R = 1 from C and a raw (possibly off-manifold) C_i.
template <class T>
T free_energy_ci(const Tensor2<T>& C, const Tensor2<T>& C_i, const MaxwellParams<T>& p) {
  const Tensor2<T> Cbar = unimodular(C);
  return p.mu / T(2) * (trace(Cbar * inv(C_i)) - T(3));
}

// (mu/2)(tr(Cbar Ci^-1) - 3) >= 0.
template <class T>
T free_energy(const Kinematics<T>& kin, const MaxwellState<T>& state, const MaxwellParams<T>& p) {
  return free_energy_ci(kin.C, state.C_i, p);
}

// Continuous-time flow rule: Ci_dot = (mu/eta)(Cbar Ci^-1)^D Ci.
template <class T>
Tensor2<T> flow_rhs(const Kinematics<T>& kin, const MaxwellState<T>& state,
                    const MaxwellParams<T>& p) {
  const Tensor2<T> Cbar = unimodular(kin.C);
  return dev(Cbar * inv(state.C_i)) * state.C_i * (p.mu / p.eta);
}

// Eulerian Neo-Hookean overstress from the elastic left Cauchy-Green tensor:
// S = mu dev(unimodular(B_e)). Accepts any SPD B_e (the unimodular part is
// taken internally), so the trial tensor F Ci^-1 F^T can be passed directly.
template <class T>
Tensor2<T> kirchhoff_from_be(const Tensor2<T>& B_e, T mu) {
  require_spd(B_e, "kirchhoff_from_be");
  return dev(unimodular(symmetrize(B_e))) * mu;
}

}  // namespace viscostep
