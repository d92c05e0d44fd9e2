#pragma once

#include <functional>

#include "integrators.hpp"

// Consistent tangent of the algorithmic stress: derivative of
//   T1(C) = mu C^-1 (Cbar Ci(C)^-1)^D,   Ci(C) = unimodular(Ci_n + (dt mu/eta) Cbar)
// with respect to C, assembled in closed form through the chain
// dPhi/dC -> dCi/dC -> dCi^-1/dC. Possesses major symmetry; the defect is
// reported alongside the operator.

namespace viscostep {

template <class T = double>
struct TangentResult {
  Tensor4<T> dT_dC;       // [MPa]
  T symmetric_defect;     // max_{ijkl} |T_ijkl - T_klij| / ||T||
};

template <class T>
TangentResult<T> consistent_tangent(const Tensor2<T>& C, const MaxwellState<T>& C_i_n,
                                    const MaxwellParams<T>& p, T dt) {
  if (!(dt >= T(0))) throw InvalidParameter("consistent_tangent: dt must be >= 0");
  const T dC = det(C);
  if (!(dC > T(0)) || !is_spd(C)) throw SingularTensor("consistent_tangent: degenerate C");

  const T k = dt * p.mu / p.eta;
  const Tensor2<T> Cinv = inv(C);
  const Tensor2<T> Cbar = unimodular(C);
  const Tensor2<T> Phi = symmetrize(C_i_n.C_i + Cbar * k);
  const T dPhi = det(Phi);
  if (!(dPhi > T(0))) throw SingularTensor("consistent_tangent: degenerate Phi");
  const Tensor2<T> Ci = unimodular(Phi);
  const Tensor2<T> Ciinv = inv(Ci);

  using T4 = Tensor4<T>;
  const T4 II = T4::identity();
  const T4 PP = T4::dev_projector();
  using std::cbrt;
  const T detC_m13 = T(1) / cbrt(dC);

  // dPhi/dC = (mu dt/eta)(det C)^(-1/3) (II - (1/3) C (x) C^-1)
  const T4 dPhi_dC = (II - T4::dyad(C, Cinv) * (T(1) / T(3))) * (k * detC_m13);
  // dCi/dC = (det Phi)^(-1/3) (II - (1/3) Phi (x) Phi^-1) : dPhi/dC
  const T4 dCi_dC =
      compose((II - T4::dyad(Phi, inv(Phi)) * (T(1) / T(3))) * (T(1) / cbrt(dPhi)), dPhi_dC);
  // dCi^-1/dC = -(Ci^-1 (o) Ci^-1) : dCi/dC
  const T4 dCiinv_dC = compose(T4::square(Ciinv, Ciinv), dCi_dC) * T(-1);

  const T4 t1 = T4::square(Cinv, Cinv * dev(Cbar * Ciinv)) * (-p.mu);
  const T4 inner = T4::dyad(dev(C * Ciinv), Cinv) * (T(-1) / T(3)) +
                   compose(PP, postmul(II, Ciinv) + premul(C, dCiinv_dC));
  const T4 t2 = premul(Cinv, inner) * (p.mu * detC_m13);
  T4 tangent = t1 + t2;

  const T nrm = norm4(tangent);
  T defect = T(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          // major symmetry on the symmetrized action: compare the coefficient of
          // X_ij Y_ab with that of X_ab Y_ij, each summed over index transposes
          const T fwd = tangent(i, j, a, b) + tangent(i, j, b, a) + tangent(j, i, a, b) +
                        tangent(j, i, b, a);
          const T bwd = tangent(a, b, i, j) + tangent(a, b, j, i) + tangent(b, a, i, j) +
                        tangent(b, a, j, i);
          defect = std::max(defect, std::abs(fwd - bwd) / T(4));
        }
  return {tangent, nrm > T(0) ? defect / nrm : T(0)};
}

// Central-difference Jacobian of a stress map, perturbing the six independent
// components of symmetric C (off-diagonal entries move in pairs). The result
// acts identically to the analytic operator on symmetric arguments; minor
// index pairs (k,l) are stored symmetrically.
template <class T>
Tensor4<T> fd_tangent(const std::function<Tensor2<T>(const Tensor2<T>&)>& stress_map,
                      const Tensor2<T>& C, T h) {
  if (!(h > T(0))) throw InvalidParameter("fd_tangent: h must be > 0");
  Tensor4<T> out;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      Tensor2<T> E;
      E(a, b) = T(1);
      E(b, a) = T(1);  // same entry for a == b
      const Tensor2<T> Dp = stress_map(C + E * h);
      const Tensor2<T> Dm = stress_map(C - E * h);
      const Tensor2<T> D = (Dp - Dm) * (T(1) / (T(2) * h));
      const T w = a == b ? T(1) : T(0.5);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          out(i, j, a, b) = D(i, j) * w;
          out(i, j, b, a) = D(i, j) * w;
        }
    }
  return out;
}

}  // namespace viscostep
