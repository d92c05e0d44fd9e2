#pragma once

#include <utility>

#include "maxwell.hpp"

// One-step updates of the inelastic right Cauchy-Green tensor for a given
// end-of-step C and dt. The closed-form corrected update (step_ebmsc) is the
// workhorse; the classical Euler-backward scheme (closed form + an iterative
// oracle), the exponential mapping, the Eulerian twin and an exact fixed-C
// relaxation solver exist to cross-check it.

namespace viscostep {

template <class T = double>
struct StepInput {
  MaxwellState<T> C_i_n;
  Tensor2<T> C_np1;
  T dt;  // [s]
  MaxwellParams<T> params;

  StepInput(const MaxwellState<T>& s, const Tensor2<T>& c, T dt_, const MaxwellParams<T>& p)
      : C_i_n(s), C_np1(c), dt(dt_), params(p) {
    if (!(dt >= T(0))) throw InvalidParameter("StepInput: dt must be >= 0");
    if (!(det(C_np1) > T(0))) throw NonPositiveDeterminant("StepInput: det C <= 0");
  }

  T stiffness() const { return dt * params.mu / params.eta; }  // dt mu / eta
};

template <class T = double>
struct StepDiagnostics {
  T det_drift = T(0);
  int iterations = 0;  // 0 for closed forms
  T residual = T(0);
};

// Raw-state update cores. The marching loops use these directly: the classical
// EBM feeds its own drifting output back in, which MaxwellState would reject.
template <class T>
Tensor2<T> ebmsc_update_raw(const Tensor2<T>& C_i, const Tensor2<T>& Cbar, T k) {
  if (k == T(0)) return C_i;
  return unimodular(symmetrize(C_i + Cbar * k));
}

template <class T>
Tensor2<T> ebm_update_raw(const Tensor2<T>& C_i, const Tensor2<T>& Cbar, T k) {
  if (k == T(0)) return C_i;
  const Tensor2<T> Phi = symmetrize(C_i + Cbar * k);
  const T prefactor = T(1) - k / T(3) * trace(Cbar * inv(Phi));
  if (!(prefactor > T(0)))
    throw DegenerateStep("ebm_update_raw: non-positive prefactor, step too large");
  return Phi * prefactor;
}

// Corrected Euler-backward update: Ci <- unimodular(Ci + (dt mu/eta) Cbar).
// Explicit, unconditionally stable, and det Ci = 1 by construction.
template <class T>
MaxwellState<T> step_ebmsc(const StepInput<T>& in) {
  if (in.dt == T(0)) return in.C_i_n;
  const Tensor2<T> Cbar = unimodular(in.C_np1);
  MaxwellState<T> out;
  out.C_i = ebmsc_update_raw(in.C_i_n.C_i, Cbar, in.stiffness());
  return out;
}

// Classical Euler-backward in closed form:
//   Phi = Ci_n + (dt mu/eta) Cbar,  Ci = (1 - (dt mu/3 eta) tr(Cbar Phi^-1)) Phi.
// Does not preserve det = 1; the drift is reported in the diagnostics.
template <class T>
std::pair<Tensor2<T>, StepDiagnostics<T>> step_ebm_closed(const StepInput<T>& in) {
  const T k = in.stiffness();
  if (in.dt == T(0)) return {in.C_i_n.C_i, {in.C_i_n.det_drift(), 0, T(0)}};
  const Tensor2<T> Cbar = unimodular(in.C_np1);
  const Tensor2<T> out = ebm_update_raw(in.C_i_n.C_i, Cbar, k);
  return {out, {std::abs(det(out) - T(1)), 0, T(0)}};
}

namespace detail {

// 6-component symmetric packing used by the Newton oracle below.
template <class T>
void sym_to6(const Tensor2<T>& a, T out[6]) {
  out[0] = a(0, 0);
  out[1] = a(1, 1);
  out[2] = a(2, 2);
  out[3] = a(0, 1);
  out[4] = a(0, 2);
  out[5] = a(1, 2);
}

template <class T>
Tensor2<T> sym_from6(const T v[6]) {
  Tensor2<T> a;
  a(0, 0) = v[0];
  a(1, 1) = v[1];
  a(2, 2) = v[2];
  a(0, 1) = a(1, 0) = v[3];
  a(0, 2) = a(2, 0) = v[4];
  a(1, 2) = a(2, 1) = v[5];
  return a;
}

// Solve the 6x6 system J x = b by Gaussian elimination with partial pivoting.
template <class T>
bool solve6(T J[6][6], T b[6], T x[6]) {
  for (int c = 0; c < 6; ++c) {
    int best = c;
    for (int r = c + 1; r < 6; ++r)
      if (std::abs(J[r][c]) > std::abs(J[best][c])) best = r;
    if (best != c) {
      for (int k = 0; k < 6; ++k) std::swap(J[c][k], J[best][k]);
      std::swap(b[c], b[best]);
    }
    if (std::abs(J[c][c]) < T(1e-300)) return false;
    for (int r = c + 1; r < 6; ++r) {
      const T f = J[r][c] / J[c][c];
      for (int k = c; k < 6; ++k) J[r][k] -= f * J[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int r = 5; r >= 0; --r) {
    T s = b[r];
    for (int k = r + 1; k < 6; ++k) s -= J[r][k] * x[k];
    x[r] = s / J[r][r];
  }
  return true;
}

}  // namespace detail

// Iterative oracle for the same discretized evolution equation the closed form
// solves: X = Ci_n + (dt mu/eta)(Cbar X^-1)^D X. A plain fixed point on this
// map stops converging around dt mu/eta ~ 0.85 on generic inputs, so the
// oracle runs a line-searched Newton on the six symmetric components with a
// finite-difference Jacobian (start value Phi). Not exposed through the CLI.
template <class T>
Tensor2<T> step_ebm_iterative(const StepInput<T>& in, T tol = T(1e-12), int cap = 200) {
  if (in.dt == T(0)) return in.C_i_n.C_i;
  const T k = in.stiffness();
  const Tensor2<T> Cbar = unimodular(in.C_np1);
  const Tensor2<T> A = in.C_i_n.C_i;

  auto residual = [&](const T v[6], T r[6]) {
    const Tensor2<T> X = detail::sym_from6(v);
    const Tensor2<T> R = X - A - (Cbar - X * (trace(Cbar * inv(X)) / T(3))) * k;
    detail::sym_to6(symmetrize(R), r);
  };
  auto rnorm = [](const T r[6]) {
    T s = 0;
    for (int i = 0; i < 6; ++i) s += r[i] * r[i];
    return std::sqrt(s);
  };

  T v[6];
  detail::sym_to6(symmetrize(A + Cbar * k), v);
  T scale = T(0);
  for (int i = 0; i < 6; ++i) scale = std::max(scale, std::abs(v[i]));
  scale = std::max(scale, T(1));

  for (int it = 0; it < cap; ++it) {
    T r[6];
    residual(v, r);
    const T nr = rnorm(r);
    if (nr <= tol * scale) return detail::sym_from6(v);

    T J[6][6];
    for (int c = 0; c < 6; ++c) {
      const T h = T(1e-7) * std::max(std::abs(v[c]), T(1));
      T vp[6], vm[6], rp[6], rm[6];
      for (int i = 0; i < 6; ++i) vp[i] = vm[i] = v[i];
      vp[c] += h;
      vm[c] -= h;
      residual(vp, rp);
      residual(vm, rm);
      for (int i = 0; i < 6; ++i) J[i][c] = (rp[i] - rm[i]) / (T(2) * h);
    }
    T rhs[6], step[6];
    for (int i = 0; i < 6; ++i) rhs[i] = -r[i];
    if (!detail::solve6(J, rhs, step))
      throw NoConvergence("step_ebm_iterative: singular Jacobian");

    T lambda = T(1);
    for (int ls = 0; ls < 30; ++ls) {
      T vt[6], rt[6];
      for (int i = 0; i < 6; ++i) vt[i] = v[i] + lambda * step[i];
      bool ok = true;
      try {
        residual(vt, rt);
      } catch (const Error&) {
        ok = false;
      }
      if (ok && rnorm(rt) < nr) {
        for (int i = 0; i < 6; ++i) v[i] = vt[i];
        break;
      }
      lambda /= T(2);
      if (ls == 29)
        throw NoConvergence("step_ebm_iterative: line search stalled");
    }
  }
  throw NoConvergence("step_ebm_iterative: no convergence after iteration cap");
}

// Exponential mapping: Ci = exp[(dt mu/eta)(Cbar Ci^-1)^D] Ci_n, solved by a
// damped fixed point (damping 1/2 on the first three sweeps, then full steps)
// with symmetrization each sweep. The exponent is traceless, so the converged
// value is unimodular up to round-off.
template <class T>
std::pair<MaxwellState<T>, StepDiagnostics<T>> step_em(const StepInput<T>& in, T tol = T(1e-12),
                                                       int cap = 200) {
  StepDiagnostics<T> diag;
  if (in.dt == T(0)) {
    diag.det_drift = in.C_i_n.det_drift();
    return {in.C_i_n, diag};
  }
  const T k = in.stiffness();
  const Tensor2<T> Cbar = unimodular(in.C_np1);
  const Tensor2<T> Cin = in.C_i_n.C_i;

  auto sweep = [&](const Tensor2<T>& X) {
    return symmetrize(expm(dev(Cbar * inv(X)) * k) * Cin);
  };

  Tensor2<T> X = Cin;
  T res = T(0);
  int it = 0;
  for (; it < cap; ++it) {
    // The fixed point contracts only for moderate dt mu/eta; a diverging
    // iterate leaves the SPD cone or blows up, and must surface as a
    // convergence failure, not as a singular inverse deep inside a sweep.
    if (!(det(X) > T(0)) || !(norm(X) <= T(1e9)))
      throw NoConvergence("step_em: iteration diverged after " + std::to_string(it) +
                          " sweeps (step too large for the fixed point)");
    const Tensor2<T> Xn = sweep(X);
    const Tensor2<T> Xd = it < 3 ? Tensor2<T>((X + Xn) * T(0.5)) : Xn;
    res = norm(Xd - X) / std::max(norm(X), T(1e-30));
    X = Xd;
    if (res <= tol) break;
  }
  if (!(res <= tol))  // also catches NaN from a diverged iteration
    throw NoConvergence("step_em: no convergence, residual " + std::to_string(static_cast<double>(res)));
  // One last full sweep so the result is exp(traceless) * Ci_n exactly,
  // keeping det = 1 to round-off independent of the convergence level.
  X = sweep(X);
  diag.iterations = it + 2;
  diag.residual = res;
  MaxwellState<T> out;
  out.C_i = X;
  diag.det_drift = out.det_drift();
  return {out, diag};
}

// Eulerian twin of step_ebmsc, marching the elastic left Cauchy-Green tensor:
//   Be_trial = F Ci_n^-1 F^T
//   Be^-1    = (det F)^(-2/3) unimodular( unimodular(Be_trial)^-1 + (dt mu/eta) 1 )
// Returns Be at the end of the step; stresses follow via kirchhoff_from_be.
template <class T>
Tensor2<T> step_ebmsc_eulerian(const Tensor2<T>& F_np1, const MaxwellState<T>& C_i_n,
                               const MaxwellParams<T>& p, T dt) {
  const T J = det(F_np1);
  if (!(J > T(0))) throw NonPositiveDeterminant("step_ebmsc_eulerian: det F <= 0");
  if (!(dt >= T(0))) throw InvalidParameter("step_ebmsc_eulerian: dt must be >= 0");
  const Tensor2<T> Be_tr = symmetrize(F_np1 * inv(C_i_n.C_i) * transpose(F_np1));
  const T k = dt * p.mu / p.eta;
  const Tensor2<T> I = Tensor2<T>::identity();
  const Tensor2<T> Be_inv =
      unimodular(symmetrize(inv(unimodular(Be_tr)) + I * k)) * std::pow(J, T(-2) / T(3));
  return symmetrize(inv(Be_inv));
}

// Exact solution of a relaxation process at fixed C: the trajectory stays on
// the one-parameter family unimodular(Ci0 + phi Cbar) where phi solves
//   phi' = (mu/eta) det(Ci0 + phi Cbar)^(1/3),  phi(0) = 0.
// Integrated by classical RK4 with step-doubling control to a 1e-12 local
// tolerance (falls back to a fixed 1e-4 (eta/mu) substep if control stalls).
template <class T>
MaxwellState<T> relax_exact(const MaxwellState<T>& C_i0, const Tensor2<T>& C_fixed, T t,
                            const MaxwellParams<T>& p) {
  if (!(t >= T(0))) throw InvalidParameter("relax_exact: negative duration");
  if (t == T(0)) return C_i0;
  const Tensor2<T> Cbar = unimodular(C_fixed);
  const Tensor2<T> Ci0 = C_i0.C_i;

  auto rhs = [&](T phi) {
    using std::cbrt;
    return p.mu / p.eta * cbrt(det(Ci0 + Cbar * phi));
  };
  auto rk4 = [&](T phi, T h) {
    const T k1 = rhs(phi);
    const T k2 = rhs(phi + h / T(2) * k1);
    const T k3 = rhs(phi + h / T(2) * k2);
    const T k4 = rhs(phi + h * k3);
    return phi + h / T(6) * (k1 + T(2) * k2 + T(2) * k3 + k4);
  };

  const T tol = T(1e-12);
  T phi = T(0);
  T s = T(0);
  T h = std::min(t, p.eta / p.mu * T(1e-2));
  int stalls = 0;
  while (s < t) {
    if (h > t - s) h = t - s;
    const T full = rk4(phi, h);
    const T half = rk4(rk4(phi, h / T(2)), h / T(2));
    const T err = std::abs(half - full) / T(15);
    if (err <= tol * std::max(T(1), std::abs(half))) {
      phi = half + (half - full) / T(15);  // local extrapolation
      s += h;
      if (err < tol / T(32)) h *= T(2);
    } else {
      h /= T(2);
      if (++stalls > 200) {  // fixed fallback substep
        const T hf = p.eta / p.mu * T(1e-4);
        while (s < t) {
          const T step = std::min(hf, t - s);
          phi = rk4(phi, step);
          s += step;
        }
        break;
      }
    }
  }
  MaxwellState<T> out;
  out.C_i = unimodular(symmetrize(Ci0 + Cbar * phi));
  return out;
}

}  // namespace viscostep
