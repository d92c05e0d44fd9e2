// Acceptance gate: twelve product criteria, one verdict line each.
// Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "viscostep/viscostep.hpp"

using namespace viscostep;
using clock_t_ = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Tensor2<double> random_spd(std::mt19937& rng, double spread = 0.4) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Tensor2<double> g = Tensor2<double>::identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) += u(rng);
  return symmetrize(transpose(g) * g) + Tensor2<double>::identity() * 0.05;
}

MaxwellState<double> random_state(std::mt19937& rng, double spread = 0.4) {
  return MaxwellState<double>(unimodular(random_spd(rng, spread)));
}

Tensor2<double> random_unimodular(std::mt19937& rng, double spread = 0.4) {
  std::uniform_real_distribution<double> u(-spread, spread);
  for (;;) {
    Tensor2<double> g = Tensor2<double>::identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) += u(rng);
    if (det(g) > 0.2) return g * std::pow(det(g), -1.0 / 3.0);
  }
}

Tensor2<double> sym_probe(int a) {
  const int ii[6] = {0, 1, 2, 0, 0, 1};
  const int jj[6] = {0, 1, 2, 1, 2, 2};
  auto e = Tensor2<double>::zero();
  e(ii[a], jj[a]) = 1.0;
  e(jj[a], ii[a]) = 1.0;
  return e;
}

// lean march of the internal tensor only, used for reference solutions
Tensor2<double> march_final_ci(const LoadingProgram& prog, const MaxwellParams<double>& p,
                               double dt, double duration) {
  const auto n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
  Tensor2<double> Ci = Tensor2<double>::identity();
  for (std::size_t i = 1; i <= n; ++i) {
    const auto kin = Kinematics<double>::from_F(prog.F(static_cast<double>(i) * dt));
    Ci = ebmsc_update_raw(Ci, unimodular(kin.C), dt * p.mu / p.eta);
  }
  return Ci;
}

double family_fit_residual(const Tensor2<double>& X, const Tensor2<double>& Ci0,
                           const Tensor2<double>& Cbar) {
  const double a11 = ddot(Ci0, Ci0), a12 = ddot(Ci0, Cbar), a22 = ddot(Cbar, Cbar);
  const double b1 = ddot(Ci0, X), b2 = ddot(Cbar, X);
  const double den = a11 * a22 - a12 * a12;
  const auto r = X - Ci0 * ((b1 * a22 - b2 * a12) / den) - Cbar * ((a11 * b2 - a12 * b1) / den);
  return norm(r) / norm(X);
}

}  // namespace

int main() {
  const auto prog = LoadingProgram::tension_shear_benchmark();
  const MaxwellParams<double> P(40.0, 400.0);

  // ---- 1 & 3: step-size study against the fine reference ------------------
  double err05_ebmsc = 0.0, err05_em = 0.0;
  {
    const auto t0 = clock_t_::now();
    const auto rows = convergence_study(prog, P, {1.0, 0.5}, 1e-3, 3);
    const double secs = std::chrono::duration<double>(clock_t_::now() - t0).count();

    const double r_ebmsc = rows[0].err_ebmsc / rows[1].err_ebmsc;
    const double r_ebm = rows[0].err_ebm / rows[1].err_ebm;
    const double r_em = rows[0].err_em / rows[1].err_em;
    const bool ratios_ok = r_ebmsc >= 1.6 && r_ebmsc <= 2.4 && r_ebm >= 1.6 && r_ebm <= 2.4 &&
                           r_em >= 1.6 && r_em <= 2.4;
    verdict(1, ratios_ok && secs < 10.0, "first-order convergence",
            fmt("error ratios dt=1/dt=0.5: stabilized %.4f, classical %.4f, exponential %.4f "
                "(required in [1.6, 2.4]); runtime %.2f s (< 10 s)",
                r_ebmsc, r_ebm, r_em, secs));
    err05_ebmsc = rows[1].err_ebmsc;
    err05_em = rows[1].err_em;
  }

  // ---- 2: volume conservation and end-time error --------------------------
  {
    const auto ref_final = march_final_ci(prog, P, 1e-3, 300.0);

    double drift_ebmsc = 0.0, drift_em = 0.0;
    const auto ts_ebmsc = run(prog, P, Integrator::ebmsc, 1.0);
    const auto ts_em = run(prog, P, Integrator::em, 1.0);
    const auto ts_ebm = run(prog, P, Integrator::ebm, 1.0);
    for (std::size_t n = 0; n < ts_ebmsc.rows(); ++n) {
      drift_ebmsc = std::max(drift_ebmsc, std::abs(ts_ebmsc.det_ci_at(n, 0) - 1.0));
      drift_em = std::max(drift_em, std::abs(ts_em.det_ci_at(n, 0) - 1.0));
    }
    const double end_err_ebmsc = norm(ts_ebmsc.ci.back() - ref_final);
    const double end_err_ebm = norm(ts_ebm.ci.back() - ref_final);
    const double drift_ebm = std::abs(ts_ebm.det_ci_at(300, 0) - 1.0);

    verdict(2,
            drift_ebmsc <= 1e-12 && drift_em <= 1e-12 && end_err_ebm > end_err_ebmsc,
            "geometric schemes do not accumulate volumetric error",
            fmt("max |det Ci - 1| at dt=1: stabilized %.2e, exponential %.2e (<= 1e-12), "
                "classical %.2e; end-time error classical %.4e > stabilized %.4e",
                drift_ebmsc, drift_em, drift_ebm, end_err_ebm, end_err_ebmsc));
  }

  // ---- 3: accuracy equivalence of the two geometric schemes ---------------
  {
    const double ratio = std::max(err05_em / err05_ebmsc, err05_ebmsc / err05_em);
    verdict(3, ratio <= 2.0, "stabilized and exponential schemes are equally accurate",
            fmt("max errors at dt=0.5: stabilized %.6e, exponential %.6e, ratio %.4f (<= 2)",
                err05_ebmsc, err05_em, ratio));
  }

  // ---- 4: classical closed form against the iterative solve ---------------
  {
    std::mt19937 rng(101u);
    std::uniform_real_distribution<double> uk(0.01, 1.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const auto s = random_state(rng);
      const auto C = random_spd(rng);
      const double dt = uk(rng) * P.eta / P.mu;  // stiffness <= 1
      const StepInput<double> in(s, C, dt, P);
      const auto closed = step_ebm_closed(in).first;
      const auto iter = step_ebm_iterative(in);
      worst = std::max(worst, norm(iter - closed) / norm(closed));
    }

    const auto pinned =
        ebm_update_raw(Tensor2<double>::identity(), Tensor2<double>::diag(4.0, 0.5, 0.5), 0.1);
    const bool pin_ok = std::abs(pinned(0, 0) - 1.22222) <= 1e-5 &&
                        std::abs(pinned(1, 1) - 0.916667) <= 1e-5 &&
                        std::abs(pinned(2, 2) - 0.916667) <= 1e-5 &&
                        std::abs(det(pinned) - 1.0270) <= 1e-3;
    verdict(4, worst <= 1e-10 && pin_ok, "classical closed form",
            fmt("closed vs iterative: max relative gap %.2e over 1000 draws (<= 1e-10); pinned "
                "diagonal step (%.6f, %.6f, %.6f), det %.5f",
                worst, pinned(0, 0), pinned(1, 1), pinned(2, 2), det(pinned)));
  }

  // ---- 5: consistent tangent against an independent difference quotient ---
  {
    const auto t0 = clock_t_::now();
    std::mt19937 rng(102u);
    std::uniform_real_distribution<double> logk(-3.0, 1.0);
    double worst_fd = 0.0, worst_sym = 0.0;
    for (int n = 0; n < 100; ++n) {
      const auto C = random_spd(rng);
      const auto s = random_state(rng);
      const double dt = std::pow(10.0, logk(rng)) * P.eta / P.mu;
      const auto tan = consistent_tangent(C, s, P, dt);
      worst_sym = std::max(worst_sym, tan.symmetric_defect);

      const double k = dt * P.mu / P.eta;
      const auto stress_at = [&](const Tensor2<double>& Cp) {
        const auto Ci = ebmsc_update_raw(s.C_i, unimodular(Cp), k);
        return Tensor2<double>(symmetrize(inv(Cp) * dev(unimodular(Cp) * inv(Ci)) * P.mu));
      };
      const double h = 1e-6 * std::max(1.0, norm(C));
      double scale = 0.0;
      for (int a = 0; a < 6; ++a)
        scale = std::max(scale, norm(contract(tan.dT_dC, sym_probe(a))));
      for (int a = 0; a < 6; ++a) {
        const auto e = sym_probe(a);
        const auto slope = (stress_at(C + e * h) - stress_at(C - e * h)) * (1.0 / (2.0 * h));
        worst_fd = std::max(worst_fd, norm(contract(tan.dT_dC, e) - slope) / scale);
      }
    }
    const double secs = std::chrono::duration<double>(clock_t_::now() - t0).count();
    verdict(5, worst_fd <= 1e-5 && worst_sym <= 1e-10 && secs < 5.0, "consistent tangent",
            fmt("max relative deviation from central differences %.2e (<= 1e-5) over 100 triples; "
                "max symmetry defect %.2e (<= 1e-10); runtime %.2f s (< 5 s)",
                worst_fd, worst_sym, secs));
  }

  // ---- 6: free energy decreases monotonically with the step size ----------
  {
    const auto C = Tensor2<double>::diag(4.0, 0.5, 0.5);
    const MaxwellState<double> fresh;
    bool monotone = true;
    double prev = free_energy_ci(C, fresh.C_i, P);
    for (int j = 0; j < 100; ++j) {
      const double dt = std::pow(10.0, -3.0 + 6.0 * j / 99.0) * P.eta / P.mu;
      const double psi = free_energy_ci(C, step_ebmsc(StepInput<double>(fresh, C, dt, P)).C_i, P);
      if (psi > prev + 1e-12 * (1.0 + prev)) monotone = false;
      prev = psi;
    }
    verdict(6, monotone, "energy monotonicity",
            fmt("free energy after one step is non-increasing over 100 log-spaced dt in "
                "[1e-3, 1e3] relaxation times; final value %.6f",
                prev));
  }

  // ---- 7: reference-change invariance and the fresh-state reduction -------
  {
    std::mt19937 rng(103u);
    std::uniform_real_distribution<double> udt(0.05, 2.0);
    std::uniform_real_distribution<double> udt_em(0.005, 0.1);  // contraction radius
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const auto s = random_state(rng);
      const auto C = random_spd(rng);
      const auto G = random_unimodular(rng);
      const double dt = udt(rng) * P.tau();
      const double dt_em = udt_em(rng) * P.tau();

      const auto Cg = symmetrize(G * C * transpose(G));
      const MaxwellState<double> sg(symmetrize(G * s.C_i * transpose(G)));

      {
        const auto direct = step_ebmsc(StepInput<double>(sg, Cg, dt, P)).C_i;
        const auto mapped =
            symmetrize(G * step_ebmsc(StepInput<double>(s, C, dt, P)).C_i * transpose(G));
        worst = std::max(worst, norm(direct - mapped) / norm(mapped));
      }
      {
        const auto direct = step_em(StepInput<double>(sg, Cg, dt_em, P), 1e-12, 300).first.C_i;
        const auto mapped = symmetrize(
            G * step_em(StepInput<double>(s, C, dt_em, P), 1e-12, 300).first.C_i * transpose(G));
        worst = std::max(worst, norm(direct - mapped) / norm(mapped));
      }
      {
        const auto R = sqrt_spd(s.C_i);
        const auto Rinv = inv(R);
        const auto Cred = symmetrize(Rinv * C * Rinv);
        const auto red =
            step_ebmsc(StepInput<double>(MaxwellState<double>(), Cred, dt, P)).C_i;
        const auto direct = step_ebmsc(StepInput<double>(s, C, dt, P)).C_i;
        worst = std::max(worst, norm(symmetrize(R * red * R) - direct) / norm(direct));
        const auto red_em =
            step_em(StepInput<double>(MaxwellState<double>(), Cred, dt_em, P), 1e-12, 300)
                .first.C_i;
        const auto direct_em = step_em(StepInput<double>(s, C, dt_em, P), 1e-12, 300).first.C_i;
        worst = std::max(worst, norm(symmetrize(R * red_em * R) - direct_em) / norm(direct_em));
      }
    }
    verdict(7, worst <= 1e-12, "reference-change invariance",
            fmt("max relative defect %.2e over 100 random unimodular changes of reference, both "
                "geometric schemes, including the fresh-state reduction (<= 1e-12)",
                worst));
  }

  // ---- 8: referential and spatial closed forms give one stress ------------
  {
    double worst = 0.0;
    MaxwellState<double> s;
    for (int n = 1; n <= 300; ++n) {
      const auto F = prog.F(static_cast<double>(n));
      const auto kin = Kinematics<double>::from_F(F);
      const auto be = step_ebmsc_eulerian(F, s, P, 1.0);
      s = step_ebmsc(StepInput<double>(s, kin.C, 1.0, P));
      const auto tau_ref = overstress_2pk(kin, s, P).kirchhoff;
      const auto tau_spatial = kirchhoff_from_be(be, P.mu);
      worst = std::max(worst, norm(tau_spatial - tau_ref) / std::max(1.0, norm(tau_ref)));
    }
    verdict(8, worst <= 1e-10, "referential-spatial equivalence",
            fmt("max relative Kirchhoff stress gap %.2e along the full benchmark path at dt=1 "
                "(<= 1e-10)",
                worst));
  }

  // ---- 9: relaxation oracle -----------------------------------------------
  {
    const auto C = Tensor2<double>::diag(4.0, 0.5, 0.5);
    const auto Cbar = unimodular(C);
    const auto exact = relax_exact(MaxwellState<double>(), C, 10.0, P).C_i;

    Tensor2<double> Ci = Tensor2<double>::identity();
    const auto Ci0 = Ci;
    double worst_fit = 0.0;
    for (int n = 0; n < 10000; ++n) {
      Ci = ebmsc_update_raw(Ci, Cbar, 1e-3 * P.mu / P.eta);
      worst_fit = std::max(worst_fit, family_fit_residual(Ci, Ci0, Cbar));
    }
    const double err = norm(Ci - exact);
    verdict(9, err <= 1e-4 && worst_fit <= 1e-12, "relaxation oracle",
            fmt("fixed-configuration march at dt=1e-3 vs exact relaxation at t=10 s: error %.4e "
                "(<= 1e-4); max two-term family fit residual %.2e (<= 1e-12)",
                err, worst_fit));
  }

  // ---- 10: viscosity sweep -------------------------------------------------
  {
    const std::vector<double> etas{4e2, 4e3, 4e4};
    const auto coarse = viscosity_sweep(prog, 40.0, etas, Integrator::ebmsc, 10.0);

    // clause 1: the stiffest dashpot against the frozen-flow hyperelastic curve
    double hyper_scale = 0.0, dev_hyper = 0.0;
    for (std::size_t n = 0; n < coarse[2].rows(); ++n) {
      const auto kin = Kinematics<double>::from_F(coarse[2].F[n]);
      const auto hyper = overstress_2pk(kin, MaxwellState<double>(), P).cauchy;
      hyper_scale = std::max(hyper_scale, norm(hyper));
      dev_hyper = std::max(dev_hyper, norm(coarse[2].cauchy[n] - hyper));
    }
    const double rel_hyper = dev_hyper / hyper_scale;
    const bool clause1 = rel_hyper <= 0.01;

    // clause 2: deviation from each run's own fine-step reference
    std::vector<double> devs;
    for (std::size_t e = 0; e < etas.size(); ++e) {
      const auto fine = run(prog, MaxwellParams<double>(40.0, etas[e]), Integrator::ebmsc, 0.1);
      double d = 0.0;
      for (std::size_t n = 0; n < coarse[e].rows(); ++n)
        d = std::max(d, norm(coarse[e].cauchy[n] - fine.cauchy[100 * n]));
      devs.push_back(d);
    }
    const bool clause2 = devs[0] > devs[1] && devs[0] > devs[2];

    verdict(10, clause1 && clause2, "viscosity sweep",
            fmt("stiffest run vs frozen-flow hyperelastic response: max deviation %.2f%% of the "
                "peak stress (required <= 1%%) -- KNOWN GAP, the scheme still relaxes visibly at "
                "dt=10; step-size sensitivity by viscosity: %.4f > %.4f > %.4f MPa as required",
                100.0 * rel_hyper, devs[0], devs[1], devs[2]));
  }

  // ---- 11: generalized model ----------------------------------------------
  {
    const auto G = GenViscParams<double>::benchmark();
    const GenViscParams<double> eq_only(G.c10, G.c20, G.c30, G.k, {});

    // (a) cyclic loading at two rates against the equilibrium curve
    bool a_ok;
    double margin = 1e300;
    {
      const double rates[2] = {1.5, 0.015};
      std::vector<std::vector<double>> dev(2);
      for (int r = 0; r < 2; ++r) {
        const auto cyc = StretchProgram::cyclic(2.0, 1.6, rates[r], 3);
        const double dt = 0.01 / rates[r];  // one stretch increment per step
        const auto visc = uniaxial_drive(cyc, G, dt);
        const auto eq = uniaxial_drive(cyc, eq_only, dt);
        for (std::size_t n = 0; n < visc.rows(); ++n)
          dev[r].push_back(std::abs(visc.cauchy[n](0, 0) - eq.cauchy[n](0, 0)));
      }
      // stable cycle: the last 80 steps retrace the final loop
      for (std::size_t n = dev[0].size() - 80; n < dev[0].size(); ++n)
        margin = std::min(margin, dev[0][n] - dev[1][n]);
      a_ok = margin > 0.0;
    }

    // (b) + (c) load, partial unload, long hold
    bool b_ok = true, c_ok;
    double t_start, t_eq_15, rel_end;
    {
      const auto lu = StretchProgram::load_unload_hold(2.0, 0.005, 1.5, 1.5, 500.0);
      const auto ts = uniaxial_drive(lu, G, 1.0 / 30.0);
      const std::size_t hold_start = 6010;  // first row of the 500 s hold
      t_start = ts.cauchy[hold_start](0, 0);
      for (std::size_t n = hold_start + 1; n < ts.rows(); ++n)
        if (ts.cauchy[n](0, 0) < ts.cauchy[n - 1](0, 0) - 1e-9) b_ok = false;

      const auto eq_ramp = uniaxial_drive(StretchProgram::piecewise({{0.0, 1.0}, {1.0, 1.5}}),
                                          eq_only, 1.0);
      t_eq_15 = eq_ramp.cauchy.back()(0, 0);
      b_ok = b_ok && t_start < t_eq_15;
      rel_end = std::abs(ts.cauchy.back()(0, 0) - t_eq_15) / std::abs(t_eq_15);
      c_ok = rel_end <= 0.01;
    }

    // (d) stress is twice the energy gradient
    double worst_fd = 0.0;
    {
      std::mt19937 rng(104u);
      for (int n = 0; n < 20; ++n) {
        const auto C = random_spd(rng, 0.3);
        GenViscState<double> s = GenViscState<double>::fresh(4);
        for (auto& b : s.branches)
          b = MaxwellState<double>(unimodular(C * 0.3 + Tensor2<double>::identity() * 0.7));
        const auto kin = Kinematics<double>::from_F(sqrt_spd(C));
        const auto t = total_stress(kin, s, G);
        for (int a = 0; a < 6; ++a) {
          const auto E = sym_probe(a);
          const double h = 1e-6;
          const double psip =
              total_free_energy(Kinematics<double>::from_F(sqrt_spd(C + E * h)), s, G);
          const double psim =
              total_free_energy(Kinematics<double>::from_F(sqrt_spd(C - E * h)), s, G);
          const double fd = (psip - psim) / (2.0 * h);
          const double expect = 0.5 * ddot(t, E);
          worst_fd = std::max(worst_fd,
                              std::abs(fd - expect) / std::max(1.0, std::abs(expect)));
        }
      }
    }

    verdict(11, a_ok && b_ok && c_ok && worst_fd <= 1e-6, "generalized model",
            fmt("slow cycle hugs the equilibrium curve (margin %.3f MPa > 0); hold starts below "
                "equilibrium (%.4f < %.4f MPa) and the stress rises monotonically; after 500 s the "
                "gap to equilibrium is %.4f%% (<= 1%%); energy-stress consistency %.2e (<= 1e-6)",
                margin, t_start, t_eq_15, 100.0 * rel_end, worst_fd));
  }

  // ---- 12: per-step cost ---------------------------------------------------
  {
    const double dt = 0.003;  // 100000 steps over the 300 s program
    const auto t0 = clock_t_::now();
    const auto a = run(prog, P, Integrator::ebmsc, dt);
    const auto t1 = clock_t_::now();
    const auto b = run(prog, P, Integrator::em, dt);
    const auto t2 = clock_t_::now();
    const double us_ebmsc = std::chrono::duration<double, std::micro>(t1 - t0).count() /
                            static_cast<double>(a.rows() - 1);
    const double us_em = std::chrono::duration<double, std::micro>(t2 - t1).count() /
                         static_cast<double>(b.rows() - 1);
    verdict(12, us_ebmsc <= us_em, "per-step cost",
            fmt("mean wall time per step over 100000 steps: stabilized %.3f us <= exponential "
                "%.3f us (no local iteration pays off)",
                us_ebmsc, us_em));
  }

  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures;
}
