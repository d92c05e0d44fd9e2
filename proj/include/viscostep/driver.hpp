#pragma once

#include <cmath>
#include <cstddef>
#include <future>
#include <string>
#include <vector>

#include "genvisc.hpp"

// Time marching along prescribed deformation programs, plus the convergence
// and sweep studies built on top of it. All marching uses t_n = n dt (no
// running sums), so identical inputs give bit-identical series.

namespace viscostep {

enum class Integrator { ebmsc, ebm, em };

// Piecewise-linear deformation program F'(t) through keyframes, optionally
// projected to the unimodular group after interpolation. Times must start at
// zero and increase strictly; det F' is checked on a fine sample of every
// segment at construction.
struct LoadingProgram {
  struct Keyframe {
    double t;
    Tensor2<double> F;
  };

  std::vector<Keyframe> keyframes;
  bool project_unimodular = false;

  double duration() const { return keyframes.back().t; }

  Tensor2<double> F(double t) const {
    const Tensor2<double> Fp = interpolate(t);
    return project_unimodular ? unimodular(Fp) : Fp;
  }

  static LoadingProgram piecewise(std::vector<Keyframe> frames, bool project) {
    if (frames.size() < 2)
      throw InvalidParameter("LoadingProgram: need at least two keyframes");
    if (frames.front().t != 0.0)
      throw InvalidParameter("LoadingProgram: first keyframe must sit at t = 0");
    for (std::size_t i = 1; i < frames.size(); ++i)
      if (!(frames[i].t > frames[i - 1].t))
        throw InvalidParameter("LoadingProgram: keyframe times must increase strictly");
    LoadingProgram prog{std::move(frames), project};
    for (std::size_t i = 1; i < prog.keyframes.size(); ++i)
      for (int s = 0; s <= 32; ++s) {
        const double a = static_cast<double>(s) / 32.0;
        const double t =
            prog.keyframes[i - 1].t + a * (prog.keyframes[i].t - prog.keyframes[i - 1].t);
        if (!(det(prog.interpolate(t)) > 0.0))
          throw NonPositiveDeterminant("LoadingProgram: det F <= 0 along a segment");
      }
    return prog;
  }

  // 300 s benchmark path: stretch along the first axis, over to a shear-type
  // state, then stretch along the second axis; isochoric via the projection.
  static LoadingProgram tension_shear_benchmark() {
    const double s = 1.0 / std::sqrt(2.0);
    Tensor2<double> F3 = Tensor2<double>::identity();
    F3(0, 1) = 1.0;
    return piecewise({{0.0, Tensor2<double>::identity()},
                      {100.0, Tensor2<double>::diag(2.0, s, s)},
                      {200.0, F3},
                      {300.0, Tensor2<double>::diag(s, 2.0, s)}},
                     true);
  }

 private:
  Tensor2<double> interpolate(double t) const {
    if (t <= keyframes.front().t) return keyframes.front().F;
    if (t >= keyframes.back().t) return keyframes.back().F;
    std::size_t i = 1;
    while (keyframes[i].t < t) ++i;
    const double a = (t - keyframes[i - 1].t) / (keyframes[i].t - keyframes[i - 1].t);
    return keyframes[i - 1].F * (1.0 - a) + keyframes[i].F * a;
  }
};

// Scalar axial-stretch program lambda(t), piecewise linear through keyframes.
struct StretchProgram {
  struct Keyframe {
    double t;
    double stretch;
  };

  std::vector<Keyframe> keyframes;

  double duration() const { return keyframes.back().t; }

  double stretch(double t) const {
    if (t <= keyframes.front().t) return keyframes.front().stretch;
    if (t >= keyframes.back().t) return keyframes.back().stretch;
    std::size_t i = 1;
    while (keyframes[i].t < t) ++i;
    const double a = (t - keyframes[i - 1].t) / (keyframes[i].t - keyframes[i - 1].t);
    return keyframes[i - 1].stretch * (1.0 - a) + keyframes[i].stretch * a;
  }

  static StretchProgram piecewise(std::vector<Keyframe> frames) {
    if (frames.size() < 2)
      throw InvalidParameter("StretchProgram: need at least two keyframes");
    if (frames.front().t != 0.0)
      throw InvalidParameter("StretchProgram: first keyframe must sit at t = 0");
    for (std::size_t i = 1; i < frames.size(); ++i)
      if (!(frames[i].t > frames[i - 1].t))
        throw InvalidParameter("StretchProgram: keyframe times must increase strictly");
    for (const auto& f : frames)
      if (!(f.stretch > 0.0)) throw InvalidParameter("StretchProgram: stretch must be > 0");
    return StretchProgram{std::move(frames)};
  }

  // Ramp 1 -> peak, then n_cycles of peak -> low -> peak, all at |rate|.
  static StretchProgram cyclic(double peak, double low, double rate, int n_cycles) {
    if (!(peak > low) || !(low > 0.0) || !(rate > 0.0) || n_cycles < 0)
      throw InvalidParameter("StretchProgram::cyclic: bad arguments");
    std::vector<Keyframe> f{{0.0, 1.0}};
    double t = (peak - 1.0) / rate;
    f.push_back({t, peak});
    for (int c = 0; c < n_cycles; ++c) {
      t += (peak - low) / rate;
      f.push_back({t, low});
      t += (peak - low) / rate;
      f.push_back({t, peak});
    }
    return piecewise(std::move(f));
  }

  // Slow ramp to peak, fast partial unload, then a long hold.
  static StretchProgram load_unload_hold(double peak, double load_rate, double unload_to,
                                         double unload_rate, double hold) {
    if (!(peak > 1.0) || !(load_rate > 0.0) || !(unload_rate > 0.0) || !(hold > 0.0) ||
        !(unload_to > 0.0) || !(unload_to < peak))
      throw InvalidParameter("StretchProgram::load_unload_hold: bad arguments");
    const double t1 = (peak - 1.0) / load_rate;
    const double t2 = t1 + (peak - unload_to) / unload_rate;
    return piecewise({{0.0, 1.0}, {t1, peak}, {t2, unload_to}, {t2 + hold, unload_to}});
  }
};

// Sampled trajectory of a run. Branch-indexed columns are stored flat,
// row-major; the internal states are kept for convergence studies and audits
// but never serialized.
struct TimeSeries {
  int n_branches = 1;
  std::vector<double> t;
  std::vector<Tensor2<double>> F;
  std::vector<Tensor2<double>> cauchy;
  std::vector<double> det_ci;  // rows() * n_branches
  std::vector<double> psi;
  std::vector<Tensor2<double>> ci;  // rows() * n_branches

  std::size_t rows() const { return t.size(); }
  double det_ci_at(std::size_t row, int branch) const {
    return det_ci[row * static_cast<std::size_t>(n_branches) + static_cast<std::size_t>(branch)];
  }
  const Tensor2<double>& ci_at(std::size_t row, int branch) const {
    return ci[row * static_cast<std::size_t>(n_branches) + static_cast<std::size_t>(branch)];
  }
};

namespace detail {

inline std::size_t step_count(double duration, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("run: dt must be > 0");
  if (!(duration > 0.0)) throw InvalidParameter("run: duration must be > 0");
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

inline void reserve_rows(TimeSeries& ts, std::size_t rows) {
  ts.t.reserve(rows);
  ts.F.reserve(rows);
  ts.cauchy.reserve(rows);
  ts.det_ci.reserve(rows * static_cast<std::size_t>(ts.n_branches));
  ts.psi.reserve(rows);
  ts.ci.reserve(rows * static_cast<std::size_t>(ts.n_branches));
}

}  // namespace detail

// March a single Maxwell element along a program. Row n holds t_n = n dt,
// F(t_n) and the response after the update to t_n; row 0 is the fresh state.
inline TimeSeries run(const LoadingProgram& prog, const MaxwellParams<double>& p,
                      Integrator integ, double dt, double duration = -1.0) {
  if (duration < 0.0) duration = prog.duration();
  const std::size_t n_steps = detail::step_count(duration, dt);

  TimeSeries ts;
  ts.n_branches = 1;
  detail::reserve_rows(ts, n_steps + 1);

  Tensor2<double> Ci = Tensor2<double>::identity();
  for (std::size_t n = 0; n <= n_steps; ++n) {
    const double tn = static_cast<double>(n) * dt;
    const auto kin = Kinematics<double>::from_F(prog.F(tn));
    if (n > 0) try {
        switch (integ) {
          case Integrator::ebmsc:
            Ci = ebmsc_update_raw(Ci, unimodular(kin.C), dt * p.mu / p.eta);
            break;
          case Integrator::ebm:
            Ci = ebm_update_raw(Ci, unimodular(kin.C), dt * p.mu / p.eta);
            break;
          case Integrator::em: {
            MaxwellState<double> s;  // exponential-map states stay on the manifold
            s.C_i = Ci;
            Ci = step_em(StepInput<double>(s, kin.C, dt, p)).first.C_i;
            break;
          }
        }
      } catch (const Error& e) {
        throw StepFailure("step " + std::to_string(n) + " (t = " + std::to_string(tn) +
                          "): " + e.what());
      }
    const auto stress = overstress_2pk_raw(kin, Ci, p);
    ts.t.push_back(tn);
    ts.F.push_back(kin.F);
    ts.cauchy.push_back(stress.cauchy);
    ts.det_ci.push_back(det(Ci));
    ts.psi.push_back(free_energy_ci(kin.C, Ci, p));
    ts.ci.push_back(Ci);
  }
  return ts;
}

// Same marching for the generalized model; every branch advances with the
// chosen branch integrator.
inline TimeSeries run(const LoadingProgram& prog, const GenViscParams<double>& p, double dt,
                      double duration = -1.0, BranchIntegrator integ = BranchIntegrator::ebmsc) {
  if (duration < 0.0) duration = prog.duration();
  const std::size_t n_steps = detail::step_count(duration, dt);

  TimeSeries ts;
  ts.n_branches = static_cast<int>(p.branches.size());
  detail::reserve_rows(ts, n_steps + 1);

  GenViscState<double> state = GenViscState<double>::fresh(p.branches.size());
  for (std::size_t n = 0; n <= n_steps; ++n) {
    const double tn = static_cast<double>(n) * dt;
    const auto kin = Kinematics<double>::from_F(prog.F(tn));
    if (n > 0) try {
        state = step(state, kin.C, dt, p, integ);
      } catch (const Error& e) {
        throw StepFailure("step " + std::to_string(n) + " (t = " + std::to_string(tn) +
                          "): " + e.what());
      }
    const auto stress = total_stress_result(kin, state, p);
    ts.t.push_back(tn);
    ts.F.push_back(kin.F);
    ts.cauchy.push_back(stress.cauchy);
    for (const auto& b : state.branches) {
      ts.det_ci.push_back(det(b.C_i));
      ts.ci.push_back(b.C_i);
    }
    ts.psi.push_back(total_free_energy(kin, state, p));
  }
  return ts;
}

struct ConvergenceRow {
  double dt;
  double err_ebmsc;  // max Frobenius distance of Ci to the reference, over common times
  double err_ebm;
  double err_em;
};

// Step-size study against a fine corrected-Euler-backward reference. Every
// requested dt must be an integer multiple of the reference step so states are
// compared at exactly common times. Tasks for different dt values may fan out
// over up to `threads` workers; results do not depend on the fan-out.
inline std::vector<ConvergenceRow> convergence_study(const LoadingProgram& prog,
                                                     const MaxwellParams<double>& p,
                                                     const std::vector<double>& dts,
                                                     double reference_dt, int threads = 1,
                                                     double duration = -1.0) {
  if (duration < 0.0) duration = prog.duration();
  if (!(reference_dt > 0.0))
    throw InvalidParameter("convergence_study: reference dt must be > 0");
  std::vector<std::size_t> mult(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double ratio = dts[i] / reference_dt;
    const double rounded = std::llround(ratio) > 0 ? static_cast<double>(std::llround(ratio)) : 0.0;
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
      throw GridMismatch("convergence_study: dt " + std::to_string(dts[i]) +
                         " is not an integer multiple of the reference step");
    mult[i] = static_cast<std::size_t>(rounded);
  }

  const std::size_t n_ref = detail::step_count(duration, reference_dt);
  std::vector<Tensor2<double>> ref(n_ref + 1);
  {
    Tensor2<double> Ci = Tensor2<double>::identity();
    ref[0] = Ci;
    for (std::size_t n = 1; n <= n_ref; ++n) {
      const double tn = static_cast<double>(n) * reference_dt;
      const auto kin = Kinematics<double>::from_F(prog.F(tn));
      Ci = ebmsc_update_raw(Ci, unimodular(kin.C), reference_dt * p.mu / p.eta);
      ref[n] = Ci;
    }
  }

  auto march_error = [&](double dt, std::size_t m, Integrator integ) {
    const std::size_t n_steps = detail::step_count(duration, dt);
    Tensor2<double> Ci = Tensor2<double>::identity();
    double err = 0.0;
    for (std::size_t n = 1; n <= n_steps; ++n) {
      const double tn = static_cast<double>(n) * dt;
      const auto kin = Kinematics<double>::from_F(prog.F(tn));
      switch (integ) {
        case Integrator::ebmsc:
          Ci = ebmsc_update_raw(Ci, unimodular(kin.C), dt * p.mu / p.eta);
          break;
        case Integrator::ebm:
          Ci = ebm_update_raw(Ci, unimodular(kin.C), dt * p.mu / p.eta);
          break;
        case Integrator::em: {
          MaxwellState<double> s;
          s.C_i = Ci;
          Ci = step_em(StepInput<double>(s, kin.C, dt, p)).first.C_i;
          break;
        }
      }
      if (n * m <= n_ref) err = std::max(err, norm(Ci - ref[n * m]));
    }
    return err;
  };

  std::vector<ConvergenceRow> rows(dts.size());
  auto task = [&](std::size_t i) {
    rows[i] = ConvergenceRow{dts[i], march_error(dts[i], mult[i], Integrator::ebmsc),
                             march_error(dts[i], mult[i], Integrator::ebm),
                             march_error(dts[i], mult[i], Integrator::em)};
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < dts.size(); ++i) task(i);
  } else {
    std::vector<std::future<void>> inflight;
    for (std::size_t i = 0; i < dts.size(); ++i) {
      inflight.push_back(std::async(std::launch::async, task, i));
      if (inflight.size() == static_cast<std::size_t>(threads)) {
        for (auto& f : inflight) f.get();
        inflight.clear();
      }
    }
    for (auto& f : inflight) f.get();
  }
  return rows;
}

// Uniaxial stress state driven by the axial stretch: F = diag(ax, lat, lat)
// with lat solved every step so the lateral Cauchy stress vanishes to within
// 1e-10 MPa. Safeguarded finite-difference Newton, warm-started from the
// previous step; trial updates always start from the last committed states,
// which are committed exactly once per converged step.
inline TimeSeries uniaxial_drive(const StretchProgram& prog, const GenViscParams<double>& p,
                                 double dt, double duration = -1.0,
                                 BranchIntegrator integ = BranchIntegrator::ebmsc) {
  if (duration < 0.0) duration = prog.duration();
  const std::size_t n_steps = detail::step_count(duration, dt);
  constexpr double tol = 1e-10;  // [MPa]

  TimeSeries ts;
  ts.n_branches = static_cast<int>(p.branches.size());
  detail::reserve_rows(ts, n_steps + 1);

  GenViscState<double> state = GenViscState<double>::fresh(p.branches.size());
  double lat = 1.0;

  auto record = [&](double tn, const Kinematics<double>& kin) {
    ts.t.push_back(tn);
    ts.F.push_back(kin.F);
    ts.cauchy.push_back(total_stress_result(kin, state, p).cauchy);
    for (const auto& b : state.branches) {
      ts.det_ci.push_back(det(b.C_i));
      ts.ci.push_back(b.C_i);
    }
    ts.psi.push_back(total_free_energy(kin, state, p));
  };

  record(0.0, Kinematics<double>::from_F(
                  Tensor2<double>::diag(prog.stretch(0.0), lat, lat)));

  for (std::size_t n = 1; n <= n_steps; ++n) {
    const double tn = static_cast<double>(n) * dt;
    const double ax = prog.stretch(tn);

    auto lateral = [&](double l) {
      const auto kin = Kinematics<double>::from_F(Tensor2<double>::diag(ax, l, l));
      GenViscState<double> trial = step(state, kin.C, dt, p, integ);
      const double r = total_stress_result(kin, trial, p).cauchy(1, 1);
      return std::tuple<double, GenViscState<double>, Kinematics<double>>(r, std::move(trial),
                                                                          kin);
    };

    double l = lat;
    bool done = false;
    for (int it = 0; it < 50 && !done; ++it) {
      auto [r, trial, kin] = lateral(l);
      if (std::abs(r) <= tol) {
        state = std::move(trial);
        lat = l;
        record(tn, kin);
        done = true;
        break;
      }
      const double h = 1e-7 * std::max(1.0, std::abs(l));
      const double slope = (std::get<0>(lateral(l + h)) - r) / h;
      if (!std::isfinite(slope) || slope == 0.0)
        throw LateralSolveFailure("uniaxial_drive: flat lateral residual at t = " +
                                  std::to_string(tn));
      double delta = -r / slope;
      if (delta > 0.2) delta = 0.2;
      if (delta < -0.2) delta = -0.2;
      l = std::max(l + delta, 1e-3);
    }
    if (!done)
      throw LateralSolveFailure("uniaxial_drive: no convergence after 50 iterations at t = " +
                                std::to_string(tn));
  }
  return ts;
}

// Re-run a single-element program over a list of viscosities.
inline std::vector<TimeSeries> viscosity_sweep(const LoadingProgram& prog, double mu,
                                               const std::vector<double>& etas,
                                               Integrator integ, double dt) {
  std::vector<TimeSeries> out;
  out.reserve(etas.size());
  for (const double eta : etas)
    out.push_back(run(prog, MaxwellParams<double>(mu, eta), integ, dt));
  return out;
}

}  // namespace viscostep
