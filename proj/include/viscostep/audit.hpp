#pragma once

#include <random>
#include <sstream>
#include <string>

#include "driver.hpp"
#include "tangent.hpp"

// Invariant audits over a finished run: determinant preservation, SPD of the
// internal states, invariance under an isochoric change of the reference
// configuration, tangent symmetry plus finite-difference agreement, and
// free-energy monotonicity under relaxation. Probes are seeded, so a report
// is reproducible bit for bit.

namespace viscostep {

struct AuditReport {
  double max_det_drift = 0.0;
  bool spd_ok = true;
  double invariance_defect = 0.0;
  double tangent_symmetric_defect = 0.0;
  double fd_tangent_max_rel = 0.0;
  bool energy_monotone = true;

  static constexpr double det_tol = 1e-12;
  static constexpr double invariance_tol = 1e-12;
  static constexpr double tangent_sym_tol = 1e-10;
  static constexpr double fd_tol = 1e-5;

  bool det_pass() const { return max_det_drift <= det_tol; }
  bool invariance_pass() const { return invariance_defect <= invariance_tol; }
  bool tangent_sym_pass() const { return tangent_symmetric_defect <= tangent_sym_tol; }
  bool fd_pass() const { return fd_tangent_max_rel <= fd_tol; }
  bool pass() const {
    return det_pass() && spd_ok && invariance_pass() && tangent_sym_pass() && fd_pass() &&
           energy_monotone;
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific;
    auto line = [&os](const char* name, double measured, double tol, bool ok) {
      os << (ok ? "[pass] " : "[FAIL] ") << name << ": measured " << measured << " (tolerance "
         << tol << ")\n";
    };
    line("det drift   max |det Ci - 1|", max_det_drift, det_tol, det_pass());
    os << (spd_ok ? "[pass] " : "[FAIL] ") << "SPD         all internal states\n";
    line("invariance  reference change", invariance_defect, invariance_tol, invariance_pass());
    line("tangent     symmetry defect", tangent_symmetric_defect, tangent_sym_tol,
         tangent_sym_pass());
    line("tangent     FD agreement", fd_tangent_max_rel, fd_tol, fd_pass());
    os << (energy_monotone ? "[pass] " : "[FAIL] ")
       << "energy      relaxation monotonicity\n";
    os << (pass() ? "audit: all checks passed\n" : "audit: CHECKS FAILED\n");
    return os.str();
  }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "check,measured,tolerance,pass\n";
    os << "det_drift," << max_det_drift << "," << det_tol << "," << det_pass() << "\n";
    os << "spd,," << "," << spd_ok << "\n";
    os << "invariance," << invariance_defect << "," << invariance_tol << ","
       << invariance_pass() << "\n";
    os << "tangent_symmetry," << tangent_symmetric_defect << "," << tangent_sym_tol << ","
       << tangent_sym_pass() << "\n";
    os << "tangent_fd," << fd_tangent_max_rel << "," << fd_tol << "," << fd_pass() << "\n";
    os << "energy_monotone,,," << energy_monotone << "\n";
    return os.str();
  }
};

namespace detail {

inline Tensor2<double> random_unimodular(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (;;) {
    Tensor2<double> g = Tensor2<double>::identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) += u(rng);
    if (det(g) > 0.2) return unimodular(g);
  }
}

// One-step map of the chosen scheme, on raw tensors; EM probes run at a
// tightened tolerance so the stopping rule cannot mask the invariance.
inline Tensor2<double> probe_update(Integrator integ, const Tensor2<double>& Ci,
                                    const Tensor2<double>& C, double dt,
                                    const MaxwellParams<double>& p) {
  const double k = dt * p.mu / p.eta;
  switch (integ) {
    case Integrator::ebmsc:
      return ebmsc_update_raw(Ci, unimodular(C), k);
    case Integrator::ebm:
      return ebm_update_raw(Ci, unimodular(C), k);
    case Integrator::em:
    default: {
      MaxwellState<double> s;
      s.C_i = unimodular(symmetrize(Ci));
      return step_em(StepInput<double>(s, C, dt, p), 1e-14, 300).first.C_i;
    }
  }
}

// Relative defect of N(G C G^T, G Ci G^T) = G N(C, Ci) G^T for unimodular G.
inline double invariance_defect_probe(Integrator integ, const Tensor2<double>& C,
                                      const Tensor2<double>& Ci, double dt,
                                      const MaxwellParams<double>& p, std::mt19937& rng) {
  const Tensor2<double> G = random_unimodular(rng);
  const Tensor2<double> lhs =
      probe_update(integ, symmetrize(G * Ci * transpose(G)), symmetrize(G * C * transpose(G)),
                   dt, p);
  const Tensor2<double> rhs =
      symmetrize(G * probe_update(integ, Ci, C, dt, p) * transpose(G));
  return norm(lhs - rhs) / std::max(norm(rhs), 1e-30);
}

// Max action-wise relative deviation between two tangent operators over the
// six symmetric directions, normalized by the largest analytic action.
inline double tangent_action_rel_error(const Tensor4<double>& analytic,
                                       const Tensor4<double>& reference) {
  double scale = 0.0;
  double err = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      Tensor2<double> E;
      E(a, b) = 1.0;
      E(b, a) = 1.0;
      const Tensor2<double> da = contract(analytic, E);
      scale = std::max(scale, norm(da));
      err = std::max(err, norm(da - contract(reference, E)));
    }
  return err / std::max(scale, 1e-30);
}

// Single-branch audit probes at one sampled (C, Ci) pair.
struct ProbeAccumulator {
  AuditReport* rep;
  std::mt19937* rng;

  void operator()(const Tensor2<double>& C, const Tensor2<double>& Ci_raw, double dt,
                  const MaxwellParams<double>& p, Integrator integ) const {
    AuditReport& r = *rep;

    for (int n = 0; n < 2; ++n)
      r.invariance_defect = std::max(
          r.invariance_defect, invariance_defect_probe(integ, C, Ci_raw, dt, p, *rng));

    // Tangent checks are defined for the corrected closed-form update, so an
    // off-manifold state (classical scheme) is projected first.
    MaxwellState<double> s;
    s.C_i = unimodular(symmetrize(Ci_raw));
    const auto tan = consistent_tangent(C, s, p, dt);
    r.tangent_symmetric_defect = std::max(r.tangent_symmetric_defect, tan.symmetric_defect);
    const auto map = [&](const Tensor2<double>& Cp) {
      const double k = dt * p.mu / p.eta;
      const Tensor2<double> Ci1 = ebmsc_update_raw(s.C_i, unimodular(Cp), k);
      return Tensor2<double>(symmetrize(inv(Cp) * dev(unimodular(Cp) * inv(Ci1)) * p.mu));
    };
    const Tensor4<double> fd = fd_tangent<double>(map, C, 1e-6 * std::max(1.0, norm(C)));
    r.fd_tangent_max_rel =
        std::max(r.fd_tangent_max_rel, tangent_action_rel_error(tan.dT_dC, fd));

    // Relaxation from this state: one corrected step, energy non-increasing in dt.
    const Tensor2<double> Cbar = unimodular(C);
    double prev = free_energy_ci(C, s.C_i, p);
    for (int j = 0; j <= 40; ++j) {
      const double dtj = std::pow(10.0, -3.0 + 6.0 * j / 40.0) * p.eta / p.mu;
      const double psi = free_energy_ci(C, ebmsc_update_raw(s.C_i, Cbar, dtj * p.mu / p.eta), p);
      if (psi > prev + 1e-12 * (1.0 + std::abs(prev))) r.energy_monotone = false;
      prev = psi;
    }
  }
};

inline std::vector<std::size_t> sample_rows(std::size_t rows, std::size_t want) {
  std::vector<std::size_t> out;
  if (rows == 0) return out;
  const std::size_t n = std::min(rows, want);
  for (std::size_t j = 0; j < n; ++j) out.push_back(j * (rows - 1) / (n > 1 ? n - 1 : 1));
  return out;
}

}  // namespace detail

// Audit of a single-element run.
inline AuditReport audit_run(const TimeSeries& ts, const MaxwellParams<double>& p,
                             Integrator integ, double dt, unsigned seed = 20u) {
  AuditReport rep;
  for (std::size_t r = 0; r < ts.rows(); ++r)
    for (int b = 0; b < ts.n_branches; ++b) {
      rep.max_det_drift = std::max(rep.max_det_drift, std::abs(ts.det_ci_at(r, b) - 1.0));
      if (!is_spd(ts.ci_at(r, b))) rep.spd_ok = false;
    }
  std::mt19937 rng(seed);
  detail::ProbeAccumulator probe{&rep, &rng};
  for (const std::size_t r : detail::sample_rows(ts.rows(), 8)) {
    const auto kin = Kinematics<double>::from_F(ts.F[r]);
    probe(kin.C, ts.ci_at(r, 0), dt, p, integ);
  }
  return rep;
}

// Audit of a generalized-model run: the global state columns feed the det/SPD
// checks, and each branch is probed with its own parameters.
inline AuditReport audit_run(const TimeSeries& ts, const GenViscParams<double>& p,
                             BranchIntegrator integ, double dt, unsigned seed = 20u) {
  if (static_cast<std::size_t>(ts.n_branches) != p.branches.size())
    throw InvalidParameter("audit_run: series/parameter branch count mismatch");
  AuditReport rep;
  for (std::size_t r = 0; r < ts.rows(); ++r)
    for (int b = 0; b < ts.n_branches; ++b) {
      rep.max_det_drift = std::max(rep.max_det_drift, std::abs(ts.det_ci_at(r, b) - 1.0));
      if (!is_spd(ts.ci_at(r, b))) rep.spd_ok = false;
    }
  std::mt19937 rng(seed);
  detail::ProbeAccumulator probe{&rep, &rng};
  const Integrator single =
      integ == BranchIntegrator::ebmsc ? Integrator::ebmsc : Integrator::em;
  for (const std::size_t r : detail::sample_rows(ts.rows(), 4)) {
    const auto kin = Kinematics<double>::from_F(ts.F[r]);
    for (int b = 0; b < ts.n_branches; ++b)
      probe(kin.C, ts.ci_at(r, b), dt, p.branches[static_cast<std::size_t>(b)], single);
  }
  return rep;
}

}  // namespace viscostep
