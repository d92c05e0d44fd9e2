#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "audit.hpp"
#include "csv.hpp"

// JSON run configuration: material / program / run blocks, schema-validated
// with unknown keys rejected. The named presets ship embedded so the bundled
// experiments run without any authored config. Units are MPa and s.

namespace viscostep {

struct RunConfig {
  enum class ProgramKind { deformation, uniaxial };

  ProgramKind kind = ProgramKind::deformation;
  bool genvisc = false;
  MaxwellParams<double> maxwell = MaxwellParams<double>(40.0, 400.0);
  GenViscParams<double> gen = GenViscParams<double>::benchmark();
  LoadingProgram program;
  StretchProgram stretch;
  Integrator integrator = Integrator::ebmsc;
  double dt = 0.1;
  double duration = -1.0;   // negative: full program duration
  std::string out;          // empty: stdout
  std::vector<double> dts;  // convergence studies
  double reference_dt = 1e-3;
};

inline Integrator integrator_from_string(const std::string& s) {
  if (s == "ebmsc") return Integrator::ebmsc;
  if (s == "ebm") return Integrator::ebm;
  if (s == "em") return Integrator::em;
  throw ConfigError("unknown integrator '" + s + "' (expected ebmsc, ebm or em)");
}

inline const char* to_string(Integrator i) {
  switch (i) {
    case Integrator::ebmsc: return "ebmsc";
    case Integrator::ebm: return "ebm";
    default: return "em";
  }
}

// Embedded presets.
//  - "paper-4.1": single Maxwell element (mu 40, eta 400) on the 300 s
//    tension/shear benchmark path; the dt = 0.001 run is the study reference.
//  - "uniaxial-cyclic": generalized model, stress-free lateral faces, ramp to
//    stretch 2 then three cycles between 2 and 1.6 at 1.5 1/s (one step per
//    0.01 of stretch).
//  - "relaxation": generalized model, slow ramp to stretch 2 at 0.005 1/s,
//    fast partial unload to 1.5 at 1.5 1/s, then a 500 s hold
//    (5 x the longest relaxation time).
inline RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  if (name == "paper-4.1") {
    cfg.kind = RunConfig::ProgramKind::deformation;
    cfg.genvisc = false;
    cfg.maxwell = MaxwellParams<double>(40.0, 400.0);
    cfg.program = LoadingProgram::tension_shear_benchmark();
    cfg.integrator = Integrator::ebmsc;
    cfg.dt = 0.1;
    cfg.dts = {1.0, 0.5, 0.25, 0.125};
    cfg.reference_dt = 1e-3;
    return cfg;
  }
  if (name == "uniaxial-cyclic") {
    cfg.kind = RunConfig::ProgramKind::uniaxial;
    cfg.genvisc = true;
    cfg.stretch = StretchProgram::cyclic(2.0, 1.6, 1.5, 3);
    cfg.dt = 0.01 / 1.5;
    return cfg;
  }
  if (name == "relaxation") {
    cfg.kind = RunConfig::ProgramKind::uniaxial;
    cfg.genvisc = true;
    cfg.stretch = StretchProgram::load_unload_hold(2.0, 0.005, 1.5, 1.5, 500.0);
    cfg.dt = 1.0 / 30.0;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name +
                    "' (expected paper-4.1, uniaxial-cyclic or relaxation)");
}

namespace detail {

inline void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

inline double number(const nlohmann::json& j, const char* where) {
  if (!j.is_number()) throw ConfigError(std::string(where) + ": expected a number");
  return j.get<double>();
}

inline void parse_material(const nlohmann::json& j, RunConfig& cfg) {
  require_keys(j, {"type", "mu", "eta", "c10", "c20", "c30", "bulk", "branches"},
               "material");
  const std::string type = j.value("type", cfg.genvisc ? "genvisc" : "maxwell");
  if (type == "maxwell") {
    cfg.genvisc = false;
    cfg.maxwell = MaxwellParams<double>(number(j.at("mu"), "material.mu"),
                                        number(j.at("eta"), "material.eta"));
  } else if (type == "genvisc") {
    cfg.genvisc = true;
    GenViscParams<double> base = GenViscParams<double>::benchmark();
    const double c10 = j.contains("c10") ? number(j.at("c10"), "material.c10") : base.c10;
    const double c20 = j.contains("c20") ? number(j.at("c20"), "material.c20") : base.c20;
    const double c30 = j.contains("c30") ? number(j.at("c30"), "material.c30") : base.c30;
    const double bulk = j.contains("bulk") ? number(j.at("bulk"), "material.bulk") : base.k;
    std::vector<MaxwellParams<double>> branches = base.branches;
    if (j.contains("branches")) {
      if (!j.at("branches").is_array() || j.at("branches").empty())
        throw ConfigError("material.branches: expected a non-empty array");
      branches.clear();
      for (const auto& b : j.at("branches")) {
        require_keys(b, {"mu", "eta"}, "material.branches[]");
        branches.emplace_back(number(b.at("mu"), "branch mu"), number(b.at("eta"), "branch eta"));
      }
    }
    cfg.gen = GenViscParams<double>(c10, c20, c30, bulk, std::move(branches));
  } else {
    throw ConfigError("material.type: expected 'maxwell' or 'genvisc'");
  }
}

inline Tensor2<double> parse_tensor(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.size() != 9)
    throw ConfigError(std::string(where) + ": expected an array of 9 numbers (row-major)");
  Tensor2<double> F;
  for (int i = 0; i < 9; ++i) F.v[i] = number(j.at(i), where);
  return F;
}

inline void parse_program(const nlohmann::json& j, RunConfig& cfg) {
  require_keys(j, {"preset", "keyframes", "unimodular", "stretch_keyframes"}, "program");
  const int given = static_cast<int>(j.contains("preset")) +
                    static_cast<int>(j.contains("keyframes")) +
                    static_cast<int>(j.contains("stretch_keyframes"));
  if (given != 1)
    throw ConfigError("program: give exactly one of preset, keyframes, stretch_keyframes");

  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw ConfigError("program.preset: expected a string");
    cfg = preset_config(j.at("preset").get<std::string>());
    return;
  }
  if (j.contains("keyframes")) {
    std::vector<LoadingProgram::Keyframe> frames;
    for (const auto& f : j.at("keyframes")) {
      require_keys(f, {"t", "F"}, "program.keyframes[]");
      frames.push_back({number(f.at("t"), "keyframe t"), parse_tensor(f.at("F"), "keyframe F")});
    }
    cfg.kind = RunConfig::ProgramKind::deformation;
    cfg.program = LoadingProgram::piecewise(std::move(frames), j.value("unimodular", false));
    return;
  }
  if (j.contains("unimodular"))
    throw ConfigError("program.unimodular: only valid with keyframes");
  std::vector<StretchProgram::Keyframe> frames;
  for (const auto& f : j.at("stretch_keyframes")) {
    require_keys(f, {"t", "stretch"}, "program.stretch_keyframes[]");
    frames.push_back({number(f.at("t"), "keyframe t"), number(f.at("stretch"), "keyframe stretch")});
  }
  cfg.kind = RunConfig::ProgramKind::uniaxial;
  cfg.stretch = StretchProgram::piecewise(std::move(frames));
}

inline void parse_run(const nlohmann::json& j, RunConfig& cfg) {
  require_keys(j, {"integrator", "dt", "T", "out", "dts", "reference_dt"}, "run");
  if (j.contains("integrator")) {
    if (!j.at("integrator").is_string()) throw ConfigError("run.integrator: expected a string");
    cfg.integrator = integrator_from_string(j.at("integrator").get<std::string>());
  }
  if (j.contains("dt")) {
    cfg.dt = number(j.at("dt"), "run.dt");
    if (!(cfg.dt > 0.0)) throw ConfigError("run.dt: must be > 0");
  }
  if (j.contains("T")) {
    cfg.duration = number(j.at("T"), "run.T");
    if (!(cfg.duration > 0.0)) throw ConfigError("run.T: must be > 0");
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw ConfigError("run.out: expected a string");
    cfg.out = j.at("out").get<std::string>();
  }
  if (j.contains("dts")) {
    if (!j.at("dts").is_array() || j.at("dts").empty())
      throw ConfigError("run.dts: expected a non-empty array of numbers");
    cfg.dts.clear();
    for (const auto& d : j.at("dts")) cfg.dts.push_back(number(d, "run.dts[]"));
  }
  if (j.contains("reference_dt")) {
    cfg.reference_dt = number(j.at("reference_dt"), "run.reference_dt");
    if (!(cfg.reference_dt > 0.0)) throw ConfigError("run.reference_dt: must be > 0");
  }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  detail::require_keys(j, {"material", "program", "run"}, "config");
  if (!j.contains("program")) throw ConfigError("config: missing program block");
  RunConfig cfg;
  try {
    detail::parse_program(j.at("program"), cfg);
    if (j.contains("material")) detail::parse_material(j.at("material"), cfg);
    if (j.contains("run")) detail::parse_run(j.at("run"), cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());  // parameter/program validation counts as config error
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());  // missing/mistyped keys
  }
  if (cfg.kind == RunConfig::ProgramKind::uniaxial && !cfg.genvisc)
    throw ConfigError("config: stretch-driven programs need the generalized material");
  if (cfg.genvisc && cfg.integrator == Integrator::ebm)
    throw ConfigError("config: the classical scheme is single-element only");
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse: " + std::string(e.what()));
  }
  return parse_config(j);
}

inline BranchIntegrator branch_integrator(const RunConfig& cfg) {
  return cfg.integrator == Integrator::em ? BranchIntegrator::em : BranchIntegrator::ebmsc;
}

// Orchestration used by the CLI (and handy in tests).
inline TimeSeries execute(const RunConfig& cfg) {
  if (cfg.kind == RunConfig::ProgramKind::uniaxial)
    return uniaxial_drive(cfg.stretch, cfg.gen, cfg.dt, cfg.duration, branch_integrator(cfg));
  if (cfg.genvisc)
    return run(cfg.program, cfg.gen, cfg.dt, cfg.duration, branch_integrator(cfg));
  return run(cfg.program, cfg.maxwell, cfg.integrator, cfg.dt, cfg.duration);
}

// The t = 0 row alone: lets the audit evaluate the dt = 0 limit, where every
// update is the identity map and a march would record nothing new.
inline TimeSeries initial_state_series(const RunConfig& cfg) {
  const Tensor2<double> F0 = cfg.kind == RunConfig::ProgramKind::uniaxial
                                 ? Tensor2<double>::diag(cfg.stretch.stretch(0.0), 1.0, 1.0)
                                 : cfg.program.F(0.0);
  const auto kin = Kinematics<double>::from_F(F0);

  TimeSeries ts;
  ts.t.push_back(0.0);
  ts.F.push_back(kin.F);
  if (cfg.genvisc) {
    const auto state = GenViscState<double>::fresh(cfg.gen.branches.size());
    ts.n_branches = static_cast<int>(cfg.gen.branches.size());
    ts.cauchy.push_back(total_stress_result(kin, state, cfg.gen).cauchy);
    for (const auto& b : state.branches) {
      ts.det_ci.push_back(det(b.C_i));
      ts.ci.push_back(b.C_i);
    }
    ts.psi.push_back(total_free_energy(kin, state, cfg.gen));
  } else {
    const MaxwellState<double> s;
    ts.n_branches = 1;
    ts.cauchy.push_back(overstress_2pk(kin, s, cfg.maxwell).cauchy);
    ts.det_ci.push_back(det(s.C_i));
    ts.ci.push_back(s.C_i);
    ts.psi.push_back(free_energy(kin, s, cfg.maxwell));
  }
  return ts;
}

inline std::vector<ConvergenceRow> execute_converge(const RunConfig& cfg, int threads = 1) {
  if (cfg.kind != RunConfig::ProgramKind::deformation || cfg.genvisc)
    throw ConfigError("converge: needs a single-element deformation program");
  if (cfg.dts.size() < 2) throw ConfigError("converge: needs at least two dts");
  return convergence_study(cfg.program, cfg.maxwell, cfg.dts, cfg.reference_dt, threads,
                           cfg.duration);
}

inline AuditReport audit_series(const RunConfig& cfg, const TimeSeries& ts) {
  if (cfg.kind == RunConfig::ProgramKind::uniaxial || cfg.genvisc)
    return audit_run(ts, cfg.gen, branch_integrator(cfg), cfg.dt);
  return audit_run(ts, cfg.maxwell, cfg.integrator, cfg.dt);
}

inline AuditReport execute_audit(const RunConfig& cfg) {
  return audit_series(cfg, cfg.dt == 0.0 ? initial_state_series(cfg) : execute(cfg));
}

}  // namespace viscostep
