#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <viscostep/viscostep.hpp>

// Command-line front end. Exit codes are contract values:
//   0 ok, 2 config error, 3 solver failure, 4 failed audit.

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string integrator;
  std::string out;
  double dt = std::nan("");
  double duration = std::nan("");
  bool audit = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--preset", o.preset,
                  "embedded preset: paper-4.1, uniaxial-cyclic, relaxation");
  cmd->add_option("--integrator", o.integrator, "ebmsc | ebm | em");
  cmd->add_option("--dt", o.dt, "time step [s]");
  cmd->add_option("--T", o.duration, "run duration [s] (default: program duration)");
  cmd->add_option("--out", o.out, "output CSV path (default: stdout)");
  cmd->add_flag("--audit", o.audit, "also run the invariant audits");
}

viscostep::RunConfig build_config(const CommonOpts& o, bool allow_zero_dt = false) {
  using viscostep::ConfigError;
  if (!o.config_path.empty() && !o.preset.empty())
    throw ConfigError("give either --config or --preset, not both");
  viscostep::RunConfig cfg;
  if (!o.config_path.empty())
    cfg = viscostep::load_config_file(o.config_path);
  else if (!o.preset.empty())
    cfg = viscostep::preset_config(o.preset);
  else
    throw ConfigError("need --config or --preset");

  if (!o.integrator.empty()) cfg.integrator = viscostep::integrator_from_string(o.integrator);
  if (!std::isnan(o.dt)) {
    // the audit accepts dt = 0 and then checks only the (trivial) initial state
    if (!(o.dt > 0.0) && !(allow_zero_dt && o.dt == 0.0))
      throw ConfigError("--dt must be > 0");
    cfg.dt = o.dt;
  }
  if (!std::isnan(o.duration)) {
    if (!(o.duration > 0.0)) throw ConfigError("--T must be > 0");
    cfg.duration = o.duration;
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (cfg.genvisc && cfg.integrator == viscostep::Integrator::ebm)
    throw ConfigError("the classical scheme is single-element only");
  return cfg;
}

int thread_cap() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("VISCOSTEP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw viscostep::ConfigError("VISCOSTEP_THREADS must be a positive integer");
    if (v < n) n = static_cast<int>(v);
  }
  return n;
}

template <class WriteFn>
void emit(const std::string& path, WriteFn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw viscostep::ConfigError("cannot open output file '" + path + "'");
  write(os);
}

int cmd_simulate(const viscostep::RunConfig& cfg, bool want_audit) {
  const viscostep::TimeSeries ts = viscostep::execute(cfg);
  emit(cfg.out, [&](std::ostream& os) { viscostep::write_csv(os, ts); });
  if (want_audit) {
    const viscostep::AuditReport rep = viscostep::audit_series(cfg, ts);
    std::cerr << rep.to_text();
    if (!rep.pass()) return 4;
  }
  return 0;
}

int cmd_converge(const viscostep::RunConfig& cfg) {
  const auto rows = viscostep::execute_converge(cfg, thread_cap());
  emit(cfg.out, [&](std::ostream& os) { viscostep::write_convergence_csv(os, rows); });
  return 0;
}

int cmd_audit(const viscostep::RunConfig& cfg) {
  const viscostep::AuditReport rep = viscostep::execute_audit(cfg);
  std::cout << rep.to_text();
  if (!cfg.out.empty())
    emit(cfg.out, [&](std::ostream& os) { os << rep.to_csv(); });
  return rep.pass() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"material-point toolkit for finite-strain viscoelasticity"};
  app.require_subcommand(1);

  CommonOpts sim_opts, conv_opts, audit_opts;
  CLI::App* sim =
      app.add_subcommand("simulate", "march a program and emit the time series as CSV");
  add_common(sim, sim_opts);
  CLI::App* conv =
      app.add_subcommand("converge", "step-size study against the fine reference");
  add_common(conv, conv_opts);
  CLI::App* aud = app.add_subcommand("audit", "run the invariant audit suite");
  add_common(aud, audit_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;  // bad flags are config errors
  }

  try {
    if (sim->parsed()) return cmd_simulate(build_config(sim_opts), sim_opts.audit);
    if (conv->parsed()) return cmd_converge(build_config(conv_opts));
    return cmd_audit(build_config(audit_opts, /*allow_zero_dt=*/true));
  } catch (const viscostep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const viscostep::GridMismatch& e) {
    // a dt list that does not sit on the reference grid is a config problem
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const viscostep::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
}
