#include "ptc/io/cli.hpp"

#include <cstdio>
#include <optional>

#include <CLI11.hpp>

#include "ptc/errors.hpp"
#include "ptc/io/report.hpp"
#include "ptc/io/svg_plot.hpp"
#include "ptc/io/trace_csv.hpp"

namespace ptc::io {
namespace {

struct Prepared {
  Scenario scenario;
  SystemMatrices system;
  SynthesisResult synthesis;
};

Prepared prepare(const RunConfig& cfg) {
  Prepared p{build_scenario(cfg, sensor_seed()), {}, {}};
  const Scenario& sc = p.scenario;
  p.system = build_system_matrices(sc.fleet.order, sc.topology, sc.feedback_gain, sc.observer_gain,
                                   sc.fleet.follower_growth_rates());
  switch (cfg.mode) {
    case SynthesisMode::StateFeedback:
      p.synthesis = synthesize_state_feedback(p.system, cfg.kappa, cfg.horizon);
      break;
    case SynthesisMode::OutputFeedback:
      p.synthesis = synthesize_output_feedback(p.system, {.kappa_a = cfg.kappa,
                                                          .c1 = cfg.c1,
                                                          .horizon = cfg.horizon,
                                                          .dtheta = sc.dtheta,
                                                          .pc_margin = cfg.pc_margin});
      break;
    case SynthesisMode::Practical:
      p.synthesis = synthesize_practical(p.system, {.t_f = cfg.t_f,
                                                    .delta = cfg.delta,
                                                    .kappa_a = cfg.kappa,
                                                    .kappa_margin = cfg.kappa_margin,
                                                    .c1 = cfg.c1,
                                                    .dtheta = sc.dtheta,
                                                    .pc_margin = cfg.pc_margin});
      break;
  }
  return p;
}

void print_value(std::ostream& out, const char* name, double v) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "  %-28s %.6g\n", name, v);
  out << buf;
}

}  // namespace

int run_synth(const RunConfig& cfg, bool write_files, std::ostream& out) {
  const Prepared p = prepare(cfg);
  print_synthesis_summary(out, p.synthesis);
  if (write_files) {
    write_synthesis_report(p.system, p.synthesis, cfg.output_dir / "synthesis.json");
    write_matrix_csv(p.synthesis.lyap_controller, cfg.output_dir / "P_c.csv");
    if (p.synthesis.lyap_observer.size() > 0) write_matrix_csv(p.synthesis.lyap_observer, cfg.output_dir / "P_0.csv");
    out << "wrote " << (cfg.output_dir / "synthesis.json").string() << "\n";
  }
  return p.synthesis.all_certificates_pass() ? kExitPass : kExitViolation;
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
  const Prepared p = prepare(cfg);
  print_synthesis_summary(out, p.synthesis);
  const int n = p.scenario.fleet.order;
  const GainSchedule schedule = cfg.mode == SynthesisMode::Practical
                                    ? GainSchedule::practical(cfg.t_f, cfg.delta, p.synthesis.b, n)
                                    : GainSchedule::exact(cfg.horizon, p.synthesis.b, n);
  const Protocol protocol =
      cfg.mode == SynthesisMode::StateFeedback ? Protocol::StateFeedback : Protocol::OutputFeedback;
  const ClosedLoop loop{p.scenario.fleet, p.scenario.topology, p.scenario.feedback_gain, p.scenario.observer_gain,
                        schedule, protocol};

  SimTrace trace = integrate(loop, p.system, p.synthesis, cfg.sim);
  const DecayReport decay = monitor_lyapunov_decay(trace, p.synthesis, schedule, cfg.tol_rel);
  const TrackingReport tracking = monitor_tracking_bound(trace, p.synthesis, schedule);

  emit_trace_csv(trace, cfg.output_dir);
  write_synthesis_report(p.system, p.synthesis, cfg.output_dir / "synthesis.json");
  if (cfg.plots) emit_plots_svg(trace, cfg.output_dir);

  out << "simulation:\n";
  print_value(out, "RK4 steps", static_cast<double>(trace.steps));
  print_value(out, "samples", static_cast<double>(trace.times.size()));
  print_value(out, "final time", trace.times.back());
  print_value(out, "final max |x_k - x_0|", max_tracking_error(trace, trace.times.back()));
  if (protocol == Protocol::OutputFeedback) {
    print_value(out, "final max |xh_k - xh_0|", max_tracking_error(trace, trace.times.back(), true));
  }
  if (decay.evaluated) {
    print_value(out, "decay monitor tau1", decay.tau1);
    print_value(out, "decay monitor rate", decay.kappa);
    print_value(out, "decay monitor ln M", decay.log_overshoot);
    out << "  decay monitor              " << (decay.passed ? "ok" : "VIOLATED") << " (" << decay.violations
        << " samples)\n";
  } else {
    out << "  decay monitor              skipped (growth rates unknown)\n";
  }
  out << "  tracking bound             " << (tracking.passed ? "ok" : "VIOLATED") << " (" << tracking.violations
      << " samples)\n";
  if (schedule.mode() == GainMode::Practical) {
    print_value(out, "error at t_f", tracking.residual_error);
    print_value(out, "residual radius", tracking.residual_radius);
  }
  out << "wrote " << cfg.output_dir.string() << "\n";
  const bool ok = trace.violations.empty() && p.synthesis.all_certificates_pass();
  return ok ? kExitPass : kExitViolation;
}

int run_verify(const std::string& report_path, std::ostream& out) {
  const StoredSynthesis stored = read_synthesis_report(report_path);
  const VerifyOutcome v = verify_synthesis(stored);
  for (const Certificate& c : stored.result.certificates) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-28s %+.3e  tol %.1e\n", c.name.c_str(), c.lambda_max, c.tolerance);
    out << buf;
  }
  for (const auto& f : v.failures) out << "FAIL " << f << "\n";
  out << (v.passed ? "all certificates verified\n" : "verification failed\n");
  return v.passed ? kExitPass : kExitViolation;
}

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prescribed-time leader-following consensus: gain synthesis and simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string mode_name;
  bool no_plots = false;
  std::string report_path;

  auto* synth = app.add_subcommand("synth", "Synthesize gains and print the certificate table");
  synth->add_option("--config", config_path, "Run configuration (YAML)")->required();
  synth->add_option("--out", out_dir, "Directory for synthesis.json and P matrices");
  synth->add_option("--mode", mode_name, "Override mode: state_feedback, output_feedback, practical");

  auto* simulate = app.add_subcommand("simulate", "Synthesize, integrate, run monitors, write CSV and plots");
  simulate->add_option("--config", config_path, "Run configuration (YAML)")->required();
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--mode", mode_name, "Override mode");
  simulate->add_flag("--no-plots", no_plots, "Skip SVG output");

  auto* verify = app.add_subcommand("verify", "Re-check the certificates stored in a synthesis report");
  verify->add_option("report", report_path, "synthesis.json")->required();

  auto* demo = app.add_subcommand("demo-manipulators", "Five-manipulator example end to end");
  demo->add_option("--out", out_dir, "Output directory");
  demo->add_flag("--no-plots", no_plots, "Skip SVG output");

  std::vector<std::string> argv_store{"ptconsensus"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    auto load = [&]() {
      RunConfig cfg = parse_config(config_path);
      if (!mode_name.empty()) {
        const auto m = parse_mode(mode_name);
        if (!m) throw Error(ErrorCode::ValidationError, "--mode: unknown value '" + mode_name + "'");
        cfg.mode = *m;
        validate_config(cfg);
      }
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (no_plots) cfg.plots = false;
      return cfg;
    };
    if (synth->parsed()) return run_synth(load(), !out_dir.empty(), out);
    if (simulate->parsed()) return run_simulate(load(), out);
    if (verify->parsed()) return run_verify(report_path, out);
    if (demo->parsed()) {
      RunConfig cfg = demo_config();
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (no_plots) cfg.plots = false;
      return run_simulate(cfg, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace ptc::io
