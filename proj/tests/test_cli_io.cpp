#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptc/errors.hpp"
#include "ptc/io/cli.hpp"
#include "ptc/io/config.hpp"
#include "ptc/io/report.hpp"
#include "ptc/io/svg_plot.hpp"
#include "ptc/io/trace_csv.hpp"
#include "support/test_support.hpp"

using namespace ptc;
using namespace ptc::io;
using ptc::test::code_of;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ptc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

// Three double integrators, short horizon and coarse step: a run takes milliseconds.
const char* kQuickConfig = R"(
mode: state_feedback
agents:
  order: 2
  list:
    - {kind: linear, x0: [0.5, 0.0]}
    - {kind: linear, x0: [1.0, -1.0]}
    - {kind: linear, x0: [-2.0, 0.5]}
    - {kind: linear, x0: [3.0, 1.0]}
graph:
  adjacency: [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
  pinning: [1, 0, 1]
gains:
  K: [1, 2]
  T: 1.0
sim:
  h_max: 1.0e-3
  eps_stop: 1.0e-2
  output_stride: 10
)";

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

SimTrace quick_trace() {
  const RunConfig cfg = parse_config_text(kQuickConfig);
  const Scenario sc = build_scenario(cfg, 0);
  const SystemMatrices sys = build_system_matrices(sc.fleet.order, sc.topology, sc.feedback_gain, sc.observer_gain,
                                                   sc.fleet.follower_growth_rates());
  const SynthesisResult synth = synthesize_state_feedback(sys, cfg.kappa, cfg.horizon);
  const ClosedLoop loop{sc.fleet, sc.topology, sc.feedback_gain, sc.observer_gain,
                        GainSchedule::exact(cfg.horizon, synth.b, sc.fleet.order), Protocol::StateFeedback};
  return integrate(loop, sys, synth, cfg.sim);
}

}  // namespace

TEST_CASE("shipped practical config") {
  const RunConfig cfg = parse_config(fs::path(PTC_SOURCE_DIR) / "configs" / "manipulators.cfg");
  CHECK(cfg.mode == SynthesisMode::Practical);
  CHECK(cfg.t_f == 1.98);
  CHECK(cfg.delta == 0.02);
  CHECK(cfg.preset == "manipulators");
  CHECK(cfg.sim.t_end == 10.0);
  REQUIRE(cfg.feedback_gain);
  CHECK((*cfg.feedback_gain)(1) == 9.0);
}

TEST_CASE("every shipped config parses") {
  for (const char* name : {"manipulators.cfg", "manipulators_exact.cfg", "double_integrators.cfg"}) {
    INFO(name);
    CHECK_NOTHROW(parse_config(fs::path(PTC_SOURCE_DIR) / "configs" / name));
  }
}

TEST_CASE("config validation") {
  CHECK(code_of([] { parse_config_text(""); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config_text("mode: [unclosed"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config_text("mode: sideways\nagents: {preset: manipulators}\n"); }) ==
        ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config_text("mode: output_feedback\nagents: {preset: manipulators}\nbogus: 1\n"); }) ==
        ErrorCode::ValidationError);
  try {
    parse_config_text("mode: output_feedback\nagents: {preset: manipulators}\ngains: {K: [1, 2, 3], T: 2}\n");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("gains.K") != std::string::npos);
  }
  try {
    parse_config_text("mode: output_feedback\nagents: {preset: manipulators}\ngains: {T: 2}\nsim: {h_max: -1}\n");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sim.h_max") != std::string::npos);
  }
}

TEST_CASE("parse errors carry a line number") {
  try {
    parse_config_text("mode: practical\ngains:\n  K: [1, 2\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("random sensor amplitudes are reproducible per seed") {
  const std::string text = std::string(kQuickConfig) + "\n";
  RunConfig cfg = parse_config_text(text);
  cfg.random_sensor_amplitude = 0.1;
  const Scenario a = build_scenario(cfg, 5);
  const Scenario b = build_scenario(cfg, 5);
  const Scenario c = build_scenario(cfg, 6);
  CHECK(a.dtheta == b.dtheta);
  CHECK(a.dtheta != c.dtheta);
  CHECK(a.dtheta < 0.1);
}

TEST_CASE("doubles round trip through text") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(ptc::test::uniform(rng, -1.0, 1.0), std::uniform_int_distribution<int>(-300, 300)(rng));
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(std::isinf(parse_double(format_double(std::numeric_limits<double>::infinity()))));
  CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
}

TEST_CASE("trace CSV round trip") {
  const SimTrace trace = quick_trace();
  const fs::path dir = scratch_dir("csv");
  emit_trace_csv(trace, dir);
  CHECK(count_lines(dir / "states.csv") == 1 + trace.times.size() * 4);
  CHECK(count_lines(dir / "lyapunov.csv") == 1 + trace.times.size());

  const SimTrace back = read_trace_csv(dir);
  REQUIRE(back.times.size() == trace.times.size());
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    CHECK(back.times[i] == trace.times[i]);
    CHECK((back.states[i] - trace.states[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.inputs[i] - trace.inputs[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.lyapunov[i] == trace.lyapunov[i]);
  }
}

TEST_CASE("empty trace writes headers only") {
  SimTrace empty;
  empty.order = 2;
  empty.followers = 3;
  const fs::path dir = scratch_dir("empty");
  emit_trace_csv(empty, dir);
  CHECK(count_lines(dir / "states.csv") == 1);
  CHECK(read_file(dir / "states.csv").rfind("t,agent,x1,x2,xhat1,xhat2,u", 0) == 0);
  CHECK(code_of([&] { emit_plots_svg(empty, dir); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("plots") {
  SimTrace trace = quick_trace();
  const fs::path dir = scratch_dir("svg");
  emit_plots_svg(trace, dir);
  for (const char* stem : {"states", "inputs", "observer_errors", "lyapunov"}) {
    const std::string svg = read_file(dir / (std::string(stem) + ".svg"));
    INFO(stem);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }

  SimTrace single = trace;
  single.times.resize(1);
  single.states.resize(1);
  single.estimates.resize(1);
  single.inputs.resize(1);
  single.primary.resize(1);
  single.observer_error.resize(1);
  single.lyapunov.resize(1);
  single.envelope.resize(1);
  for (const PlotSpec& spec : build_plots(single)) {
    const std::string svg = render_svg(spec);
    CHECK(svg.find("nan") == std::string::npos);
  }
}

TEST_CASE("lyapunov plot carries the envelope above V") {
  const RunConfig cfg = parse_config_text(std::string(kQuickConfig));
  SimTrace trace = quick_trace();
  const Scenario sc = build_scenario(cfg, 0);
  std::vector<Eigen::VectorXd> rates(3, Eigen::VectorXd::Zero(2));
  const SystemMatrices sys = build_system_matrices(2, sc.topology, sc.feedback_gain, sc.observer_gain, rates);
  const SynthesisResult synth = synthesize_state_feedback(sys, cfg.kappa, cfg.horizon);
  const DecayReport rep =
      monitor_lyapunov_decay(trace, synth, GainSchedule::exact(cfg.horizon, synth.b, 2), cfg.tol_rel);
  REQUIRE(rep.evaluated);
  CHECK(rep.passed);
  const auto plots = build_plots(trace);
  const auto it = std::find_if(plots.begin(), plots.end(), [](const PlotSpec& p) { return p.file_stem == "lyapunov"; });
  REQUIRE(it != plots.end());
  REQUIRE(it->series.size() == 2);
  for (std::size_t i = 0; i < it->series[0].y.size(); ++i) {
    CHECK(it->series[0].y[i] <= it->series[1].y[i] * (1.0 + cfg.tol_rel));
  }
}

TEST_CASE("synth, verify and tamper detection") {
  const fs::path dir = scratch_dir("verify");
  const fs::path cfg = write_config(dir, kQuickConfig);
  std::ostringstream out, err;
  REQUIRE(run_subcommand({"synth", "--config", cfg.string(), "--out", dir.string()}, out, err) == kExitPass);
  const fs::path report = dir / "synthesis.json";
  REQUIRE(fs::exists(report));
  CHECK(fs::exists(dir / "P_c.csv"));
  CHECK(run_subcommand({"verify", report.string()}, out, err) == kExitPass);

  nlohmann::json doc = nlohmann::json::parse(read_file(report));
  doc["scalars"]["b"] = doc["scalars"]["b"].get<double>() * 0.5;
  const fs::path tampered = dir / "tampered.json";
  std::ofstream(tampered) << doc.dump();
  CHECK(run_subcommand({"verify", tampered.string()}, out, err) == kExitViolation);
}

TEST_CASE("simulate writes the artefacts") {
  const fs::path dir = scratch_dir("simulate");
  const fs::path cfg = write_config(dir, kQuickConfig);
  std::ostringstream out, err;
  CHECK(run_subcommand({"simulate", "--config", cfg.string(), "--out", (dir / "run").string()}, out, err) ==
        kExitPass);
  for (const char* f : {"states.csv", "inputs.csv", "observer_errors.csv", "lyapunov.csv", "synthesis.json",
                        "states.svg", "lyapunov.svg"}) {
    INFO(f);
    CHECK(fs::exists(dir / "run" / f));
  }
  CHECK(run_subcommand({"simulate", "--config", cfg.string(), "--out", (dir / "bare").string(), "--no-plots"}, out,
                       err) == kExitPass);
  CHECK_FALSE(fs::exists(dir / "bare" / "states.svg"));
}

TEST_CASE("CLI error exits") {
  const fs::path dir = scratch_dir("errors");
  std::ostringstream out, err;
  CHECK(run_subcommand({"frobnicate"}, out, err) == kExitError);
  CHECK(run_subcommand({"simulate"}, out, err) == kExitError);
  CHECK(run_subcommand({"simulate", "--config", (dir / "missing.cfg").string()}, out, err) == kExitError);

  // A fleet whose sensors stray further than the synthesized controller tolerates.
  const fs::path cfg = write_config(dir, "mode: output_feedback\nagents: {preset: manipulators}\n"
                                         "gains: {T: 2, dtheta: 0.2}\n");
  err.str("");
  CHECK(run_subcommand({"synth", "--config", cfg.string()}, out, err) == kExitError);
  CHECK(err.str().find("SensitivityInadmissible") != std::string::npos);

  CHECK(run_subcommand({"synth", "--config", cfg.string(), "--mode", "sideways"}, out, err) == kExitError);
}
