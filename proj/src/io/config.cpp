#include "ptc/io/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ptc/errors.hpp"

namespace ptc::io {
namespace {

std::string at_line(const YAML::Node& node) { return " (line " + std::to_string(node.Mark().line + 1) + ")"; }

template <typename T>
T read(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::ParseError, field + ": wrong type" + at_line(node));
  }
}

std::vector<double> read_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw Error(ErrorCode::ParseError, field + ": expected a list" + at_line(node));
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(read<double>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::VectorXd read_vector(const YAML::Node& node, const std::string& field) {
  const std::vector<double> v = read_list(node, field);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXi read_int_matrix(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw Error(ErrorCode::ParseError, field + ": expected a list of rows" + at_line(node));
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::MatrixXi m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const YAML::Node row = node[static_cast<std::size_t>(i)];
    if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw Error(ErrorCode::ParseError, field + ": row " + std::to_string(i) + " must have " + std::to_string(rows) +
                                             " entries" + at_line(row));
    }
    for (Eigen::Index j = 0; j < rows; ++j) m(i, j) = read<int>(row[static_cast<std::size_t>(j)], field);
  }
  return m;
}

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed,
                std::vector<std::string>& problems) {
  if (!node || !node.IsMap()) return;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) problems.push_back(section + key + ": unknown key" + at_line(kv.first));
  }
}

AgentConfig read_agent(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) throw Error(ErrorCode::ParseError, field + ": expected a mapping" + at_line(node));
  AgentConfig a;
  const std::string kind = node["kind"] ? read<std::string>(node["kind"], field + ".kind") : "linear";
  if (kind == "manipulator") {
    a.kind = AgentKind::Manipulator;
    a.params.inertia = read<double>(node["inertia"], field + ".inertia");
    a.params.damping = read<double>(node["damping"], field + ".damping");
    a.params.mass = read<double>(node["mass"], field + ".mass");
    a.params.length = read<double>(node["length"], field + ".length");
  } else if (kind != "linear") {
    throw Error(ErrorCode::ParseError, field + ".kind: expected manipulator or linear" + at_line(node["kind"]));
  }
  if (node["x0"]) a.initial_state = read_vector(node["x0"], field + ".x0");
  if (node["sensor_amplitude"]) a.sensor_amplitude = read<double>(node["sensor_amplitude"], field + ".sensor_amplitude");
  if (node["growth_rates"]) a.growth_rates = read_vector(node["growth_rates"], field + ".growth_rates");
  return a;
}

RunConfig from_yaml(const YAML::Node& root) {
  RunConfig cfg;
  std::vector<std::string> problems;
  if (root && !root.IsNull() && !root.IsMap()) {
    throw Error(ErrorCode::ParseError, "top level must be a mapping" + at_line(root));
  }
  check_keys(root, "", {"mode", "graph", "agents", "gains", "sim", "io"}, problems);

  bool mode_given = false;
  if (root && root["mode"]) {
    const auto name = read<std::string>(root["mode"], "mode");
    if (auto m = parse_mode(name)) {
      cfg.mode = *m;
      mode_given = true;
    } else {
      problems.push_back("mode: unknown value '" + name + "'" + at_line(root["mode"]));
    }
  } else {
    problems.push_back("mode: missing");
  }

  if (root && root["graph"]) {
    const YAML::Node g = root["graph"];
    check_keys(g, "graph.", {"adjacency", "pinning"}, problems);
    if (g["adjacency"]) cfg.adjacency = read_int_matrix(g["adjacency"], "graph.adjacency");
    if (g["pinning"]) {
      const std::vector<double> p = read_list(g["pinning"], "graph.pinning");
      Eigen::VectorXi pin(static_cast<Eigen::Index>(p.size()));
      for (std::size_t i = 0; i < p.size(); ++i) pin(static_cast<Eigen::Index>(i)) = static_cast<int>(p[i]);
      cfg.pinning = pin;
    }
  }

  if (root && root["agents"]) {
    const YAML::Node a = root["agents"];
    check_keys(a, "agents.", {"preset", "order", "list", "random_sensor_amplitude"}, problems);
    if (a["preset"]) cfg.preset = read<std::string>(a["preset"], "agents.preset");
    if (a["order"]) cfg.order = read<int>(a["order"], "agents.order");
    if (a["random_sensor_amplitude"]) {
      cfg.random_sensor_amplitude = read<double>(a["random_sensor_amplitude"], "agents.random_sensor_amplitude");
    }
    if (a["list"]) {
      const YAML::Node list = a["list"];
      if (!list.IsSequence()) throw Error(ErrorCode::ParseError, "agents.list: expected a list" + at_line(list));
      for (std::size_t i = 0; i < list.size(); ++i) {
        cfg.agents.push_back(read_agent(list[i], "agents.list[" + std::to_string(i) + "]"));
      }
    }
  }

  bool h_max_given = false;
  bool eps_stop_given = false;
  if (root && root["gains"]) {
    const YAML::Node g = root["gains"];
    check_keys(g, "gains.",
               {"K", "G", "kappa0", "kappa_a", "c1", "T", "t_f", "delta", "pc_margin", "kappa_margin", "dtheta"},
               problems);
    if (g["K"]) cfg.feedback_gain = read_vector(g["K"], "gains.K").transpose();
    if (g["G"]) cfg.observer_gain = read_vector(g["G"], "gains.G").transpose();
    if (g["kappa0"]) cfg.kappa = read<double>(g["kappa0"], "gains.kappa0");
    if (g["kappa_a"]) cfg.kappa = read<double>(g["kappa_a"], "gains.kappa_a");
    if (g["c1"]) cfg.c1 = read<double>(g["c1"], "gains.c1");
    if (g["T"]) cfg.horizon = read<double>(g["T"], "gains.T");
    if (g["t_f"]) cfg.t_f = read<double>(g["t_f"], "gains.t_f");
    if (g["delta"]) cfg.delta = read<double>(g["delta"], "gains.delta");
    if (g["pc_margin"]) cfg.pc_margin = read<double>(g["pc_margin"], "gains.pc_margin");
    if (g["kappa_margin"]) cfg.kappa_margin = read<double>(g["kappa_margin"], "gains.kappa_margin");
    if (g["dtheta"]) cfg.dtheta = read<double>(g["dtheta"], "gains.dtheta");
  }

  if (root && root["sim"]) {
    const YAML::Node s = root["sim"];
    check_keys(s, "sim.",
               {"h_max", "h_frac", "eps_stop", "output_stride", "tol_rel", "t_end", "max_steps", "stability_safety"},
               problems);
    if (s["h_max"]) {
      cfg.sim.h_max = read<double>(s["h_max"], "sim.h_max");
      h_max_given = true;
    }
    if (s["h_frac"]) cfg.sim.h_frac = read<double>(s["h_frac"], "sim.h_frac");
    if (s["eps_stop"]) {
      cfg.sim.eps_stop = read<double>(s["eps_stop"], "sim.eps_stop");
      eps_stop_given = true;
    }
    if (s["output_stride"]) cfg.sim.output_stride = read<int>(s["output_stride"], "sim.output_stride");
    if (s["tol_rel"]) cfg.tol_rel = read<double>(s["tol_rel"], "sim.tol_rel");
    if (s["t_end"]) cfg.sim.t_end = read<double>(s["t_end"], "sim.t_end");
    if (s["max_steps"]) cfg.sim.max_steps = read<std::int64_t>(s["max_steps"], "sim.max_steps");
    if (s["stability_safety"]) cfg.sim.stability_safety = read<double>(s["stability_safety"], "sim.stability_safety");
  }

  if (root && root["io"]) {
    const YAML::Node o = root["io"];
    check_keys(o, "io.", {"output_dir", "plots"}, problems);
    if (o["output_dir"]) cfg.output_dir = read<std::string>(o["output_dir"], "io.output_dir");
    if (o["plots"]) cfg.plots = read<bool>(o["plots"], "io.plots");
  }

  const double span = cfg.mode == SynthesisMode::Practical ? cfg.t_f + cfg.delta : cfg.horizon;
  if (!h_max_given && span > 0.0) cfg.sim.h_max = 1e-4 * span;
  if (!eps_stop_given && span > 0.0) cfg.sim.eps_stop = 1e-3 * span;
  if (cfg.mode == SynthesisMode::Practical && cfg.sim.t_end == 0.0) cfg.sim.t_end = 10.0;

  if (!problems.empty() || !mode_given) {
    std::ostringstream msg;
    for (const auto& p : problems) msg << "\n  " << p;
    throw Error(ErrorCode::ValidationError, "invalid configuration:" + msg.str());
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace

std::optional<SynthesisMode> parse_mode(const std::string& name) {
  if (name == "state_feedback") return SynthesisMode::StateFeedback;
  if (name == "output_feedback") return SynthesisMode::OutputFeedback;
  if (name == "practical") return SynthesisMode::Practical;
  return std::nullopt;
}

void validate_config(const RunConfig& cfg) {
  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };

  const bool preset = !cfg.preset.empty();
  int order = cfg.order;
  int followers = 0;
  if (preset) {
    need(cfg.preset == "manipulators", "agents.preset: unknown preset '" + cfg.preset + "'");
    need(cfg.agents.empty(), "agents: give either preset or list, not both");
    order = 2;
    followers = 4;
  } else {
    need(!cfg.agents.empty(), "agents: missing (set agents.preset or agents.list)");
    need(cfg.agents.size() >= 2, "agents.list: need the leader and at least one follower");
    need(order >= 1, "agents.order: must be >= 1");
    followers = static_cast<int>(cfg.agents.size()) - 1;
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
      const AgentConfig& a = cfg.agents[i];
      const std::string f = "agents.list[" + std::to_string(i) + "]";
      need(a.initial_state.size() == order, f + ".x0: expected " + std::to_string(order) + " entries");
      need(a.kind != AgentKind::Manipulator || order == 2, f + ".kind: manipulator agents need order 2");
      need(a.kind != AgentKind::Manipulator || a.params.inertia > 0.0, f + ".inertia: must be positive");
      need(std::abs(a.sensor_amplitude) < 1.0, f + ".sensor_amplitude: must lie in (-1, 1)");
      if (a.growth_rates) {
        need(a.growth_rates->size() == order, f + ".growth_rates: expected " + std::to_string(order) + " entries");
        need(a.growth_rates->size() == 0 || a.growth_rates->minCoeff() >= 0.0, f + ".growth_rates: must be >= 0");
      }
    }
    need(cfg.adjacency.has_value(), "graph.adjacency: missing");
    need(cfg.pinning.has_value(), "graph.pinning: missing");
  }
  if (cfg.adjacency) {
    need(cfg.adjacency->rows() == followers, "graph.adjacency: expected " + std::to_string(followers) + " rows");
  }
  if (cfg.pinning) {
    need(cfg.pinning->size() == followers, "graph.pinning: expected " + std::to_string(followers) + " entries");
  }
  if (cfg.random_sensor_amplitude) {
    need(*cfg.random_sensor_amplitude > 0.0 && *cfg.random_sensor_amplitude < 1.0,
         "agents.random_sensor_amplitude: must lie in (0, 1)");
  }

  need(preset || cfg.feedback_gain.has_value(), "gains.K: missing");
  if (cfg.feedback_gain) {
    need(cfg.feedback_gain->size() == order, "gains.K: expected " + std::to_string(order) + " entries");
  }
  const bool observer = cfg.mode != SynthesisMode::StateFeedback;
  if (observer) need(preset || cfg.observer_gain.has_value(), "gains.G: missing (needed for output feedback)");
  if (cfg.observer_gain) {
    need(cfg.observer_gain->size() == order, "gains.G: expected " + std::to_string(order) + " entries");
  }
  need(cfg.kappa > 0.0, "gains.kappa: must be positive");
  if (observer) need(cfg.c1 > 0.0 && cfg.c1 < 1.0, "gains.c1: must lie in (0, 1)");
  need(cfg.pc_margin > 0.0, "gains.pc_margin: must be positive");
  if (cfg.mode == SynthesisMode::Practical) {
    need(cfg.t_f > 0.0, "gains.t_f: must be positive");
    need(cfg.delta > 0.0, "gains.delta: must be positive");
    need(cfg.kappa_margin > 0.0, "gains.kappa_margin: must be positive");
    need(cfg.sim.t_end > cfg.t_f, "sim.t_end: must exceed t_f");
    if (!preset) {
      for (std::size_t i = 1; i < cfg.agents.size(); ++i) {
        need(cfg.agents[i].growth_rates.has_value(),
             "agents.list[" + std::to_string(i) + "].growth_rates: required in practical mode");
      }
    }
  } else {
    need(cfg.horizon > 0.0, "gains.T: must be positive");
    need(cfg.sim.eps_stop > 0.0 && cfg.sim.eps_stop < cfg.horizon, "sim.eps_stop: must lie in (0, T)");
  }
  if (cfg.dtheta) need(*cfg.dtheta >= 0.0 && *cfg.dtheta < 1.0, "gains.dtheta: must lie in [0, 1)");

  need(cfg.sim.h_max > 0.0, "sim.h_max: must be positive");
  need(cfg.sim.h_frac > 0.0, "sim.h_frac: must be positive");
  need(cfg.sim.output_stride >= 1, "sim.output_stride: must be >= 1");
  need(cfg.tol_rel > 0.0, "sim.tol_rel: must be positive");
  need(cfg.sim.max_steps > 0, "sim.max_steps: must be positive");
  need(cfg.sim.stability_safety > 0.0, "sim.stability_safety: must be positive");

  if (!problems.empty()) {
    std::ostringstream msg;
    for (const auto& p : problems) msg << "\n  " << p;
    throw Error(ErrorCode::ValidationError, "invalid configuration:" + msg.str());
  }
}

RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return from_yaml(root);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::uint64_t sensor_seed() {
  const char* raw = std::getenv("PENCIL_CONSENSUS_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') throw Error(ErrorCode::ValidationError, "PENCIL_CONSENSUS_SEED must be an integer");
  return v;
}

Scenario build_scenario(const RunConfig& cfg, std::uint64_t seed) {
  Scenario sc;
  std::vector<double> amplitudes;
  if (!cfg.preset.empty()) {
    ManipulatorPreset p = manipulator_preset();
    sc.fleet = std::move(p.fleet);
    sc.topology = p.topology;
    sc.feedback_gain = p.feedback_gain;
    sc.observer_gain = p.observer_gain;
    amplitudes = p.sensor_amplitudes;
  } else {
    sc.fleet.order = cfg.order;
    for (const AgentConfig& a : cfg.agents) {
      AgentModel m;
      if (a.kind == AgentKind::Manipulator) m.drift = manipulator_drift(a.params);
      m.growth_rates = a.growth_rates;
      if (!m.growth_rates && a.kind == AgentKind::Linear) m.growth_rates = Eigen::VectorXd::Zero(cfg.order);
      m.initial_state = a.initial_state;
      m.initial_estimate = Eigen::VectorXd::Zero(cfg.order);
      sc.fleet.agents.push_back(std::move(m));
      amplitudes.push_back(a.sensor_amplitude);
    }
  }
  if (cfg.adjacency && cfg.pinning) sc.topology = build_topology(*cfg.adjacency, *cfg.pinning);
  if (cfg.feedback_gain) sc.feedback_gain = *cfg.feedback_gain;
  if (cfg.observer_gain) sc.observer_gain = *cfg.observer_gain;
  if (cfg.mode == SynthesisMode::StateFeedback && !cfg.observer_gain && cfg.preset.empty()) {
    sc.observer_gain.resize(0);
  }

  if (cfg.random_sensor_amplitude) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(-*cfg.random_sensor_amplitude, *cfg.random_sensor_amplitude);
    for (std::size_t k = 1; k < amplitudes.size(); ++k) amplitudes[k] = draw(rng);
  }
  for (std::size_t k = 0; k < sc.fleet.agents.size(); ++k) {
    sc.fleet.agents[k].sensitivity = rectified_sine_sensor(amplitudes[k]);
    sc.fleet.agents[k].sensitivity_bound = std::abs(amplitudes[k]);
  }
  sc.dtheta = sc.fleet.max_follower_sensitivity();
  if (cfg.dtheta) {
    if (*cfg.dtheta < sc.dtheta) {
      throw Error(ErrorCode::ValidationError, "gains.dtheta is below the largest follower sensor amplitude");
    }
    sc.dtheta = *cfg.dtheta;
  }
  return sc;
}

RunConfig demo_config() {
  RunConfig cfg;
  cfg.mode = SynthesisMode::OutputFeedback;
  cfg.preset = "manipulators";
  cfg.horizon = 2.0;
  cfg.kappa = 0.001;
  cfg.c1 = 0.9;
  cfg.sim.h_max = 2e-4;
  cfg.sim.h_frac = 1e-2;
  cfg.sim.eps_stop = 2e-3;
  cfg.sim.output_stride = 50;
  cfg.tol_rel = 0.05;
  cfg.output_dir = "demo-manipulators";
  return cfg;
}

}  // namespace ptc::io
