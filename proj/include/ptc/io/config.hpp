#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptc/gain_synthesis.hpp"
#include "ptc/mas_plant.hpp"
#include "ptc/simulator.hpp"

namespace ptc::io {

enum class AgentKind { Manipulator, Linear };

struct AgentConfig {
  AgentKind kind = AgentKind::Linear;
  ManipulatorParams params{1.0, 0.0, 0.0, 0.0};
  Eigen::VectorXd initial_state;
  double sensor_amplitude = 0.0;
  std::optional<Eigen::VectorXd> growth_rates;
};

struct RunConfig {
  SynthesisMode mode = SynthesisMode::OutputFeedback;

  // graph
  std::optional<Eigen::MatrixXi> adjacency;
  std::optional<Eigen::VectorXi> pinning;

  // agents: either a preset name or an explicit list (leader first)
  std::string preset;
  int order = 0;
  std::vector<AgentConfig> agents;
  std::optional<double> random_sensor_amplitude;  // followers draw uniformly in (-a, a)

  // gains
  std::optional<Eigen::RowVectorXd> feedback_gain;
  std::optional<Eigen::RowVectorXd> observer_gain;
  double kappa = 0.001;  // kappa_0 or kappa_a
  double c1 = 0.9;
  double horizon = 0.0;  // T (exact modes)
  double t_f = 0.0;
  double delta = 0.0;
  double pc_margin = 0.01;
  double kappa_margin = 0.01;
  std::optional<double> dtheta;

  SimOptions sim;
  double tol_rel = 0.05;

  std::filesystem::path output_dir = "out";
  bool plots = true;
};

// Reads a YAML file. Throws ParseError (with line) or ValidationError (all violations).
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

// Re-runs validation, e.g. after a --mode override.
void validate_config(const RunConfig& config);

std::optional<SynthesisMode> parse_mode(const std::string& name);

// Seed for random sensor amplitudes, from PENCIL_CONSENSUS_SEED (default 0).
std::uint64_t sensor_seed();

struct Scenario {
  AgentFleet fleet;
  GraphTopology topology;
  Eigen::RowVectorXd feedback_gain;
  Eigen::RowVectorXd observer_gain;
  double dtheta = 0.0;
};

Scenario build_scenario(const RunConfig& config, std::uint64_t seed);

// Exact-time output feedback on the manipulator preset with T = 2.
RunConfig demo_config();

}  // namespace ptc::io
