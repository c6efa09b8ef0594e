#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ptc/gain_synthesis.hpp"
#include "ptc/graph_topology.hpp"
#include "ptc/time_warp.hpp"

namespace ptc {

using Nonlinearity = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;
using SensorGain = std::function<double(double t)>;

// One chain-of-integrators agent: x' = A x + B u + F(t, x), y = theta(t) x_1.
struct AgentModel {
  Nonlinearity drift;               // empty means F = 0
  SensorGain sensitivity;           // empty means theta = 1
  double sensitivity_bound = 0.0;   // sup |theta - 1|
  std::optional<Eigen::VectorXd> growth_rates;
  Eigen::VectorXd initial_state;
  Eigen::VectorXd initial_estimate;
};

struct AgentFleet {
  int order = 0;
  std::vector<AgentModel> agents;  // agents[0] is the leader

  int followers() const { return static_cast<int>(agents.size()) - 1; }
  double max_follower_sensitivity() const;
  // Present only when every follower declares its growth rates.
  std::optional<std::vector<Eigen::VectorXd>> follower_growth_rates() const;
};

Eigen::VectorXd evaluate_drift(const AgentModel& agent, double t, const Eigen::VectorXd& x);
double evaluate_sensitivity(const AgentModel& agent, double t);

// Rows are agents 0..N. x_hat row 0 is the leader's own observer.
struct FleetState {
  Eigen::MatrixXd x;
  Eigen::MatrixXd x_hat;
};

FleetState initial_state(const AgentFleet& fleet);

enum class Protocol { StateFeedback, OutputFeedback, OpenLoop };

struct ClosedLoop {
  AgentFleet fleet;
  GraphTopology topology;
  Eigen::RowVectorXd feedback_gain;  // K
  Eigen::RowVectorXd observer_gain;  // G
  GainSchedule schedule;
  Protocol protocol = Protocol::OutputFeedback;
};

// u_k = -K Lambda_r (sum_j a_kj (z_k - z_j) + b_k (z_k - z_0)) with z the chosen state rows.
double consensus_control(int k, const Eigen::MatrixXd& z, const GraphTopology& topology,
                         const Eigen::RowVectorXd& feedback_gain, const GainSchedule& schedule, double t);
double state_feedback_control(int k, const FleetState& state, const GraphTopology& topology,
                              const Eigen::RowVectorXd& feedback_gain, const GainSchedule& schedule, double t);
double output_feedback_control(int k, const FleetState& state, const GraphTopology& topology,
                               const Eigen::RowVectorXd& feedback_gain, const GainSchedule& schedule, double t);

// x_hat' = A x_hat + B u + r^{n+1} Lambda_r^{-1} G^T (y - x_hat_1)
Eigen::VectorXd observer_step_rhs(const Eigen::VectorXd& x_hat, double u, double y, const Eigen::RowVectorXd& observer_gain,
                                  const GainSchedule& schedule, double t);

// Inputs for agents 0..N; the leader's entry is 0.
Eigen::VectorXd control_inputs(const ClosedLoop& loop, double t, const FleetState& state);

FleetState fleet_rhs(const ClosedLoop& loop, double t, const FleetState& state);

// Stacked scaled errors. For state feedback `primary` is eta and `observer_error` is empty;
// for output feedback they are eta_hat and eps.
struct ScaledCoordinates {
  Eigen::VectorXd primary;
  Eigen::VectorXd observer_error;
};

ScaledCoordinates scaled_coordinates(const ClosedLoop& loop, double t, const FleetState& state);

// Which terms the compact observer-error equation carries.
// NominalSensor drops the sensor-deviation coupling and is exact only when theta == 1.
enum class ObserverErrorForm { FullSensor, NominalSensor };

// d/dtau of the scaled coordinates from the compact stacked equations.
ScaledCoordinates compact_rates(const ClosedLoop& loop, const SystemMatrices& sys, double t, const FleetState& state,
                                ObserverErrorForm form = ObserverErrorForm::FullSensor);
// d/dtau by differentiating the definitions along fleet_rhs (product rule on Lambda_r).
ScaledCoordinates chain_rule_rates(const ClosedLoop& loop, double t, const FleetState& state);

struct ManipulatorParams {
  double inertia;
  double damping;
  double mass;
  double length;
};

inline constexpr double kGravity = 9.8;

// F = (0, -B x2/J - m g h sin(x1/J))
Nonlinearity manipulator_drift(const ManipulatorParams& p);
// theta(t) = 1 + amplitude |sin(10 t)|
SensorGain rectified_sine_sensor(double amplitude);

struct ManipulatorPreset {
  AgentFleet fleet;
  GraphTopology topology;
  Eigen::RowVectorXd feedback_gain;
  Eigen::RowVectorXd observer_gain;
  std::vector<ManipulatorParams> params;
  std::vector<double> sensor_amplitudes;
};

// Leader plus four followers on a path pinned at follower 1.
ManipulatorPreset manipulator_preset();

}  // namespace ptc
