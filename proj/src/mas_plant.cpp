#include "ptc/mas_plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptc/errors.hpp"

namespace ptc {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

double AgentFleet::max_follower_sensitivity() const {
  double worst = 0.0;
  for (std::size_t k = 1; k < agents.size(); ++k) worst = std::max(worst, agents[k].sensitivity_bound);
  return worst;
}

std::optional<std::vector<VectorXd>> AgentFleet::follower_growth_rates() const {
  std::vector<VectorXd> out;
  for (std::size_t k = 1; k < agents.size(); ++k) {
    if (!agents[k].growth_rates) return std::nullopt;
    out.push_back(*agents[k].growth_rates);
  }
  return out;
}

VectorXd evaluate_drift(const AgentModel& agent, double t, const VectorXd& x) {
  if (!agent.drift) return VectorXd::Zero(x.size());
  return agent.drift(t, x);
}

double evaluate_sensitivity(const AgentModel& agent, double t) {
  return agent.sensitivity ? agent.sensitivity(t) : 1.0;
}

FleetState initial_state(const AgentFleet& fleet) {
  const auto rows = static_cast<Eigen::Index>(fleet.agents.size());
  FleetState s{MatrixXd::Zero(rows, fleet.order), MatrixXd::Zero(rows, fleet.order)};
  for (Eigen::Index k = 0; k < rows; ++k) {
    const AgentModel& a = fleet.agents[static_cast<std::size_t>(k)];
    if (a.initial_state.size() != fleet.order) {
      throw Error(ErrorCode::DimensionMismatch, "agent " + std::to_string(k) + " initial state has wrong size");
    }
    s.x.row(k) = a.initial_state.transpose();
    if (a.initial_estimate.size() == fleet.order) s.x_hat.row(k) = a.initial_estimate.transpose();
  }
  return s;
}

double consensus_control(int k, const MatrixXd& z, const GraphTopology& topology, const RowVectorXd& feedback_gain,
                         const GainSchedule& schedule, double t) {
  if (k < 1 || k > topology.n_agents) throw Error(ErrorCode::IndexOutOfRange, "follower index out of range");
  const Eigen::Index n = z.cols();
  VectorXd mismatch = VectorXd::Zero(n);
  for (int j = 1; j <= topology.n_agents; ++j) {
    if (topology.adjacency(k - 1, j - 1) != 0) mismatch += (z.row(k) - z.row(j)).transpose();
  }
  if (topology.pinning(k - 1) != 0) mismatch += (z.row(k) - z.row(0)).transpose();
  return -feedback_gain.dot(schedule.scaling_diag(t).cwiseProduct(mismatch));
}

double state_feedback_control(int k, const FleetState& state, const GraphTopology& topology,
                              const RowVectorXd& feedback_gain, const GainSchedule& schedule, double t) {
  return consensus_control(k, state.x, topology, feedback_gain, schedule, t);
}

double output_feedback_control(int k, const FleetState& state, const GraphTopology& topology,
                               const RowVectorXd& feedback_gain, const GainSchedule& schedule, double t) {
  return consensus_control(k, state.x_hat, topology, feedback_gain, schedule, t);
}

namespace {

// A z for the shift matrix.
VectorXd shift(const VectorXd& z) {
  VectorXd out = VectorXd::Zero(z.size());
  out.head(z.size() - 1) = z.tail(z.size() - 1);
  return out;
}

}  // namespace

VectorXd observer_step_rhs(const VectorXd& x_hat, double u, double y, const RowVectorXd& observer_gain,
                           const GainSchedule& schedule, double t) {
  VectorXd out = shift(x_hat);
  out(out.size() - 1) += u;
  out += (y - x_hat(0)) * schedule.injection_diag(t).cwiseProduct(observer_gain.transpose());
  return out;
}

VectorXd control_inputs(const ClosedLoop& loop, double t, const FleetState& state) {
  VectorXd u = VectorXd::Zero(static_cast<Eigen::Index>(loop.fleet.agents.size()));
  for (int k = 1; k <= loop.fleet.followers(); ++k) {
    switch (loop.protocol) {
      case Protocol::StateFeedback:
        u(k) = state_feedback_control(k, state, loop.topology, loop.feedback_gain, loop.schedule, t);
        break;
      case Protocol::OutputFeedback:
        u(k) = output_feedback_control(k, state, loop.topology, loop.feedback_gain, loop.schedule, t);
        break;
      case Protocol::OpenLoop:
        break;
    }
  }
  return u;
}

FleetState fleet_rhs(const ClosedLoop& loop, double t, const FleetState& state) {
  const VectorXd u = control_inputs(loop, t, state);
  FleetState d{MatrixXd::Zero(state.x.rows(), state.x.cols()), MatrixXd::Zero(state.x_hat.rows(), state.x_hat.cols())};
  const bool observe = loop.protocol == Protocol::OutputFeedback;
  for (Eigen::Index k = 0; k < state.x.rows(); ++k) {
    const AgentModel& agent = loop.fleet.agents[static_cast<std::size_t>(k)];
    const VectorXd xk = state.x.row(k).transpose();
    VectorXd dx = shift(xk) + evaluate_drift(agent, t, xk);
    dx(dx.size() - 1) += u(k);
    d.x.row(k) = dx.transpose();
    if (observe) {
      const double y = evaluate_sensitivity(agent, t) * xk(0);
      d.x_hat.row(k) =
          observer_step_rhs(state.x_hat.row(k).transpose(), u(k), y, loop.observer_gain, loop.schedule, t).transpose();
    }
  }
  return d;
}

ScaledCoordinates scaled_coordinates(const ClosedLoop& loop, double t, const FleetState& state) {
  const int n = loop.fleet.order;
  const int followers = loop.fleet.followers();
  const VectorXd lambda = loop.schedule.scaling_diag(t);
  ScaledCoordinates out;
  out.primary.resize(n * followers);
  const bool observe = loop.protocol == Protocol::OutputFeedback;
  if (observe) out.observer_error.resize(n * followers);
  for (int k = 1; k <= followers; ++k) {
    const VectorXd eta = lambda.cwiseProduct((state.x.row(k) - state.x.row(0)).transpose());
    if (observe) {
      const VectorXd eta_hat = lambda.cwiseProduct((state.x_hat.row(k) - state.x_hat.row(0)).transpose());
      out.primary.segment((k - 1) * n, n) = eta_hat;
      out.observer_error.segment((k - 1) * n, n) = eta - eta_hat;
    } else {
      out.primary.segment((k - 1) * n, n) = eta;
    }
  }
  return out;
}

ScaledCoordinates compact_rates(const ClosedLoop& loop, const SystemMatrices& sys, double t, const FleetState& state,
                                ObserverErrorForm form) {
  const GainSchedule& sched = loop.schedule;
  if (!sched.in_warp(t)) throw Error(ErrorCode::OutOfDomain, "compact forms live on the warped time axis");
  const int n = loop.fleet.order;
  const int followers = loop.fleet.followers();
  const double b = sched.b();
  const double r = sched.r(t);

  // Phi_k,i = r^{n-i} (f_k,i - f_0,i)
  VectorXd r_pow(n);
  r_pow(n - 1) = 1.0;
  for (int i = n - 2; i >= 0; --i) r_pow(i) = r_pow(i + 1) * r;
  const VectorXd leader_drift = evaluate_drift(loop.fleet.agents[0], t, state.x.row(0).transpose());
  VectorXd phi(n * followers);
  for (int k = 1; k <= followers; ++k) {
    const VectorXd fk = evaluate_drift(loop.fleet.agents[static_cast<std::size_t>(k)], t, state.x.row(k).transpose());
    phi.segment((k - 1) * n, n) = r_pow.cwiseProduct(fk - leader_drift);
  }

  const ScaledCoordinates z = scaled_coordinates(loop, t, state);
  ScaledCoordinates out;
  if (loop.protocol != Protocol::OutputFeedback) {
    out.primary = b * (sys.closed_loop * z.primary + phi) + sys.degree_weights * z.primary;
    return out;
  }

  // Sensor deviation (theta_k - 1) per stacked entry, and the leader sensing term.
  const double theta_leader = evaluate_sensitivity(loop.fleet.agents[0], t);
  VectorXd deviation(n * followers);
  VectorXd leader_term(n * followers);
  const double r_top = r_pow(0) * r;  // r^n
  for (int k = 1; k <= followers; ++k) {
    const double theta = evaluate_sensitivity(loop.fleet.agents[static_cast<std::size_t>(k)], t);
    deviation.segment((k - 1) * n, n).setConstant(theta - 1.0);
    leader_term.segment((k - 1) * n, n) =
        loop.observer_gain.transpose() * (r_top * (theta - theta_leader) * state.x(0, 0));
  }
  const VectorXd& eta_hat = z.primary;
  const VectorXd& eps = z.observer_error;
  const VectorXd coupling_hat = sys.output_injection * deviation.cwiseProduct(eta_hat);
  const VectorXd coupling_eps = sys.output_injection * deviation.cwiseProduct(eps);

  out.primary = b * (sys.closed_loop * eta_hat + sys.output_injection * eps + coupling_eps + coupling_hat + leader_term) +
                sys.degree_weights * eta_hat;
  out.observer_error = b * (sys.observer_loop * eps + phi) + sys.degree_weights * eps;
  if (form == ObserverErrorForm::FullSensor) {
    out.observer_error -= b * (coupling_hat + coupling_eps + leader_term);
  }
  return out;
}

ScaledCoordinates chain_rule_rates(const ClosedLoop& loop, double t, const FleetState& state) {
  const GainSchedule& sched = loop.schedule;
  if (!sched.in_warp(t)) throw Error(ErrorCode::OutOfDomain, "warped rates are undefined after t_f");
  const int n = loop.fleet.order;
  const int followers = loop.fleet.followers();
  const FleetState d = fleet_rhs(loop, t, state);
  const VectorXd lambda = sched.scaling_diag(t);
  const double dt_dtau = 1.0 / sched.alpha(t);
  // d/dtau Lambda_r = D_c Lambda_r, since r'(t)/alpha = r.
  VectorXd weights(n);
  for (int i = 0; i < n; ++i) weights(i) = n - i;

  const bool observe = loop.protocol == Protocol::OutputFeedback;
  ScaledCoordinates out;
  out.primary.resize(n * followers);
  if (observe) out.observer_error.resize(n * followers);
  for (int k = 1; k <= followers; ++k) {
    const VectorXd gap = (state.x.row(k) - state.x.row(0)).transpose();
    const VectorXd gap_rate = (d.x.row(k) - d.x.row(0)).transpose();
    const VectorXd eta_rate =
        weights.cwiseProduct(lambda.cwiseProduct(gap)) + dt_dtau * lambda.cwiseProduct(gap_rate);
    if (observe) {
      const VectorXd gap_hat = (state.x_hat.row(k) - state.x_hat.row(0)).transpose();
      const VectorXd gap_hat_rate = (d.x_hat.row(k) - d.x_hat.row(0)).transpose();
      const VectorXd hat_rate =
          weights.cwiseProduct(lambda.cwiseProduct(gap_hat)) + dt_dtau * lambda.cwiseProduct(gap_hat_rate);
      out.primary.segment((k - 1) * n, n) = hat_rate;
      out.observer_error.segment((k - 1) * n, n) = eta_rate - hat_rate;
    } else {
      out.primary.segment((k - 1) * n, n) = eta_rate;
    }
  }
  return out;
}

Nonlinearity manipulator_drift(const ManipulatorParams& p) {
  return [p](double, const VectorXd& x) {
    VectorXd f = VectorXd::Zero(2);
    f(1) = -p.damping * x(1) / p.inertia - p.mass * kGravity * p.length * std::sin(x(0) / p.inertia);
    return f;
  };
}

SensorGain rectified_sine_sensor(double amplitude) {
  return [amplitude](double t) { return 1.0 + amplitude * std::abs(std::sin(10.0 * t)); };
}

ManipulatorPreset manipulator_preset() {
  ManipulatorPreset preset;
  preset.params = {
      {8.5, 1.4, 1.3, 1.0}, {10.0, 1.6, 1.0, 1.0}, {10.0, 1.6, 1.3, 0.8}, {10.0, 1.4, 1.0, 1.2}, {8.5, 1.6, 1.0, 1.2},
  };
  preset.sensor_amplitudes = {0.0, 0.08, 0.09, -0.08, -0.09};
  preset.feedback_gain = RowVectorXd{{8.0, 9.0}};
  preset.observer_gain = RowVectorXd{{2.0, 2.0}};
  Eigen::VectorXi pinning{{1, 0, 0, 0}};
  preset.topology = build_topology(path_adjacency(4), pinning);

  preset.fleet.order = 2;
  for (std::size_t k = 0; k < preset.params.size(); ++k) {
    AgentModel a;
    a.drift = manipulator_drift(preset.params[k]);
    a.sensitivity = rectified_sine_sensor(preset.sensor_amplitudes[k]);
    a.sensitivity_bound = std::abs(preset.sensor_amplitudes[k]);
    a.growth_rates = VectorXd{{1.8, 0.19}};
    const double start = static_cast<double>(k);
    a.initial_state = VectorXd{{start, start}};
    a.initial_estimate = VectorXd::Zero(2);
    preset.fleet.agents.push_back(std::move(a));
  }
  return preset;
}

}  // namespace ptc
