#include "ptc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ptc/errors.hpp"
#include "ptc/pencil_linalg.hpp"

namespace ptc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double stop_time(const ClosedLoop& loop, const SimOptions& opts) {
  const GainSchedule& s = loop.schedule;
  if (s.mode() == GainMode::Exact) return s.horizon() - opts.eps_stop;
  return opts.t_end;
}

void validate(const ClosedLoop& loop, const SimOptions& opts) {
  const GainSchedule& s = loop.schedule;
  if (!(opts.h_max > 0.0) || !(opts.h_frac > 0.0) || !(opts.h_min > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "step parameters must be positive");
  }
  if (opts.output_stride < 1) throw Error(ErrorCode::InvalidArgument, "output stride must be >= 1");
  if (s.mode() == GainMode::Exact && !(opts.eps_stop > 0.0 && opts.eps_stop < s.horizon())) {
    throw Error(ErrorCode::InvalidArgument, "eps_stop must lie in (0, T)");
  }
  if (s.mode() == GainMode::Practical && !(opts.t_end > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "practical mode needs t_end > 0");
  }
}

// One step of the step rule; returns 0 once t has reached t_stop.
double next_step(const ClosedLoop& loop, const SimOptions& opts, const StepScale& scale, double t, double t_stop) {
  const GainSchedule& s = loop.schedule;
  double target = t_stop;
  if (s.mode() == GainMode::Practical && t < s.switch_time()) target = std::min(target, s.switch_time());
  double remaining = target - t;
  if (remaining <= 0.0) return 0.0;
  double h = std::min(opts.h_max, remaining);
  if (s.in_warp(t)) h = std::min(h, opts.h_frac * (s.horizon() - t));
  if (loop.protocol != Protocol::OpenLoop) {
    const double rate = s.r(t) * scale.sigma + scale.lipschitz;
    if (rate > 0.0) h = std::min(h, opts.stability_safety / rate);
  }
  // Land exactly on breakpoints instead of leaving slivers.
  if (remaining - h <= 1e-12 * std::max(1.0, std::abs(target))) h = remaining;
  if (h < opts.h_min) {
    throw Error(ErrorCode::StepUnderflow, "step " + std::to_string(h) + " below h_min at t = " + std::to_string(t));
  }
  return h;
}

FleetState axpy(const FleetState& s, double h, const FleetState& d) {
  return {s.x + h * d.x, s.x_hat + h * d.x_hat};
}

}  // namespace

StepScale step_scale(const ClosedLoop& loop, const SystemMatrices& sys) {
  StepScale scale;
  scale.sigma = linalg::spectral_radius(sys.closed_loop);
  if (loop.protocol == Protocol::OutputFeedback && sys.observer_loop.size() > 0) {
    scale.sigma = std::max(scale.sigma, linalg::spectral_radius(sys.observer_loop));
  }
  for (const AgentModel& a : loop.fleet.agents) {
    if (a.growth_rates) scale.lipschitz = std::max(scale.lipschitz, a.growth_rates->sum());
  }
  return scale;
}

std::int64_t planned_steps(const ClosedLoop& loop, const SimOptions& opts, const StepScale& scale) {
  validate(loop, opts);
  const double t_stop = stop_time(loop, opts);
  double t = 0.0;
  std::int64_t steps = 0;
  while (true) {
    const double h = next_step(loop, opts, scale, t, t_stop);
    if (h == 0.0) break;
    t = (t_stop - (t + h) <= 1e-12 * std::max(1.0, t_stop)) ? t_stop : t + h;
    if (++steps > opts.max_steps) break;
  }
  return steps;
}

double lyapunov_value(const SynthesisResult& synthesis, const VectorXd& primary, const VectorXd& observer_error) {
  double v = primary.dot(synthesis.lyap_controller * primary);
  if (observer_error.size() > 0 && synthesis.lyap_observer.size() > 0) {
    v += synthesis.observer_weight * observer_error.dot(synthesis.lyap_observer * observer_error);
  }
  return v;
}

SimTrace integrate(const ClosedLoop& loop, const SystemMatrices& sys, const SynthesisResult& synthesis,
                   const SimOptions& opts) {
  validate(loop, opts);
  const StepScale scale = step_scale(loop, sys);
  if (planned_steps(loop, opts, scale) > opts.max_steps) {
    const double peak_gain = loop.schedule.r(std::min(stop_time(loop, opts), loop.schedule.switch_time()));
    throw Error(ErrorCode::StepBudgetExceeded, "step rule needs more than " + std::to_string(opts.max_steps) +
                                                   " RK4 steps; peak gain r = " + std::to_string(peak_gain));
  }

  SimTrace trace;
  trace.order = loop.fleet.order;
  trace.followers = loop.fleet.followers();
  trace.protocol = loop.protocol;
  const GainSchedule& sched = loop.schedule;
  const double t_stop = stop_time(loop, opts);

  auto record = [&](double t, const FleetState& s) {
    trace.times.push_back(t);
    trace.states.push_back(s.x);
    trace.estimates.push_back(s.x_hat);
    trace.inputs.push_back(control_inputs(loop, t, s));
    ScaledCoordinates z = scaled_coordinates(loop, t, s);
    trace.lyapunov.push_back(lyapunov_value(synthesis, z.primary, z.observer_error));
    trace.primary.push_back(std::move(z.primary));
    trace.observer_error.push_back(std::move(z.observer_error));
    trace.envelope.push_back(kNaN);
  };

  FleetState state = initial_state(loop.fleet);
  double t = 0.0;
  record(t, state);
  std::int64_t step = 0;
  while (true) {
    const double h = next_step(loop, opts, scale, t, t_stop);
    if (h == 0.0) break;
    const FleetState k1 = fleet_rhs(loop, t, state);
    const FleetState k2 = fleet_rhs(loop, t + 0.5 * h, axpy(state, 0.5 * h, k1));
    const FleetState k3 = fleet_rhs(loop, t + 0.5 * h, axpy(state, 0.5 * h, k2));
    const FleetState k4 = fleet_rhs(loop, t + h, axpy(state, h, k3));
    state.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    state.x_hat += (h / 6.0) * (k1.x_hat + 2.0 * k2.x_hat + 2.0 * k3.x_hat + k4.x_hat);
    const double t_prev = t;
    t = (t_stop - (t + h) <= 1e-12 * std::max(1.0, t_stop)) ? t_stop : t + h;
    ++step;
    if (!state.x.allFinite() || !state.x_hat.allFinite()) {
      Eigen::Index agent = 0;
      for (Eigen::Index k = 0; k < state.x.rows(); ++k) {
        if (!state.x.row(k).allFinite() || !state.x_hat.row(k).allFinite()) {
          agent = k;
          break;
        }
      }
      throw Error(ErrorCode::NonFinite,
                  "non-finite state for agent " + std::to_string(agent) + " at t = " + std::to_string(t));
    }
    const bool at_switch = sched.mode() == GainMode::Practical && t_prev < sched.switch_time() &&
                           t >= sched.switch_time();
    if (step % opts.output_stride == 0 || at_switch || t >= t_stop) record(t, state);
  }
  trace.steps = step;
  return trace;
}

DecayReport monitor_lyapunov_decay(SimTrace& trace, const SynthesisResult& synthesis, const GainSchedule& schedule,
                                   double tol_rel) {
  DecayReport rep;
  trace.envelope.assign(trace.times.size(), kNaN);
  if (trace.times.empty() || !synthesis.kappa_growth) return rep;
  rep.evaluated = true;
  const double horizon = schedule.horizon();
  const double v0 = trace.lyapunov.front();
  const double log_v0 = std::log(v0);
  const double log_slack = std::log1p(tol_rel);

  std::vector<double> log_env(trace.times.size());
  if (schedule.mode() == GainMode::Exact) {
    const double k0 = synthesis.kappa_decay;
    const double k1 = *synthesis.kappa_growth;
    bool found = k1 == 0.0;
    rep.tau1 = 0.0;
    for (std::size_t i = 0; i < trace.times.size() && !found; ++i) {
      const double tau = schedule.tau_of_t(trace.times[i]);
      if (k0 - k1 * horizon * std::exp(-tau) > 0.0) {
        rep.tau1 = tau;
        found = true;
      }
    }
    if (!found) rep.tau1 = std::log(2.0 * horizon * k1 / k0);
    rep.kappa = k0 - k1 * horizon * std::exp(-rep.tau1);
    rep.log_overshoot = horizon * k1 * rep.tau1;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
      log_env[i] = -rep.kappa * schedule.tau_of_t(trace.times[i]) + rep.log_overshoot + log_v0;
    }
  } else {
    const double gamma = synthesis.gamma.value_or(0.0);
    const double gamma_plateau = synthesis.gamma_plateau.value_or(0.0);
    rep.kappa = gamma;
    double log_v_switch = log_v0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
      const double t = trace.times[i];
      if (schedule.in_warp(t)) {
        log_env[i] = -gamma * schedule.tau_of_t(t) + log_v0;
      } else {
        if (i > 0 && schedule.in_warp(trace.times[i - 1])) log_v_switch = std::log(trace.lyapunov[i]);
        log_env[i] = -gamma_plateau * (t - schedule.switch_time()) + log_v_switch;
      }
    }
  }
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    trace.envelope[i] = std::exp(log_env[i]);
    const double v = trace.lyapunov[i];
    if (v > 0.0 && std::log(v) > log_env[i] + log_slack) {
      ++rep.violations;
      trace.violations.push_back({trace.times[i], "lyapunov_decay", std::log(v) - log_env[i], 0});
    }
  }
  rep.passed = rep.violations == 0;
  return rep;
}

TrackingReport monitor_tracking_bound(SimTrace& trace, const SynthesisResult& synthesis, const GainSchedule& schedule) {
  TrackingReport rep;
  double floor = linalg::lambda_min_sym(synthesis.lyap_controller);
  if (synthesis.lyap_observer.size() > 0) {
    floor = std::min(floor, synthesis.observer_weight * linalg::lambda_min_sym(synthesis.lyap_observer));
  }
  const double slack = 1.0 + 1e-9;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    const double r = schedule.r(t);
    const double scaled = trace.primary[i].norm() + trace.observer_error[i].norm();
    const double from_lyapunov = 2.0 * std::sqrt(std::max(trace.lyapunov[i], 0.0) / floor);
    const double bound = std::min(scaled, from_lyapunov) / r;
    for (int k = 1; k <= trace.followers; ++k) {
      const double err = (trace.states[i].row(k) - trace.states[i].row(0)).norm();
      if (bound > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, err / bound);
      if (err > bound * slack) {
        ++rep.violations;
        trace.violations.push_back({t, "tracking_bound", err - bound, k});
      }
    }
  }
  if (schedule.mode() == GainMode::Practical && !trace.times.empty()) {
    const double horizon = schedule.horizon();
    const double delta = schedule.delta();
    const double gamma = synthesis.gamma.value_or(0.0);
    rep.residual_radius = 2.0 * delta * std::sqrt(trace.lyapunov.front()) * std::pow(delta / horizon, gamma / 2.0) /
                          (synthesis.b * std::sqrt(floor));
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
      if (trace.times[i] < schedule.switch_time()) continue;
      for (int k = 1; k <= trace.followers; ++k) {
        rep.residual_error = std::max(rep.residual_error, (trace.states[i].row(k) - trace.states[i].row(0)).norm());
      }
      if (rep.residual_error > rep.residual_radius) {
        ++rep.violations;
        trace.violations.push_back({trace.times[i], "residual_set", rep.residual_error - rep.residual_radius, 0});
      }
      break;
    }
  }
  rep.passed = rep.violations == 0;
  return rep;
}

double max_tracking_error(const SimTrace& trace, double t_query, bool use_estimates) {
  if (trace.times.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  const double t_last = trace.times.back();
  if (t_query < trace.times.front() || t_query > t_last + 1e-12 * std::max(1.0, t_last)) {
    throw Error(ErrorCode::OutOfDomain, "query time outside the simulated interval");
  }
  const auto& rows = use_estimates ? trace.estimates : trace.states;
  auto it = std::lower_bound(trace.times.begin(), trace.times.end(), t_query);
  std::size_t hi = it == trace.times.end() ? trace.times.size() - 1 : static_cast<std::size_t>(it - trace.times.begin());
  std::size_t lo = hi == 0 ? 0 : hi - 1;
  double w = 0.0;
  if (hi != lo && trace.times[hi] > trace.times[lo]) {
    w = std::clamp((t_query - trace.times[lo]) / (trace.times[hi] - trace.times[lo]), 0.0, 1.0);
  } else {
    lo = hi;
  }
  const MatrixXd m = (1.0 - w) * rows[lo] + w * rows[hi];
  double worst = 0.0;
  for (int k = 1; k <= trace.followers; ++k) worst = std::max(worst, (m.row(k) - m.row(0)).norm());
  return worst;
}

bool check_consensus(const SimTrace& trace, double t_query, double tol, bool use_estimates) {
  return max_tracking_error(trace, t_query, use_estimates) <= tol;
}

}  // namespace ptc
