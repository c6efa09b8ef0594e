#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptc/gain_synthesis.hpp"
#include "ptc/mas_plant.hpp"

namespace ptc {

struct SimOptions {
  double h_max = 1e-4;
  double h_frac = 1e-2;    // h <= h_frac (T - t) while the gain rises
  double eps_stop = 1e-3;  // exact mode stops at T - eps_stop
  double t_end = 0.0;      // practical mode end time
  int output_stride = 1;
  double stability_safety = 1.0;  // h <= safety / (r sigma + L_F)
  std::int64_t max_steps = 20'000'000;
  double h_min = 1e-14;
};

struct Violation {
  double t = 0.0;
  std::string monitor;
  double excess = 0.0;
  int agent = 0;
};

struct SimTrace {
  int order = 0;
  int followers = 0;
  Protocol protocol = Protocol::OutputFeedback;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> states;     // (N+1) x n each
  std::vector<Eigen::MatrixXd> estimates;  // (N+1) x n each
  std::vector<Eigen::VectorXd> inputs;     // N+1 each
  std::vector<Eigen::VectorXd> primary;    // eta or eta_hat, stacked
  std::vector<Eigen::VectorXd> observer_error;
  std::vector<double> lyapunov;
  std::vector<double> envelope;  // filled by monitor_lyapunov_decay; NaN when skipped
  std::vector<Violation> violations;
  std::int64_t steps = 0;
};

// Fastest mode is about r(t) * sigma + lipschitz; the step rule keeps h below safety / that.
struct StepScale {
  double sigma = 0.0;      // max spectral radius of the closed-loop and observer matrices
  double lipschitz = 0.0;  // largest growth-rate sum over agents
};

StepScale step_scale(const ClosedLoop& loop, const SystemMatrices& sys);

// Number of RK4 steps the step rule would take, without integrating. Stops counting past max_steps.
std::int64_t planned_steps(const ClosedLoop& loop, const SimOptions& opts, const StepScale& scale);

// Fixed-rule RK4. Exact mode stops at T - eps_stop; practical mode runs to t_end and lands on t_f.
// Throws StepUnderflow, StepBudgetExceeded, NonFinite.
SimTrace integrate(const ClosedLoop& loop, const SystemMatrices& sys, const SynthesisResult& synthesis,
                   const SimOptions& opts);

// V = eta^T P_c eta (state feedback) or c eps^T P_0 eps + eta_hat^T P_c eta_hat.
double lyapunov_value(const SynthesisResult& synthesis, const Eigen::VectorXd& primary,
                      const Eigen::VectorXd& observer_error);

struct DecayReport {
  bool evaluated = false;  // false when growth rates are unknown
  bool passed = true;
  double tau1 = 0.0;
  double kappa = 0.0;
  double log_overshoot = 0.0;  // ln M
  std::size_t violations = 0;
};

// Fills trace.envelope and appends violations where V > envelope (1 + tol_rel).
DecayReport monitor_lyapunov_decay(SimTrace& trace, const SynthesisResult& synthesis, const GainSchedule& schedule,
                                   double tol_rel);

struct TrackingReport {
  bool passed = true;
  std::size_t violations = 0;
  double worst_ratio = 0.0;     // max |x_k - x_0| / bound
  double residual_radius = 0.0; // practical: bound on |x_k - x_0| at t_f
  double residual_error = 0.0;  // practical: max |x_k - x_0| at t_f
};

// Pointwise: |x_k - x_0| <= (|eta_hat| + |eps|)/r, and the envelope-derived bound.
TrackingReport monitor_tracking_bound(SimTrace& trace, const SynthesisResult& synthesis, const GainSchedule& schedule);

// max_k |x_k - x_0|, or |x_hat_k - x_hat_0| with use_estimates, at t_query, linear interpolation between samples.
double max_tracking_error(const SimTrace& trace, double t_query, bool use_estimates = false);
bool check_consensus(const SimTrace& trace, double t_query, double tol, bool use_estimates = false);

}  // namespace ptc
