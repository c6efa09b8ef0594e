#include "ptc/time_warp.hpp"

#include <cmath>
#include <string>

#include "ptc/errors.hpp"

namespace ptc {

GainSchedule::GainSchedule(GainMode mode, double horizon, double switch_time, double delta, double b, int order)
    : mode_(mode), horizon_(horizon), switch_time_(switch_time), delta_(delta), b_(b), order_(order) {
  if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "gain coefficient b must be positive");
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "system order must be at least 1");
}

GainSchedule GainSchedule::exact(double horizon, double b, int order) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
  return GainSchedule(GainMode::Exact, horizon, horizon, 0.0, b, order);
}

GainSchedule GainSchedule::practical(double t_f, double delta, double b, int order) {
  if (!(t_f > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_f and delta must be positive");
  return GainSchedule(GainMode::Practical, t_f + delta, t_f, delta, b, order);
}

bool GainSchedule::in_warp(double t) const { return t < switch_time_; }

void GainSchedule::check_time(double t) const {
  if (!(t >= 0.0)) throw Error(ErrorCode::OutOfDomain, "time must be non-negative, got " + std::to_string(t));
  if (mode_ == GainMode::Exact && t >= horizon_ * (1.0 - 1e-12)) {
    throw Error(ErrorCode::OutOfDomain, "time " + std::to_string(t) + " is at or past the horizon");
  }
}

double GainSchedule::alpha(double t) const {
  check_time(t);
  if (mode_ == GainMode::Practical && t >= switch_time_) return 1.0 / delta_;
  return 1.0 / (horizon_ - t);
}

double GainSchedule::tau_of_t(double t) const {
  check_time(t);
  if (!in_warp(t)) throw Error(ErrorCode::OutOfDomain, "warped time is undefined after t_f");
  return std::log(horizon_ / (horizon_ - t));
}

double GainSchedule::t_of_tau(double tau) const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error(ErrorCode::OutOfDomain, "tau must be finite and >= 0");
  const double t = horizon_ * (1.0 - std::exp(-tau));
  if (mode_ == GainMode::Practical && t >= switch_time_) {
    throw Error(ErrorCode::OutOfDomain, "tau maps past t_f");
  }
  return t;
}

Eigen::VectorXd GainSchedule::scaling_diag(double t) const {
  const double rt = r(t);
  Eigen::VectorXd out(order_);
  double p = 1.0;
  for (int i = order_ - 1; i >= 0; --i) {
    p *= rt;
    out(i) = p;
  }
  return out;
}

GainSchedule::Scaling GainSchedule::scaling_matrix(double t) const {
  const Eigen::VectorXd d = scaling_diag(t);
  return {d.asDiagonal(), d.cwiseInverse().asDiagonal()};
}

Eigen::VectorXd GainSchedule::injection_diag(double t) const {
  const double rt = r(t);
  Eigen::VectorXd out(order_);
  double p = 1.0;
  for (int i = 0; i < order_; ++i) {
    p *= rt;
    out(i) = p;
  }
  return out;
}

}  // namespace ptc
