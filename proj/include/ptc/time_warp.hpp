#pragma once

#include <Eigen/Dense>

namespace ptc {

enum class GainMode { Exact, Practical };

// Time-varying gain r(t) = b * alpha(t).
//   exact:     alpha = 1/(T - t) on [0, T)
//   practical: alpha = 1/(t_f + delta - t) on [0, t_f), then 1/delta
class GainSchedule {
 public:
  static GainSchedule exact(double horizon, double b, int order);
  static GainSchedule practical(double t_f, double delta, double b, int order);

  GainMode mode() const { return mode_; }
  double horizon() const { return horizon_; }  // T, or t_f + delta
  double switch_time() const { return switch_time_; }  // t_f; equals T in exact mode
  double delta() const { return delta_; }
  double b() const { return b_; }
  int order() const { return order_; }

  // True while the gain is still rising, i.e. the warped clock tau is defined.
  bool in_warp(double t) const;

  double alpha(double t) const;
  double r(double t) const { return b_ * alpha(t); }

  // tau = ln(T/(T - t)) on the rising segment.
  double tau_of_t(double t) const;
  double t_of_tau(double tau) const;

  // Diagonal of Lambda_r = diag(r^n, ..., r).
  Eigen::VectorXd scaling_diag(double t) const;
  struct Scaling {
    Eigen::MatrixXd forward;  // Lambda_r
    Eigen::MatrixXd inverse;
  };
  Scaling scaling_matrix(double t) const;

  // Entries r^i, i = 1..n: observer injection weights.
  Eigen::VectorXd injection_diag(double t) const;

 private:
  GainSchedule(GainMode mode, double horizon, double switch_time, double delta, double b, int order);
  void check_time(double t) const;

  GainMode mode_;
  double horizon_;
  double switch_time_;
  double delta_;
  double b_;
  int order_;
};

}  // namespace ptc
