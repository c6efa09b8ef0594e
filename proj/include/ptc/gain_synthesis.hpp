#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptc/graph_topology.hpp"

namespace ptc {

// Stacked matrices for N followers of order n, agent-major ordering
// (agent k occupies entries (k-1)n .. kn-1).
struct SystemMatrices {
  int order = 0;      // n
  int followers = 0;  // N
  Eigen::MatrixXd chain;             // n x n shift matrix
  Eigen::RowVectorXd feedback_gain;  // K
  Eigen::RowVectorXd observer_gain;  // G; empty for state feedback only
  Eigen::MatrixXd laplacian_bar;
  Eigen::MatrixXd closed_loop;        // I kron A - Lbar kron (B K)
  Eigen::MatrixXd observer_loop;      // I kron (A - G^T C); empty without G
  Eigen::MatrixXd degree_weights;     // I kron diag(n, ..., 1)
  Eigen::MatrixXd output_injection;   // I kron [G^T 0 ... 0]; empty without G
  std::optional<Eigen::MatrixXd> growth_bound;  // blockdiag of lower-triangular growth-rate blocks
};

// growth_rates: one length-n vector per follower, or none when unknown.
// Throws NotHurwitz, DimensionMismatch.
SystemMatrices build_system_matrices(int order, const GraphTopology& topology, const Eigen::RowVectorXd& feedback_gain,
                                     const Eigen::RowVectorXd& observer_gain,
                                     const std::optional<std::vector<Eigen::VectorXd>>& growth_rates);

// Symmetric matrix M with the claim M <= 0.
struct Certificate {
  std::string name;
  Eigen::MatrixXd matrix;
  double lambda_max = 0.0;
  double tolerance = 0.0;  // 1e-7 (1 + ||M||_F)
  bool passed() const { return lambda_max <= tolerance; }
};

Certificate make_certificate(std::string name, const Eigen::MatrixXd& matrix);

enum class SynthesisMode { StateFeedback, OutputFeedback, Practical };

const char* to_string(SynthesisMode mode);

struct SynthesisResult {
  SynthesisMode mode = SynthesisMode::StateFeedback;
  double horizon = 0.0;  // T, or t_f + delta in practical mode
  double t_f = 0.0;
  double delta = 0.0;
  Eigen::MatrixXd lyap_controller;  // P_c
  Eigen::MatrixXd lyap_observer;    // P_0; empty for state feedback
  double observer_weight = 0.0;     // c
  double b = 0.0;
  double b_plateau = 0.0;  // b from the saturated-gain inequality alone (practical)
  // Decay rate: kappa_0 (state feedback) or kappa_a.
  double kappa_decay = 0.0;
  // Growth penalty: kappa_1 or kappa_b. Only with known growth rates.
  std::optional<double> kappa_growth;
  // Intermediate: kappa_2 or the cross-term bound of the output-feedback chain.
  std::optional<double> kappa_growth_aux;
  double diag_ratio_controller = 0.0;  // delta_Ac, in (0, 1]
  double diag_ratio_observer = 0.0;    // delta_A0
  double c1 = 0.0;
  double dtheta = 0.0;
  double pc_margin = 0.0;
  double admissible_dtheta = 0.0;            // 1/||P_c A_g||_2
  double admissible_dtheta_frobenius = 0.0;  // 1/||P_c A_g||_F
  std::optional<double> gamma;       // practical decay rate before t_f
  std::optional<double> gamma_plateau;  // after t_f
  std::vector<Certificate> certificates;

  bool all_certificates_pass() const;
};

// State feedback, exact prescribed time T.
SynthesisResult synthesize_state_feedback(const SystemMatrices& sys, double kappa0, double horizon);

struct OutputFeedbackOptions {
  double kappa_a = 0.001;
  double c1 = 0.9;
  double horizon = 1.0;
  double dtheta = 0.0;      // worst-case sensor deviation
  double pc_margin = 0.01;  // strictness of the controller Lyapunov inequality
};

// Output feedback with the observer, exact prescribed time.
// Throws SensitivityInadmissible when dtheta >= 1/||P_c A_g||_2.
SynthesisResult synthesize_output_feedback(const SystemMatrices& sys, const OutputFeedbackOptions& opts);

struct PracticalOptions {
  double t_f = 1.0;
  double delta = 0.1;
  double kappa_a = 0.001;
  double kappa_margin = 0.01;  // kappa_a >= kappa_b (t_f + delta) + margin
  double c1 = 0.9;
  double dtheta = 0.0;
  double pc_margin = 0.01;
};

// Requires growth rates (MissingGrowthRates).
SynthesisResult synthesize_practical(const SystemMatrices& sys, const PracticalOptions& opts);

struct SensitivityCheck {
  bool admissible = false;
  double worst = 0.0;
  double margin = 0.0;  // bound - worst
};

SensitivityCheck check_sensitivity_admissible(const SynthesisResult& result, std::span<const double> dtheta);

// Rebuilds every certificate from the stored ingredients of result.
std::vector<Certificate> assemble_certificates(const SystemMatrices& sys, const SynthesisResult& result);

}  // namespace ptc
