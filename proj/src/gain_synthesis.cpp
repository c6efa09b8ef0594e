#include "ptc/gain_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptc/errors.hpp"
#include "ptc/pencil_linalg.hpp"

namespace ptc {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using namespace linalg;

namespace {

MatrixXd blkdiag(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

MatrixXd block2(const MatrixXd& a11, const MatrixXd& a12, const MatrixXd& a21, const MatrixXd& a22) {
  MatrixXd out(a11.rows() + a21.rows(), a11.cols() + a12.cols());
  out << a11, a12, a21, a22;
  return out;
}

MatrixXd lyap_form(const MatrixXd& p, const MatrixXd& a) { return symmetric_part(p * a + a.transpose() * p); }

// max sigma(q1, q2) with an exact zero for q1 == 0.
double threshold_max(const MatrixXd& q1, const MatrixXd& q2) {
  if (q1.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return pencil_threshold_max(make_pencil(q1, q2));
}

void require_observer(const SystemMatrices& sys) {
  if (sys.observer_gain.size() != sys.order) {
    throw Error(ErrorCode::DimensionMismatch, "output feedback needs an observer gain G of length n");
  }
}

// Blocks shared by the output-feedback pencils and their certificates.
struct ObserverBlocks {
  MatrixXd s_c, s_0;    // P A + A^T P
  MatrixXd dg_c, dg_0;  // diag of the above
  MatrixXd injection;   // |P_c A_g| (1 + dtheta)
  MatrixXd dpd_c, dpd_0;  // P D + D P
};

ObserverBlocks observer_blocks(const SystemMatrices& sys, const MatrixXd& p_c, const MatrixXd& p_0, double dtheta) {
  ObserverBlocks blk;
  blk.s_c = lyap_form(p_c, sys.closed_loop);
  blk.s_0 = lyap_form(p_0, sys.observer_loop);
  blk.dg_c = diagonal_part(blk.s_c);
  blk.dg_0 = diagonal_part(blk.s_0);
  blk.injection = elementwise_abs(p_c * sys.output_injection) * (1.0 + dtheta);
  blk.dpd_c = symmetric_part(p_c * sys.degree_weights + sys.degree_weights * p_c);
  blk.dpd_0 = symmetric_part(p_0 * sys.degree_weights + sys.degree_weights * p_0);
  return blk;
}

struct WeightPencil {
  MatrixXd q1, q2;
};

WeightPencil weight_pencil(const ObserverBlocks& blk, double c1, double ratio_c, double ratio_0) {
  const auto m = blk.s_c.rows();
  WeightPencil w;
  w.q1 = blkdiag((1.0 - c1) * ratio_0 * blk.dg_0, MatrixXd::Zero(m, m));
  w.q2 = block2(MatrixXd::Zero(m, m), blk.injection.transpose(), blk.injection, (1.0 - c1) * ratio_c * blk.dg_c);
  return w;
}

MatrixXd gain_lhs(const ObserverBlocks& blk, double c1, double c) {
  const auto m = blk.s_c.rows();
  return blkdiag(c1 * c * blk.s_0, c1 * blk.s_c + 2.0 * MatrixXd::Identity(m, m));
}

MatrixXd gain_rhs(const ObserverBlocks& blk, const MatrixXd& p_c, const MatrixXd& p_0, double c, double kappa) {
  return blkdiag(c * blk.dpd_0 + c * kappa * p_0, blk.dpd_c + kappa * p_c);
}

MatrixXd plateau_rhs(const MatrixXd& p_c, const MatrixXd& p_0, double c, double kappa) {
  return blkdiag(c * kappa * p_0, kappa * p_c);
}

struct GrowthPencils {
  MatrixXd cross_weight, cross_term;  // Q_ka, Q_kb
};

GrowthPencils growth_pencils(const MatrixXd& growth, const MatrixXd& p_c, const MatrixXd& p_0, double c) {
  const auto m = p_c.rows();
  const MatrixXd abs_p0 = elementwise_abs(p_0);
  GrowthPencils g;
  g.cross_weight = -blkdiag(diagonal_part(p_0), diagonal_part(p_c));
  g.cross_term = c * block2(abs_p0 * growth + growth.transpose() * abs_p0, abs_p0 * growth,
                            growth.transpose() * abs_p0, MatrixXd::Zero(m, m));
  return g;
}

double default_tolerance(const MatrixXd& m) { return 1e-7 * (1.0 + m.norm()); }

}  // namespace

const char* to_string(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::StateFeedback: return "state_feedback";
    case SynthesisMode::OutputFeedback: return "output_feedback";
    case SynthesisMode::Practical: return "practical";
  }
  return "unknown";
}

SystemMatrices build_system_matrices(int order, const GraphTopology& topology, const RowVectorXd& feedback_gain,
                                     const RowVectorXd& observer_gain,
                                     const std::optional<std::vector<VectorXd>>& growth_rates) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "order n must be >= 1");
  if (feedback_gain.size() != order) throw Error(ErrorCode::DimensionMismatch, "K must have n entries");
  if (observer_gain.size() != 0 && observer_gain.size() != order) {
    throw Error(ErrorCode::DimensionMismatch, "G must have n entries");
  }
  const int followers = topology.n_agents;
  const MatrixXd eye_followers = MatrixXd::Identity(followers, followers);

  SystemMatrices sys;
  sys.order = order;
  sys.followers = followers;
  sys.chain = MatrixXd::Zero(order, order);
  for (int i = 0; i + 1 < order; ++i) sys.chain(i, i + 1) = 1.0;
  sys.feedback_gain = feedback_gain;
  sys.observer_gain = observer_gain;
  sys.laplacian_bar = topology.laplacian_bar;

  MatrixXd input_gain = MatrixXd::Zero(order, order);  // B K
  input_gain.row(order - 1) = feedback_gain;
  sys.closed_loop = kron(eye_followers, sys.chain) - kron(topology.laplacian_bar, input_gain);
  const double margin = kDefinitenessTolerance;
  if (max_real_eigenvalue(sys.closed_loop) >= -margin) {
    throw Error(ErrorCode::NotHurwitz, "closed-loop matrix is not Hurwitz for the given K and graph");
  }

  VectorXd weights(order);
  for (int i = 0; i < order; ++i) weights(i) = order - i;
  sys.degree_weights = kron(eye_followers, MatrixXd(weights.asDiagonal()));

  if (observer_gain.size() == order) {
    MatrixXd injection = MatrixXd::Zero(order, order);  // G^T C
    injection.col(0) = observer_gain.transpose();
    sys.observer_loop = kron(eye_followers, sys.chain - injection);
    sys.output_injection = kron(eye_followers, injection);
    if (max_real_eigenvalue(sys.observer_loop) >= -margin) {
      throw Error(ErrorCode::NotHurwitz, "observer matrix is not Hurwitz for the given G");
    }
  }

  if (growth_rates) {
    if (static_cast<int>(growth_rates->size()) != followers) {
      throw Error(ErrorCode::DimensionMismatch, "growth rates needed for every follower");
    }
    MatrixXd growth = MatrixXd::Zero(order * followers, order * followers);
    for (int k = 0; k < followers; ++k) {
      const VectorXd& rho = (*growth_rates)[static_cast<std::size_t>(k)];
      if (rho.size() != order) throw Error(ErrorCode::DimensionMismatch, "growth rate vector must have n entries");
      if (rho.minCoeff() < 0.0) throw Error(ErrorCode::InvalidArgument, "growth rates must be non-negative");
      for (int i = 0; i < order; ++i) {
        for (int j = 0; j <= i; ++j) growth(k * order + i, k * order + j) = rho(j);
      }
    }
    sys.growth_bound = growth;
  }
  return sys;
}

Certificate make_certificate(std::string name, const MatrixXd& matrix) {
  Certificate cert;
  cert.name = std::move(name);
  cert.matrix = symmetric_part(matrix);
  cert.lambda_max = lambda_max_sym(cert.matrix);
  cert.tolerance = default_tolerance(cert.matrix);
  return cert;
}

bool SynthesisResult::all_certificates_pass() const {
  return std::all_of(certificates.begin(), certificates.end(), [](const Certificate& c) { return c.passed(); });
}

SynthesisResult synthesize_state_feedback(const SystemMatrices& sys, double kappa0, double horizon) {
  if (!(kappa0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa0 must be positive");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");

  SynthesisResult res;
  res.mode = SynthesisMode::StateFeedback;
  res.horizon = horizon;
  res.kappa_decay = kappa0;
  res.lyap_controller = solve_lyapunov_pair(sys.closed_loop, sys.degree_weights, 1.0);
  const MatrixXd& p = res.lyap_controller;

  const MatrixXd q1 = symmetric_part(p * sys.degree_weights + sys.degree_weights * p) + kappa0 * p;
  const MatrixXd q2 = lyap_form(p, sys.closed_loop);
  res.b = std::max(pencil_threshold_max(make_pencil(q1, -q2)), horizon);

  if (sys.growth_bound) {
    const MatrixXd& growth = *sys.growth_bound;
    const MatrixXd abs_p = elementwise_abs(p);
    const MatrixXd p_diag = diagonal_part(p);
    const double aux = threshold_max(symmetric_part(growth.transpose() * abs_p + abs_p * growth), p_diag);
    res.kappa_growth_aux = aux;
    res.kappa_growth = threshold_max(aux * p_diag, p);
  }
  if (sys.observer_gain.size() == sys.order) {
    const double gain_norm = spectral_norm(p * sys.output_injection);
    res.admissible_dtheta = 1.0 / gain_norm;
    res.admissible_dtheta_frobenius = 1.0 / (p * sys.output_injection).norm();
  }
  res.certificates = assemble_certificates(sys, res);
  return res;
}

SynthesisResult synthesize_output_feedback(const SystemMatrices& sys, const OutputFeedbackOptions& opts) {
  require_observer(sys);
  if (!(opts.kappa_a > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa_a must be positive");
  if (!(opts.c1 > 0.0 && opts.c1 < 1.0)) throw Error(ErrorCode::InvalidArgument, "c1 must lie in (0, 1)");
  if (!(opts.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon T must be positive");
  if (!(opts.dtheta >= 0.0 && opts.dtheta < 1.0)) throw Error(ErrorCode::InvalidArgument, "dtheta must lie in [0, 1)");
  if (!(opts.pc_margin > 0.0)) throw Error(ErrorCode::InvalidArgument, "pc_margin must be positive");

  const auto m = sys.closed_loop.rows();
  const MatrixXd eye = MatrixXd::Identity(m, m);

  SynthesisResult res;
  res.mode = SynthesisMode::OutputFeedback;
  res.horizon = opts.horizon;
  res.kappa_decay = opts.kappa_a;
  res.c1 = opts.c1;
  res.dtheta = opts.dtheta;
  res.pc_margin = opts.pc_margin;
  res.lyap_controller = solve_lyapunov_equation(sys.closed_loop, (2.0 / opts.c1) * (1.0 + opts.pc_margin) * eye);
  res.lyap_observer = solve_lyapunov_equation(sys.observer_loop, eye);
  const MatrixXd& p_c = res.lyap_controller;
  const MatrixXd& p_0 = res.lyap_observer;

  const MatrixXd injection = p_c * sys.output_injection;
  res.admissible_dtheta = 1.0 / spectral_norm(injection);
  res.admissible_dtheta_frobenius = 1.0 / injection.norm();
  if (opts.dtheta >= res.admissible_dtheta) {
    throw Error(ErrorCode::SensitivityInadmissible,
                "sensor deviation " + std::to_string(opts.dtheta) + " exceeds admissible bound " +
                    std::to_string(res.admissible_dtheta));
  }

  const ObserverBlocks blk = observer_blocks(sys, p_c, p_0, opts.dtheta);
  res.diag_ratio_controller = pencil_threshold_min(make_pencil(blk.s_c, blk.dg_c));
  res.diag_ratio_observer = pencil_threshold_min(make_pencil(blk.s_0, blk.dg_0));

  const WeightPencil w = weight_pencil(blk, opts.c1, res.diag_ratio_controller, res.diag_ratio_observer);
  res.observer_weight = finite_threshold_max(make_pencil(w.q2, -w.q1));
  const double c = res.observer_weight;

  const MatrixXd lhs = gain_lhs(blk, opts.c1, c);
  res.b = std::max(pencil_threshold_max(make_pencil(gain_rhs(blk, p_c, p_0, c, opts.kappa_a), -lhs)), opts.horizon);

  if (sys.growth_bound) {
    const GrowthPencils g = growth_pencils(*sys.growth_bound, p_c, p_0, c);
    const double aux = threshold_max(g.cross_term, -g.cross_weight);
    res.kappa_growth_aux = aux;
    res.kappa_growth = threshold_max(-aux * g.cross_weight, blkdiag(c * p_0, p_c));
  }
  res.certificates = assemble_certificates(sys, res);
  return res;
}

SynthesisResult synthesize_practical(const SystemMatrices& sys, const PracticalOptions& opts) {
  if (!(opts.t_f > 0.0) || !(opts.delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_f and delta must be positive");
  if (!sys.growth_bound) throw Error(ErrorCode::MissingGrowthRates, "practical mode needs known growth rates");
  if (!(opts.kappa_margin > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa margin must be positive");
  const double horizon = opts.t_f + opts.delta;

  SynthesisResult res = synthesize_output_feedback(
      sys, {.kappa_a = opts.kappa_a, .c1 = opts.c1, .horizon = horizon, .dtheta = opts.dtheta, .pc_margin = opts.pc_margin});
  res.mode = SynthesisMode::Practical;
  res.t_f = opts.t_f;
  res.delta = opts.delta;
  const double kappa_b = *res.kappa_growth;
  res.kappa_decay = std::max(opts.kappa_a, kappa_b * horizon + opts.kappa_margin);

  const ObserverBlocks blk = observer_blocks(sys, res.lyap_controller, res.lyap_observer, opts.dtheta);
  const MatrixXd lhs = gain_lhs(blk, opts.c1, res.observer_weight);
  const double b_rising = pencil_threshold_max(
      make_pencil(gain_rhs(blk, res.lyap_controller, res.lyap_observer, res.observer_weight, res.kappa_decay), -lhs));
  res.b_plateau = std::max(
      pencil_threshold_max(
          make_pencil(plateau_rhs(res.lyap_controller, res.lyap_observer, res.observer_weight, res.kappa_decay), -lhs)),
      horizon);
  res.b = std::max({b_rising, res.b_plateau, horizon});
  res.gamma = res.kappa_decay - kappa_b * horizon;
  res.gamma_plateau = res.kappa_decay / opts.delta - kappa_b;
  res.certificates = assemble_certificates(sys, res);
  return res;
}

SensitivityCheck check_sensitivity_admissible(const SynthesisResult& result, std::span<const double> dtheta) {
  SensitivityCheck out;
  for (double d : dtheta) out.worst = std::max(out.worst, std::abs(d));
  out.margin = result.admissible_dtheta - out.worst;
  out.admissible = out.worst <= result.admissible_dtheta;
  return out;
}

std::vector<Certificate> assemble_certificates(const SystemMatrices& sys, const SynthesisResult& res) {
  std::vector<Certificate> out;
  const MatrixXd& p_c = res.lyap_controller;
  const auto m = p_c.rows();
  const MatrixXd eye = MatrixXd::Identity(m, m);

  if (res.mode == SynthesisMode::StateFeedback) {
    const MatrixXd s_c = lyap_form(p_c, sys.closed_loop);
    const MatrixXd dpd = symmetric_part(p_c * sys.degree_weights + sys.degree_weights * p_c);
    out.push_back(make_certificate("lyapunov_decrease", s_c + eye));
    out.push_back(make_certificate("degree_weight_dominance", eye - dpd));
    out.push_back(make_certificate("state_feedback_decay", res.b * s_c + dpd + res.kappa_decay * p_c));
    if (sys.growth_bound && res.kappa_growth && res.kappa_growth_aux) {
      const MatrixXd& growth = *sys.growth_bound;
      const MatrixXd abs_p = elementwise_abs(p_c);
      const MatrixXd p_diag = diagonal_part(p_c);
      out.push_back(make_certificate("growth_domination",
                                     growth.transpose() * abs_p + abs_p * growth - *res.kappa_growth_aux * p_diag));
      out.push_back(make_certificate("growth_absorption", *res.kappa_growth_aux * p_diag - *res.kappa_growth * p_c));
    }
    return out;
  }

  const MatrixXd& p_0 = res.lyap_observer;
  const double c = res.observer_weight;
  const ObserverBlocks blk = observer_blocks(sys, p_c, p_0, res.dtheta);
  out.push_back(make_certificate("controller_lyapunov", res.c1 * blk.s_c + 2.0 * eye));
  out.push_back(make_certificate("observer_lyapunov", blk.s_0 + eye));
  out.push_back(make_certificate("controller_diagonal_bound", blk.s_c - res.diag_ratio_controller * blk.dg_c));
  out.push_back(make_certificate("observer_diagonal_bound", blk.s_0 - res.diag_ratio_observer * blk.dg_0));
  const WeightPencil w = weight_pencil(blk, res.c1, res.diag_ratio_controller, res.diag_ratio_observer);
  out.push_back(make_certificate("observer_weight", c * w.q1 + w.q2));
  const MatrixXd lhs = gain_lhs(blk, res.c1, c);
  out.push_back(make_certificate("gain_coefficient", res.b * lhs + gain_rhs(blk, p_c, p_0, c, res.kappa_decay)));
  out.push_back(make_certificate("sensitivity_admissible",
                                 MatrixXd::Constant(1, 1, res.dtheta - 1.0 / spectral_norm(p_c * sys.output_injection))));
  if (sys.growth_bound && res.kappa_growth && res.kappa_growth_aux) {
    const GrowthPencils g = growth_pencils(*sys.growth_bound, p_c, p_0, c);
    out.push_back(make_certificate("growth_cross_bound", *res.kappa_growth_aux * g.cross_weight + g.cross_term));
    out.push_back(make_certificate("growth_weight_bound", -*res.kappa_growth * blkdiag(c * p_0, p_c) -
                                                              *res.kappa_growth_aux * g.cross_weight));
  }
  if (res.mode == SynthesisMode::Practical) {
    const double inv_delta = 1.0 / res.delta;
    out.push_back(make_certificate("saturated_gain_decay",
                                   res.b * inv_delta * lhs + inv_delta * plateau_rhs(p_c, p_0, c, res.kappa_decay)));
    out.push_back(make_certificate("rate_before_plateau", MatrixXd::Constant(1, 1, -res.gamma.value_or(0.0))));
    out.push_back(make_certificate("rate_after_plateau", MatrixXd::Constant(1, 1, -res.gamma_plateau.value_or(0.0))));
  }
  return out;
}

}  // namespace ptc
