#include "ptc/pencil_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptc/errors.hpp"

namespace ptc::linalg {
namespace {

void require_square(const MatrixXd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be a non-empty square matrix");
  }
}

void require_symmetric(const MatrixXd& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw Error(ErrorCode::NotSymmetric, std::string(what) + " is not symmetric");
  }
}

MatrixXd columns(const MatrixXd& m, const std::vector<Eigen::Index>& idx) {
  MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
  return out;
}

std::vector<double> sorted_eigenvalues(const MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetric_part(sym), Eigen::EigenvaluesOnly);
  const VectorXd& ev = eig.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

GeneralizedSpectrum general_route(const Pencil& p) {
  GeneralizedSpectrum out;
  Eigen::EigenSolver<MatrixXd> es(p.q2.partialPivLu().solve(p.q1), false);
  const auto& ev = es.eigenvalues();
  double scale = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > 1e-8 * scale) {
      out.nonreal.push_back(ev(i));
    } else {
      out.values.push_back(ev(i).real());
    }
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

GeneralizedSpectrum reduce(const Pencil& p, bool allow_singular) {
  require_square(p.q1, "Q1");
  require_square(p.q2, "Q2");
  if (p.q1.rows() != p.q2.rows()) throw Error(ErrorCode::DimensionMismatch, "Q1 and Q2 differ in size");

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig2(p.q2);
  const VectorXd& d = eig2.eigenvalues();
  const MatrixXd& u = eig2.eigenvectors();
  const double scale = d.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw Error(allow_singular ? ErrorCode::SingularPencil : ErrorCode::SingularQ2, "Q2 is zero");

  std::vector<Eigen::Index> range, null;
  int positive = 0;
  int negative = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(d(i)) <= 1e-12 * scale) {
      null.push_back(i);
    } else {
      range.push_back(i);
      (d(i) > 0 ? positive : negative) += 1;
    }
  }
  if (!null.empty() && !allow_singular) throw Error(ErrorCode::SingularQ2, "Q2 is singular");
  if (positive > 0 && negative > 0) {
    if (!null.empty()) throw Error(ErrorCode::SingularPencil, "Q2 is singular and indefinite");
    return general_route(p);
  }
  const double sign = positive > 0 ? 1.0 : -1.0;

  const MatrixXd ur = columns(u, range);
  MatrixXd reduced = ur.transpose() * p.q1 * ur;
  if (!null.empty()) {
    const MatrixXd uz = columns(u, null);
    const MatrixXd a22 = symmetric_part(uz.transpose() * p.q1 * uz);
    const MatrixXd a12 = ur.transpose() * p.q1 * uz;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig22(a22, Eigen::EigenvaluesOnly);
    const double q1_scale = std::max(p.q1.norm(), 1e-300);
    if (eig22.eigenvalues().cwiseAbs().minCoeff() <= 1e-12 * q1_scale) {
      throw Error(ErrorCode::SingularPencil, "Q1 is singular on the null space of Q2");
    }
    reduced -= a12 * a22.ldlt().solve(a12.transpose());
  }
  VectorXd inv_sqrt(static_cast<Eigen::Index>(range.size()));
  for (std::size_t i = 0; i < range.size(); ++i) {
    inv_sqrt(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(std::abs(d(range[i])));
  }
  const MatrixXd whitened = sign * (inv_sqrt.asDiagonal() * reduced * inv_sqrt.asDiagonal());

  GeneralizedSpectrum out;
  out.values = sorted_eigenvalues(whitened);
  out.infinite_count = static_cast<int>(null.size());
  return out;
}

}  // namespace

Pencil make_pencil(const MatrixXd& q1, const MatrixXd& q2) {
  require_square(q1, "Q1");
  require_square(q2, "Q2");
  if (q1.rows() != q2.rows()) throw Error(ErrorCode::DimensionMismatch, "Q1 and Q2 differ in size");
  require_symmetric(q1, "Q1");
  require_symmetric(q2, "Q2");
  return {symmetric_part(q1), symmetric_part(q2)};
}

GeneralizedSpectrum generalized_eigenvalues(const Pencil& p) { return reduce(p, false); }

GeneralizedSpectrum finite_generalized_eigenvalues(const Pencil& p) { return reduce(p, true); }

double pencil_threshold_max(const Pencil& p) {
  if (classify_definiteness(p.q2).tag != Definiteness::SPD) {
    throw Error(ErrorCode::NotSPD, "second pencil matrix must be positive definite");
  }
  return generalized_eigenvalues(p).values.back();
}

double pencil_threshold_min(const Pencil& p) {
  if (classify_definiteness(p.q1).tag != Definiteness::SND) {
    throw Error(ErrorCode::NotSND, "first pencil matrix must be negative definite");
  }
  if (classify_definiteness(p.q2).tag != Definiteness::SND) {
    throw Error(ErrorCode::NotSND, "second pencil matrix must be negative definite");
  }
  return generalized_eigenvalues(p).values.front();
}

double finite_threshold_max(const Pencil& p) {
  const DefinitenessClass cls = classify_definiteness(p.q2);
  const double scale = std::max(p.q2.norm(), 1e-300);
  if (cls.min_eig < -kDefinitenessTolerance * scale) {
    throw Error(ErrorCode::NotSPD, "second pencil matrix must be positive semidefinite");
  }
  const GeneralizedSpectrum s = finite_generalized_eigenvalues(p);
  if (s.values.empty()) throw Error(ErrorCode::SingularPencil, "pencil has no finite eigenvalue");
  return s.values.back();
}

MatrixXd solve_lyapunov_equation(const MatrixXd& a, const MatrixXd& q) {
  require_square(a, "a");
  require_square(q, "q");
  if (a.rows() != q.rows()) throw Error(ErrorCode::DimensionMismatch, "a and q differ in size");
  require_symmetric(q, "q");
  const double margin = kDefinitenessTolerance * std::max(1.0, a.norm());
  if (max_real_eigenvalue(a) >= -margin) throw Error(ErrorCode::NotHurwitz, "matrix is not Hurwitz");

  const Eigen::Index m = a.rows();
  const MatrixXd eye = MatrixXd::Identity(m, m);
  // Column-major vec: vec(P a) = (a^T kron I) vec P, vec(a^T P) = (I kron a^T) vec P.
  const MatrixXd op = kron(a.transpose(), eye) + kron(eye, a.transpose());
  const VectorXd rhs = -Eigen::Map<const VectorXd>(q.data(), m * m);
  const VectorXd vec_p = op.partialPivLu().solve(rhs);
  return symmetric_part(Eigen::Map<const MatrixXd>(vec_p.data(), m, m));
}

MatrixXd solve_lyapunov_pair(const MatrixXd& a, const MatrixXd& d, double rhs_scale) {
  require_square(d, "d");
  if (d.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "a and d differ in size");
  if (!(rhs_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "rhs_scale must be positive");
  const MatrixXd off = d - MatrixXd(d.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() != 0.0 || d.diagonal().minCoeff() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "d must be diagonal with positive entries");
  }
  const Eigen::Index m = a.rows();
  const MatrixXd p0 = solve_lyapunov_equation(a, rhs_scale * MatrixXd::Identity(m, m));
  const double floor = lambda_min_sym(p0 * d + d * p0);
  if (floor <= 0.0) {
    throw Error(ErrorCode::Infeasible, "P0 d + d P0 is not positive definite; scaling cannot enforce the bound");
  }
  return std::max(1.0, 1.0 / floor) * p0;
}

MatrixXd elementwise_abs(const MatrixXd& q) { return q.cwiseAbs(); }

DefinitenessClass classify_definiteness(const MatrixXd& q) {
  require_square(q, "matrix");
  require_symmetric(q, "matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetric_part(q), Eigen::EigenvaluesOnly);
  DefinitenessClass out;
  out.min_eig = eig.eigenvalues().minCoeff();
  out.max_eig = eig.eigenvalues().maxCoeff();
  const double band = kDefinitenessTolerance * q.norm();
  if (q.norm() > 0.0 && out.min_eig > band) {
    out.tag = Definiteness::SPD;
  } else if (q.norm() > 0.0 && out.max_eig < -band) {
    out.tag = Definiteness::SND;
  }
  return out;
}

MatrixXd symmetric_part(const MatrixXd& q) { return 0.5 * (q + q.transpose()); }

MatrixXd diagonal_part(const MatrixXd& q) { return q.diagonal().asDiagonal(); }

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double lambda_max_sym(const MatrixXd& q) { return sorted_eigenvalues(q).back(); }

double lambda_min_sym(const MatrixXd& q) { return sorted_eigenvalues(q).front(); }

double max_real_eigenvalue(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

double spectral_radius(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const MatrixXd& a) {
  Eigen::JacobiSVD<MatrixXd> svd(a);
  return svd.singularValues()(0);
}

}  // namespace ptc::linalg
