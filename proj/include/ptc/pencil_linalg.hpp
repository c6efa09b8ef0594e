#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ptc::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dead-band for sign decisions, relative to the Frobenius norm.
inline constexpr double kDefinitenessTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

// Symmetric pencil Q1 - lambda Q2. Build with make_pencil.
struct Pencil {
  MatrixXd q1;
  MatrixXd q2;
};

// Validates shapes and symmetry, then stores the exactly symmetrized matrices.
Pencil make_pencil(const MatrixXd& q1, const MatrixXd& q2);

enum class Definiteness { SPD, SND, SymmetricIndefinite };

struct DefinitenessClass {
  Definiteness tag = Definiteness::SymmetricIndefinite;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

struct GeneralizedSpectrum {
  std::vector<double> values;                 // real finite eigenvalues, ascending
  std::vector<std::complex<double>> nonreal;  // excluded from values
  int infinite_count = 0;
};

// Requires invertible Q2 (SingularQ2 otherwise).
GeneralizedSpectrum generalized_eigenvalues(const Pencil& p);

// Finite eigenvalues when Q2 is semidefinite, possibly singular. The null space of Q2 is
// eliminated through a Schur complement of Q1. Throws SingularPencil when that block of Q1
// is singular too, or when a singular Q2 is indefinite.
GeneralizedSpectrum finite_generalized_eigenvalues(const Pencil& p);

// Largest eigenvalue; Q2 must be SPD.
double pencil_threshold_max(const Pencil& p);
// Smallest eigenvalue; both Q1 and Q2 must be SND.
double pencil_threshold_min(const Pencil& p);
// Largest finite eigenvalue; Q2 must be positive semidefinite.
double finite_threshold_max(const Pencil& p);

// Solves P a + a^T P = -q for symmetric q. a must be Hurwitz.
MatrixXd solve_lyapunov_equation(const MatrixXd& a, const MatrixXd& q);

// P = rho * P0 with P0 a + a^T P0 = -rhs_scale I and rho = max(1, 1/lambda_min(P0 d + d P0)),
// so that P d + d P >= I. d must be diagonal with positive entries.
MatrixXd solve_lyapunov_pair(const MatrixXd& a, const MatrixXd& d, double rhs_scale);

MatrixXd elementwise_abs(const MatrixXd& q);
DefinitenessClass classify_definiteness(const MatrixXd& q);

MatrixXd symmetric_part(const MatrixXd& q);
MatrixXd diagonal_part(const MatrixXd& q);
MatrixXd kron(const MatrixXd& a, const MatrixXd& b);
double lambda_max_sym(const MatrixXd& q);
double lambda_min_sym(const MatrixXd& q);
double max_real_eigenvalue(const MatrixXd& a);
double spectral_radius(const MatrixXd& a);
double spectral_norm(const MatrixXd& a);

}  // namespace ptc::linalg
