#pragma once

// Independent route to generalized eigenvalues: expand det(Q1 - s Q2) by cofactors into a
// polynomial in s, then take its real roots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ptc::test {

// Coefficients, lowest degree first.
using Poly = std::vector<double>;

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Poly poly_scale(const Poly& a, double s) {
  Poly out = a;
  for (double& c : out) c *= s;
  return out;
}

inline double poly_eval(const Poly& p, double x) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

inline Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly out(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) out[i - 1] = static_cast<double>(i) * p[i];
  return out;
}

// Laplace expansion along the first row of a matrix of linear polynomials.
inline Poly cofactor_det(const std::vector<std::vector<Poly>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Poly total{0.0};
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<std::vector<Poly>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Poly> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != col) row.push_back(m[r][c]);
      minor.push_back(std::move(row));
    }
    const Poly term = poly_mul(m[0][col], cofactor_det(minor));
    total = poly_add(total, poly_scale(term, col % 2 == 0 ? 1.0 : -1.0));
  }
  return total;
}

inline Poly pencil_det_poly(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2) {
  const auto n = static_cast<std::size_t>(q1.rows());
  std::vector<std::vector<Poly>> m(n, std::vector<Poly>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      m[i][j] = {q1(ii, jj), -q2(ii, jj)};
    }
  return cofactor_det(m);
}

inline double newton_polish(const Poly& p, double x) {
  const Poly dp = poly_derivative(p);
  for (int it = 0; it < 50; ++it) {
    const double d = poly_eval(dp, x);
    if (d == 0.0) break;
    const double step = poly_eval(p, x) / d;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// Real roots: closed form up to degree 3, companion matrix for degree 4 and above;
// every root is then refined by Newton's method on p itself.
inline std::vector<double> real_roots(Poly p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  const std::size_t deg = p.size() - 1;
  std::vector<double> roots;
  if (deg == 1) {
    roots.push_back(-p[0] / p[1]);
  } else if (deg == 2) {
    const double a = p[2], b = p[1], c = p[0];
    const double disc = std::max(b * b - 4 * a * c, 0.0);
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    roots.push_back(q / a);
    roots.push_back(c / q);
  } else if (deg == 3) {
    // Depressed cubic t^3 + P t + Q with x = t - b/(3a); three real roots by the trigonometric form.
    const double a = p[3], b = p[2] / a, c = p[1] / a, d = p[0] / a;
    const double P = c - b * b / 3.0;
    const double Q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    if (P < 0.0) {
      const double m = 2.0 * std::sqrt(-P / 3.0);
      const double arg = std::clamp(3.0 * Q / (P * m), -1.0, 1.0);
      const double phi = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(phi - 2.0 * M_PI * k / 3.0) - b / 3.0);
    } else {
      const double disc = Q * Q / 4.0 + P * P * P / 27.0;
      const double s = std::cbrt(-Q / 2.0 + std::sqrt(std::max(disc, 0.0)));
      const double t = std::cbrt(-Q / 2.0 - std::sqrt(std::max(disc, 0.0)));
      roots.push_back(s + t - b / 3.0);
    }
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
    for (std::size_t i = 1; i < deg; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < deg; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -p[i] / p[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const std::complex<double> z = es.eigenvalues()(i);
      if (std::abs(z.imag()) <= 1e-6 * std::max(1.0, std::abs(z))) roots.push_back(z.real());
    }
  }
  for (double& r : roots) r = newton_polish(p, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace ptc::test
