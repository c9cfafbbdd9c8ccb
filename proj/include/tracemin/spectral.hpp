#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tracemin/common.hpp"

namespace tracemin {

inline constexpr double kSymmetryTol = 1e-9;
inline constexpr double kStochasticTol = 1e-9;
inline constexpr double kSpectralMargin = 1e-12;
inline constexpr double kRadiusTieTol = 1e-9;

inline bool is_symmetric(const Matrix& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// All eigenvalues of a symmetric matrix, sorted descending.
inline std::vector<double> symmetric_eigenvalues(const Matrix& m) {
  require(m.rows() == m.cols(), "symmetric_eigenvalues: matrix must be square");
  require(is_symmetric(m), "symmetric_eigenvalues: matrix is not symmetric");
  if (m.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFault("symmetric eigen solve did not converge");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

struct SpectralReport {
  std::vector<double> eigenvalues;  // descending
  double mu = 0.0;                  // max{lambda_2, -lambda_n}
  double rho = 0.0;                 // max{lambda_1, -lambda_n}
  double gap = 0.0;                 // 1 - mu
  double tau = 0.0;                 // rho if rho > 1, else mu
};

inline SpectralReport spectral_report_from(std::vector<double> ev) {
  require(!ev.empty(), "spectral_report: empty spectrum");
  SpectralReport r;
  r.eigenvalues = std::move(ev);
  const auto& l = r.eigenvalues;
  const double first = l.front(), last = l.back();
  const double second = l.size() > 1 ? l[1] : -std::numeric_limits<double>::infinity();
  r.mu = l.size() > 1 ? std::max(second, -last) : 0.0;
  r.rho = std::max(first, -last);
  r.gap = 1.0 - r.mu;
  r.tau = (r.rho - 1.0 > kRadiusTieTol) ? r.rho : r.mu;
  return r;
}

inline SpectralReport spectral_report(const Matrix& w) {
  return spectral_report_from(symmetric_eigenvalues(w));
}

/// Second largest eigenvalue modulus.
inline double mu_of(const Matrix& w) { return spectral_report(w).mu; }

/// M^k by repeated squaring.
inline Matrix matrix_power(const Matrix& m, int k) {
  require(k >= 0, "matrix_power: negative exponent");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

/// Tr(W^p) for symmetric W and even p, computed as ||W^{p/2}||_F^2.
inline double trace_power(const Matrix& w, int p) {
  require(is_even_power(p), "trace_power: p must be an even integer >= 2");
  require(w.rows() == w.cols(), "trace_power: matrix must be square");
  return matrix_power(w, p / 2).squaredNorm();
}

/// Tr(W^p) summed over the eigenvalues; the second route for trace_power.
inline double trace_power_spectral(const Matrix& w, int p) {
  require(is_even_power(p), "trace_power: p must be an even integer >= 2");
  double s = 0.0;
  for (double l : symmetric_eigenvalues(w)) s += std::pow(l, p);
  return s;
}

/// (sum sigma_i^p)^(1/p). Singular values of symmetric input are |lambda_i|.
inline double schatten_norm(const Matrix& m, int p) {
  require(p >= 1, "schatten_norm: p must be >= 1");
  std::vector<double> sigma;
  if (is_symmetric(m)) {
    for (double l : symmetric_eigenvalues(m)) sigma.push_back(std::abs(l));
  } else {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    sigma.assign(s.data(), s.data() + s.size());
  }
  double acc = 0.0;
  for (double s : sigma) acc += std::pow(s, p);
  return std::pow(acc, 1.0 / p);
}

struct ConvergenceVerdict {
  bool convergent = false;
  std::vector<std::string> reasons;  // one entry per violated condition
  explicit operator bool() const { return convergent; }
};

/// Checks 1^T W = 1^T, W 1 = 1 and rho(W - 11^T/n) < 1.
inline ConvergenceVerdict check_convergent(const Matrix& w) {
  ConvergenceVerdict v;
  if (w.rows() != w.cols() || w.rows() == 0) {
    v.reasons.push_back("matrix is not square");
    return v;
  }
  const auto n = w.rows();
  const double col_err = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  const double row_err = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  if (col_err > kStochasticTol)
    v.reasons.push_back("column sums differ from 1 by " + std::to_string(col_err));
  if (row_err > kStochasticTol)
    v.reasons.push_back("row sums differ from 1 by " + std::to_string(row_err));

  Matrix centered = w - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  double radius;
  if (is_symmetric(centered)) {
    auto ev = symmetric_eigenvalues(centered);
    radius = std::max(std::abs(ev.front()), std::abs(ev.back()));
  } else {
    radius = Eigen::EigenSolver<Matrix>(centered, false).eigenvalues().cwiseAbs().maxCoeff();
  }
  if (!(radius < 1.0 - kSpectralMargin))
    v.reasons.push_back("spectral radius of W - 11^T/n is " + std::to_string(radius));
  v.convergent = v.reasons.empty();
  return v;
}

}  // namespace tracemin
