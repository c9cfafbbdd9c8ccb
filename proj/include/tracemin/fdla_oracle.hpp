#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "tracemin/common.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/schatten.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"

namespace tracemin {

struct FdlaOracleOptions {
  std::size_t max_nodes = 12;
  std::map<EdgeId, double> pinned;  // links held at a fixed weight
  std::vector<double> smoothing = {10, 30, 100, 300, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6};
  int iterations_per_stage = 400;
};

struct FdlaOracleResult {
  WeightVector w;
  double mu = std::numeric_limits<double>::infinity();  // an upper bound on the optimum
};

namespace detail {

// (1/t) log sum_k (exp(t lambda_k) + exp(-t lambda_k)) over the spectrum of
// W - 11^T/n, a smooth upper bound of ||W - 11^T/n||_2 = mu(W).
class SmoothedSpectralNorm final : public ceres::FirstOrderFunction {
 public:
  SmoothedSpectralNorm(const Graph& g, std::vector<EdgeId> free, WeightVector base, double t)
      : g_(g), free_(std::move(free)), base_(std::move(base)), t_(t) {}

  int NumParameters() const override { return static_cast<int>(free_.size()); }

  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    WeightVector w = base_;
    for (std::size_t k = 0; k < free_.size(); ++k) w[free_[k]] = params[k];
    const auto n = static_cast<Eigen::Index>(g_.node_count());
    Matrix m = weights_to_matrix(g_, w).matrix() - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) return false;
    const Vector& lam = es.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    Vector pos = (t_ * (lam.array() - top)).exp().matrix();
    Vector neg = (t_ * (-lam.array() - top)).exp().matrix();
    const double z = pos.sum() + neg.sum();
    *cost = top + std::log(z) / t_;
    if (gradient) {
      const Vector weight = (pos - neg) / z;  // d cost / d lambda_k
      const Matrix& v = es.eigenvectors();
      for (std::size_t k = 0; k < free_.size(); ++k) {
        const auto& e = g_.edge(free_[k]);
        // d lambda / d w_l = -(v_i - v_j)^2
        const auto diff = (v.row(e.u) - v.row(e.v)).array().square().matrix();
        gradient[k] = -diff.dot(weight);
      }
    }
    return true;
  }

 private:
  const Graph& g_;
  std::vector<EdgeId> free_;
  WeightVector base_;
  double t_;
};

class TracePower final : public ceres::FirstOrderFunction {
 public:
  TracePower(const Graph& g, int p) : g_(g), p_(p) {}
  int NumParameters() const override { return static_cast<int>(g_.edge_count()); }
  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    const WeightVector w(Vector(Eigen::Map<const Vector>(params, NumParameters())));
    const Matrix m = weights_to_matrix(g_, w).matrix();
    *cost = trace_power(m, p_);
    if (gradient) Eigen::Map<Vector>(gradient, NumParameters()) = trace_gradient(g_, m, p_);
    return std::isfinite(*cost);
  }

 private:
  const Graph& g_;
  int p_;
};

}  // namespace detail

struct TraceMinimizerResult {
  WeightVector w;
  double trace = 0.0;
  double stationarity = 0.0;  // max_l |w_l - clamp(w_l - g_l)|, zero at a box-constrained minimizer
};

/// Reference minimizer of the convex Tr(W^p) by L-BFGS from the local-degree
/// point, then clamped to [-1, 1]^m. Used to check properties of the exact
/// minimizer independently of how fast the projected-gradient schedule gets there.
inline TraceMinimizerResult trace_power_minimizer(const Graph& g, int p) {
  require(is_even_power(p), "trace_power_minimizer: p must be an even integer >= 2");
  require(is_connected(g), "trace_power_minimizer: graph is disconnected");
  Vector x = local_degree_weights(g).values();
  ceres::GradientProblem problem(new detail::TracePower(g, p));
  ceres::GradientProblemSolver::Options so;
  so.line_search_direction_type = ceres::LBFGS;
  so.max_num_iterations = 20000;
  so.function_tolerance = 1e-16;
  so.gradient_tolerance = 1e-13;
  so.parameter_tolerance = 1e-16;
  so.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(so, problem, x.data(), &summary);

  TraceMinimizerResult r;
  r.w = project_box(WeightVector(x), -1.0, 1.0);
  const Matrix m = weights_to_matrix(g, r.w).matrix();
  r.trace = trace_power(m, p);
  const Vector grad = trace_gradient(g, m, p);
  for (EdgeId l = 0; l < g.edge_count(); ++l)
    r.stationarity = std::max(r.stationarity, std::abs(r.w[l] - std::clamp(r.w[l] - grad(l), -1.0, 1.0)));
  return r;
}

/// Multi-start numeric solution of min mu(W) over link weights, by L-BFGS on
/// a smoothed spectral norm with a continuation in the smoothing parameter.
/// Desk scale only; the returned mu is exact for the returned weights.
inline FdlaOracleResult fdla_oracle_small(const Graph& g, std::size_t restarts, std::uint64_t seed,
                                          const FdlaOracleOptions& opts = {}) {
  require(g.node_count() <= opts.max_nodes, "fdla_oracle_small: graph exceeds the node limit");
  require(is_connected(g), "fdla_oracle_small: graph is disconnected");
  require(restarts >= 1, "fdla_oracle_small: need at least one start");
  for (const auto& [l, v] : opts.pinned) require(l < g.edge_count(), "fdla_oracle_small: pinned link out of range");

  std::vector<EdgeId> free;
  for (EdgeId l = 0; l < g.edge_count(); ++l)
    if (!opts.pinned.count(l)) free.push_back(l);

  auto evaluate = [&](const WeightVector& w) { return mu_of(weights_to_matrix(g, w).matrix()); };

  FdlaOracleResult best;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  const WeightVector ld = local_degree_weights(g);

  for (std::size_t r = 0; r < restarts; ++r) {
    WeightVector w = ld;
    if (r > 0)
      for (EdgeId l : free) w[l] = ld[l] * jitter(rng);
    for (const auto& [l, v] : opts.pinned) w[l] = v;
    if (free.empty()) {
      const double mu = evaluate(w);
      if (mu < best.mu) best = {w, mu};
      continue;
    }

    std::vector<double> x(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) x[k] = w[free[k]];
    for (double t : opts.smoothing) {
      ceres::GradientProblem problem(new detail::SmoothedSpectralNorm(g, free, w, t));
      ceres::GradientProblemSolver::Options so;
      so.line_search_direction_type = ceres::LBFGS;
      so.max_num_iterations = opts.iterations_per_stage;
      so.function_tolerance = 1e-14;
      so.gradient_tolerance = 1e-12;
      so.parameter_tolerance = 1e-14;
      so.logging_type = ceres::SILENT;
      ceres::GradientProblemSolver::Summary summary;
      ceres::Solve(so, problem, x.data(), &summary);

      WeightVector candidate = w;
      for (std::size_t k = 0; k < free.size(); ++k) candidate[free[k]] = std::clamp(x[k], -1.0, 1.0);
      const double mu = evaluate(candidate);
      if (mu < best.mu) best = {candidate, mu};
    }
  }
  return best;
}

}  // namespace tracemin
