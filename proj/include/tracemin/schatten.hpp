#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/messages.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"

namespace tracemin {

/// gamma(k) = a / (b + k); a > 0 and b >= 0 give sum gamma = inf, sum gamma^2 < inf.
class StepSchedule {
 public:
  StepSchedule(double a, double b) : a_(a), b_(b) {
    require(a > 0.0, "step schedule: a must be positive");
    require(b >= 0.0, "step schedule: b must be nonnegative");
  }

  /// a = 10/p, b = 100.
  static StepSchedule standard(int p) { return {10.0 / p, 100.0}; }
  /// 1 / (p (1 + k)), used when optimization is interleaved with averaging.
  static StepSchedule interleaved(int p) { return {1.0 / p, 1.0}; }

  double operator()(std::size_t k) const {
    const double denom = b_ + static_cast<double>(k);
    require(denom > 0.0, "step schedule: b + k must be positive");
    return a_ / denom;
  }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_;
  double b_;
};

inline constexpr double kDefaultGradTol = 0.02;
inline constexpr std::size_t kDefaultMaxIter = 100000;

namespace detail {

inline void check_power(int p) {
  if (!is_even_power(p)) throw std::invalid_argument("p must be an even integer >= 2, got " + std::to_string(p));
}

// p ((P_ji + P_ij) - P_ii) - P_jj), with i < j; the same grouping is used by the
// distributed protocols so both routes round identically.
inline double gradient_entry(double p, double pij, double pji, double pii, double pjj) {
  return p * (((pji + pij) - pii) - pjj);
}

}  // namespace detail

/// Gradient of h(w) = Tr(W(w)^p) for every link, from one dense W^{p-1}.
inline Vector trace_gradient(const Graph& g, const Matrix& w, int p) {
  detail::check_power(p);
  const Matrix pw = matrix_power(w, p - 1);
  Vector grad(g.edge_count());
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    grad(l) = detail::gradient_entry(p, pw(e.u, e.v), pw(e.v, e.u), pw(e.u, e.u), pw(e.v, e.v));
  }
  return grad;
}

/// g_l = p ((W^{p-1})_ji + (W^{p-1})_ij - (W^{p-1})_ii - (W^{p-1})_jj) for l ~ (i, j).
inline double local_gradient(const WeightMatrix& w, EdgeId l, int p) {
  detail::check_power(p);
  const Graph& g = w.graph();
  require(l < g.edge_count(), "local_gradient: invalid link index");
  const Matrix pw = matrix_power(w.matrix(), p - 1);
  const auto& e = g.edge(l);
  return detail::gradient_entry(p, pw(e.u, e.v), pw(e.v, e.u), pw(e.u, e.u), pw(e.v, e.v));
}

/// Same quantity computed only from the weights inside `h`: the links of h
/// and the self weights its nodes report. Walks of length p-1 between the
/// endpoints never leave the nodes within p/2 - 1 hops of an endpoint, so h
/// must contain that region (as an induced subgraph).
inline double local_gradient_from_subgraph(const Subgraph& h, const WeightVector& w, EdgeId l, int p) {
  detail::check_power(p);
  require(h.parent != nullptr, "local_gradient_from_subgraph: subgraph has no parent graph");
  const Graph& g = *h.parent;
  require(l < g.edge_count() && w.size() == g.edge_count(), "local_gradient_from_subgraph: invalid link or weights");
  const auto& e = g.edge(l);

  const std::size_t reach = static_cast<std::size_t>(p / 2 - 1);
  const auto du = hop_distances(g, e.u);
  const auto dv = hop_distances(g, e.v);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const bool needed = (du[v] != kUnreachable && du[v] <= reach) || (dv[v] != kUnreachable && dv[v] <= reach);
    if (needed && !h.contains_node(v))
      throw std::invalid_argument("local_gradient_from_subgraph: subgraph radius too small for p = " +
                                  std::to_string(p));
  }
  for (std::size_t a = 0; a < h.nodes.size(); ++a)
    for (NodeId b : g.neighbors(h.nodes[a]))
      if (h.contains_node(b) && !h.contains_edge(*g.find_edge(h.nodes[a], b)))
        throw std::invalid_argument("local_gradient_from_subgraph: subgraph is not induced");

  const auto k = static_cast<Eigen::Index>(h.nodes.size());
  auto local = [&](NodeId v) {
    return static_cast<Eigen::Index>(std::lower_bound(h.nodes.begin(), h.nodes.end(), v) - h.nodes.begin());
  };
  Matrix wl = Matrix::Zero(k, k);
  for (EdgeId f : h.edges) {
    const auto a = local(g.edge(f).u), b = local(g.edge(f).v);
    wl(a, b) = wl(b, a) = w[f];
  }
  for (Eigen::Index a = 0; a < k; ++a) wl(a, a) = self_weight(g, w, h.nodes[a]);

  const Matrix pw = matrix_power(wl, p - 1);
  const auto iu = local(e.u), iv = local(e.v);
  return detail::gradient_entry(p, pw(iu, iv), pw(iv, iu), pw(iu, iu), pw(iv, iv));
}

/// Componentwise clamp onto [lo, hi]^m.
inline WeightVector project_box(const WeightVector& w, double lo, double hi) {
  require(lo <= hi, "project_box: lo must not exceed hi");
  WeightVector out = w;
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = std::clamp(out[l], lo, hi);
  return out;
}

struct OptimizerTraceRow {
  std::size_t k;
  double trace_p;
  double mu;
  double grad_norm;
  std::uint64_t msgs_cumulative;
};

struct OptimizerState {
  std::size_t iteration = 0;  // number of projected steps applied
  WeightVector w;
  Vector gradient;  // gradient at the returned w
  double grad_norm = 0.0;
  double grad_max = 0.0;
  std::uint64_t messages = 0;  // rounds * per-round protocol cost
  bool converged = false;
  double trace_initial = 0.0;
  double trace_final = 0.0;
  std::vector<OptimizerTraceRow> trace;
  std::vector<WeightVector> history;  // w^(0), w^(1), ... when requested
};

struct OptimizerOptions {
  bool record_trace = false;    // per-iteration Tr(W^p), mu, ||g||
  bool keep_history = false;    // every iterate
  bool stop_on_max_norm = false;  // ||g||_inf instead of ||g||_2
};

struct TmResult {
  WeightVector w;
  OptimizerState state;
};

/// Projected gradient descent on Tr(W^p) over the box [-1, 1]^m.
inline TmResult tm_optimize(const Graph& g, int p, const StepSchedule& sched, double gtol, std::size_t max_iter,
                            const WeightVector& w0, const OptimizerOptions& opts = {}) {
  detail::check_power(p);
  require(is_connected(g), "tm_optimize: graph is disconnected");
  require(w0.size() == g.edge_count(), "tm_optimize: initial weight vector has wrong length");
  require(gtol >= 0.0, "tm_optimize: gtol must be nonnegative");

  const std::uint64_t round_cost = messages_per_round(g, p);
  OptimizerState st;
  WeightVector w = project_box(w0, -1.0, 1.0);

  for (std::size_t k = 0;; ++k) {
    const Matrix wm = weights_to_matrix(g, w).matrix();
    Vector grad = trace_gradient(g, wm, p);
    if (!grad.allFinite())
      throw NumericalFault("tm_optimize: non-finite gradient at iteration " + std::to_string(k));
    st.messages += round_cost;
    const double norm = grad.norm();
    const double gmax = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;

    if (k == 0) st.trace_initial = trace_power(wm, p);
    if (opts.keep_history) st.history.push_back(w);
    if (opts.record_trace)
      st.trace.push_back({k, trace_power(wm, p), mu_of(wm), norm, st.messages});

    const bool done = (opts.stop_on_max_norm ? gmax : norm) < gtol;
    if (done || k == max_iter) {
      st.iteration = k;
      st.gradient = std::move(grad);
      st.grad_norm = norm;
      st.grad_max = gmax;
      st.converged = done;
      st.trace_final = trace_power(wm, p);
      break;
    }
    const double gamma = sched(k);
    for (EdgeId l = 0; l < g.edge_count(); ++l) w[l] = std::clamp(w[l] - gamma * grad(l), -1.0, 1.0);
  }
  st.w = w;
  return {std::move(w), std::move(st)};
}

/// Defaults: local-degree start, a = 10/p, b = 100, gtol = 0.02.
inline TmResult tm_optimize(const Graph& g, int p) {
  return tm_optimize(g, p, StepSchedule::standard(p), kDefaultGradTol, kDefaultMaxIter, local_degree_weights(g));
}

}  // namespace tracemin
