#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/distributed.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/messages.hpp"
#include "tracemin/node_view.hpp"
#include "tracemin/schatten.hpp"
#include "tracemin/weights.hpp"

namespace tracemin {

inline constexpr double kDefaultThreshold = 0.001;
inline constexpr std::size_t kDefaultConsensusIter = 1000000;

/// e(k) = ||x(k) - xbar 1|| / ||x(0) - xbar 1||, with conv_time the first k where e(k) < threshold.
struct ErrorTrace {
  std::vector<double> e;
  double threshold = kDefaultThreshold;
  std::optional<std::size_t> conv_time;

  bool converged() const { return conv_time.has_value(); }
  /// Convergence time, or +inf when the threshold was never reached.
  double time_or_inf() const {
    return conv_time ? static_cast<double>(*conv_time) : std::numeric_limits<double>::infinity();
  }
};

inline Vector consensus_step(const Matrix& w, const Vector& x) {
  require(w.rows() == x.size() && w.cols() == x.size(), "consensus_step: dimension mismatch");
  return w * x;
}
inline Vector consensus_step(const WeightMatrix& w, const Vector& x) { return consensus_step(w.matrix(), x); }

/// Per-node form w_ii x_i + sum_j w_ij x_j, in ascending neighbor order.
inline Vector consensus_step(const Graph& g, const WeightVector& w, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) == g.node_count(), "consensus_step: dimension mismatch");
  Vector out(x.size());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    double s = self_weight(g, w, i) * x(i);
    const auto& nb = g.neighbors(i);
    const auto& inc = g.incident_edges(i);
    for (std::size_t t = 0; t < nb.size(); ++t) s += w[inc[t]] * x(nb[t]);
    out(i) = s;
  }
  return out;
}

namespace detail {

struct ErrorMeter {
  double mean;
  double scale;  // ||x0 - xbar||, 0 when x0 is already at consensus

  explicit ErrorMeter(const Vector& x0) : mean(x0.mean()), scale((x0.array() - x0.mean()).matrix().norm()) {}
  double operator()(const Vector& x) const {
    if (scale == 0.0) return 0.0;
    return (x.array() - mean).matrix().norm() / scale;
  }
};

}  // namespace detail

struct ConsensusResult {
  Vector x;
  ErrorTrace trace;
  std::vector<double> sums;  // 1^T x(k), k = 0, 1, ...
};

/// Iterates x(k+1) = W x(k) until e(k) < threshold or max_iter steps.
inline ConsensusResult run_consensus(const Matrix& w, const Vector& x0, double threshold = kDefaultThreshold,
                                     std::size_t max_iter = kDefaultConsensusIter) {
  require(w.rows() == x0.size() && w.cols() == x0.size(), "run_consensus: dimension mismatch");
  require(x0.allFinite(), "run_consensus: initial state must be finite");
  const detail::ErrorMeter meter(x0);
  ConsensusResult r{x0, {}, {x0.sum()}};
  r.trace.threshold = threshold;
  r.trace.e.push_back(meter(x0));
  if (r.trace.e[0] < threshold) r.trace.conv_time = 0;
  for (std::size_t k = 1; k <= max_iter && !r.trace.conv_time; ++k) {
    r.x = w * r.x;
    const double e = meter(r.x);
    r.trace.e.push_back(e);
    r.sums.push_back(r.x.sum());
    if (!std::isfinite(e)) break;
    if (e < threshold) r.trace.conv_time = k;
  }
  return r;
}
inline ConsensusResult run_consensus(const WeightMatrix& w, const Vector& x0, double threshold = kDefaultThreshold,
                                     std::size_t max_iter = kDefaultConsensusIter) {
  return run_consensus(w.matrix(), x0, threshold, max_iter);
}

struct JcoResult {
  Vector x;
  ErrorTrace trace;
  WeightVector w;
  MessageLog log;
  std::size_t optimizer_rounds = 0;  // slots in which a gradient step was applied
  std::vector<double> sums;          // 1^T x(k) per slot, k = 0, 1, ...
};

namespace detail {

// x_i(k+1) = w_ii x_i(k) + sum over active slots of w_ij x_j(k), from local data only.
inline double local_average(const NodeView& v) {
  double s = v.self_weight() * v.estimate;
  for (std::size_t t = 0; t < v.degree(); ++t)
    if (v.active(t)) s += v.link_weights[t] * v.nbr_estimate[t];
  return s;
}

inline void broadcast_estimates(std::vector<NodeView>& views, MessageLog& log) {
  for (auto& v : views)
    for (std::size_t t = 0; t < v.degree(); ++t)
      if (v.active(t)) {
        const Payload msg = EstimatePayload{v.estimate};
        log.record(v.id, v.neighbors[t], kind_of(msg), payload_size(msg));
      }
  for (auto& v : views)
    for (std::size_t t = 0; t < v.degree(); ++t) {
      v.nbr_estimate_prev[t] = v.nbr_estimate[t];
      v.nbr_estimate[t] = views[v.neighbors[t]].estimate;
    }
}

}  // namespace detail

/// Joint consensus and optimization: per slot, one distributed gradient round
/// with gamma(k) = 1 / (p (1 + k)), then one averaging step with the updated
/// weights. Gradient rounds stop once every node's local test passes.
inline JcoResult run_jco(const Graph& g, int p, const WeightVector& w0, const Vector& x0,
                         double threshold = kDefaultThreshold, std::size_t max_iter = kDefaultConsensusIter,
                         double gtol = kDefaultGradTol) {
  detail::check_power(p);
  require(p == 2 || p == 4, "run_jco: p must be 2 or 4");
  require(is_connected(g), "run_jco: graph is disconnected");
  require(static_cast<std::size_t>(x0.size()) == g.node_count(), "run_jco: x0 has wrong length");

  const auto sched = StepSchedule::interleaved(p);
  auto views = make_node_views(g, project_box(w0, -1.0, 1.0), &x0);
  const detail::ErrorMeter meter(x0);
  JcoResult r;
  r.log = MessageLog(g);
  r.trace.threshold = threshold;
  r.trace.e.push_back(meter(x0));
  r.sums.push_back(x0.sum());
  if (r.trace.e[0] < threshold) r.trace.conv_time = 0;

  detail::broadcast_estimates(views, r.log);  // x(0)
  bool optimizing = true;
  for (std::size_t k = 0; k < max_iter && !r.trace.conv_time; ++k) {
    if (optimizing) {
      auto round = distributed_round(g, views, p, k, sched, gtol);
      r.log.merge(round.log);
      if (round.all_done) optimizing = false;
      else ++r.optimizer_rounds;
    }
    std::vector<double> next(views.size());
    for (const auto& v : views) next[v.id] = detail::local_average(v);
    for (auto& v : views) {
      v.estimate_prev = v.estimate;
      v.estimate = next[v.id];
      v.link_weights_prev = v.link_weights;
    }
    detail::broadcast_estimates(views, r.log);

    const Vector x = collect_estimates(views);
    const double e = meter(x);
    r.trace.e.push_back(e);
    r.sums.push_back(x.sum());
    if (!std::isfinite(e)) break;
    if (e < threshold) r.trace.conv_time = k + 1;
  }
  r.x = collect_estimates(views);
  r.w = collect_weights(g, views);
  return r;
}

}  // namespace tracemin
