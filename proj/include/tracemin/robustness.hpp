#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/consensus.hpp"
#include "tracemin/distributed.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/messages.hpp"
#include "tracemin/node_view.hpp"
#include "tracemin/schatten.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"

namespace tracemin {

// ---------------------------------------------------------------------------
// Repair

struct RepairParams {
  double delta;
  static RepairParams for_graph(const Graph& g) { return {1.0 / (2.0 * static_cast<double>(g.node_count()))}; }
};

/// argmin (x - y)^T (I + 11^T) (x - y) subject to x >= delta, 1^T x <= 1.
/// KKT gives x_k = max(delta, y_k - t) for a scalar t; t is found exactly by
/// enumerating how many coordinates sit at the bound.
inline std::vector<double> project_node_row(const std::vector<double>& y, double delta) {
  require(delta > 0.0, "project_node_row: delta must be positive");
  const std::size_t d = y.size();
  require(delta * static_cast<double>(d) <= 1.0, "project_node_row: infeasible, delta * degree exceeds 1");
  for (double v : y) require(std::isfinite(v), "project_node_row: non-finite input");
  if (d == 0) return {};

  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> prefix(d + 1, 0.0);
  for (std::size_t c = 0; c < d; ++c) prefix[c + 1] = prefix[c] + sorted[c];
  const double total = prefix[d];

  // The c smallest entries are clamped when sorted[c-1] <= delta + t <= sorted[c].
  auto consistent = [&](std::size_t c, double t) {
    const double cut = delta + t;
    const double tol = 1e-12 * std::max(1.0, std::abs(cut));
    const bool lower_ok = c == 0 || sorted[c - 1] <= cut + tol;
    const bool upper_ok = c == d || cut <= sorted[c] + tol;
    return lower_ok && upper_ok;
  };
  auto build = [&](double t) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = std::max(delta, y[k] - t);
    return x;
  };
  const double dd = static_cast<double>(d);

  // Sum constraint inactive: t = sum_k (x_k - y_k).
  for (std::size_t c = 0; c <= d; ++c) {
    const double clamped = static_cast<double>(c);
    const double t = (clamped * delta - prefix[c]) / (1.0 + (dd - clamped));
    if (!consistent(c, t)) continue;
    auto x = build(t);
    if (std::accumulate(x.begin(), x.end(), 0.0) <= 1.0 + 1e-12) return x;
    break;
  }
  // Sum constraint active: sum_k max(delta, y_k - t) = 1.
  for (std::size_t c = 0; c < d; ++c) {
    const double clamped = static_cast<double>(c);
    const double t = ((total - prefix[c]) + clamped * delta - 1.0) / (dd - clamped);
    if (consistent(c, t)) return build(t);
  }
  return std::vector<double>(d, delta);  // only when delta * d == 1
}

struct RepairResult {
  WeightVector w;
  WeightMatrix matrix;
  bool aperiodicity_fix = false;  // a link was lowered so that some self weight is positive
};

/// Row-wise projection, min-symmetrization per link, then W = I - Inc diag(w) Inc^T.
inline RepairResult build_convergent(const Graph& g, const Matrix& w_hat, const RepairParams& params) {
  require(is_connected(g), "build_convergent: graph is disconnected");
  require(w_hat.rows() == static_cast<Eigen::Index>(g.node_count()) && w_hat.cols() == w_hat.rows(),
          "build_convergent: matrix dimension does not match graph");
  std::vector<std::vector<double>> projected(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    std::vector<double> row;
    for (NodeId j : g.neighbors(i)) row.push_back(w_hat(i, j));
    projected[i] = project_node_row(row, params.delta);
  }
  WeightVector w(g.edge_count());
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    w[l] = std::min(projected[e.u][*g.neighbor_slot(e.u, e.v)], projected[e.v][*g.neighbor_slot(e.v, e.u)]);
  }

  // A nonnegative W on a bipartite graph with an all-zero diagonal is periodic.
  bool fixed = false;
  double best_self = -1.0;
  for (NodeId i = 0; i < g.node_count(); ++i) best_self = std::max(best_self, self_weight(g, w, i));
  if (best_self <= 1e-12 && g.edge_count() > 0) {
    EdgeId top = 0;
    for (EdgeId l = 1; l < g.edge_count(); ++l)
      if (w[l] > w[top]) top = l;
    if (!(w[top] > params.delta))
      throw NumericalFault("build_convergent: every node saturated at delta, no positive self weight possible");
    w[top] = 0.5 * (w[top] + params.delta);
    fixed = true;
  }
  auto m = weights_to_matrix(g, w);
  return {std::move(w), std::move(m), fixed};
}
inline RepairResult build_convergent(const WeightMatrix& w_hat, const RepairParams& params) {
  return build_convergent(w_hat.graph(), w_hat.matrix(), params);
}

// ---------------------------------------------------------------------------
// Misbehaving-neighbor detection

/// What neighbor j broadcasts with its estimate: x_j(k), X_j(k-1), W_j^(k-1).
struct DetectionBundle {
  NodeId sender = 0;
  std::optional<double> estimate;
  std::optional<std::vector<double>> neighbor_estimates;  // aligned with the sender's neighbor list
  std::optional<std::vector<double>> link_weights;        // aligned with the sender's neighbor list
};

enum class DetectionCheck { None, Update, EchoedEstimate, EchoedWeight };

inline std::string_view to_string(DetectionCheck c) {
  switch (c) {
    case DetectionCheck::None: return "none";
    case DetectionCheck::Update: return "update_mismatch";
    case DetectionCheck::EchoedEstimate: return "estimate_echo_mismatch";
    case DetectionCheck::EchoedWeight: return "weight_echo_mismatch";
  }
  return "?";
}

struct DetectionVerdict {
  bool misbehaving = false;
  std::vector<DetectionCheck> failed;
  std::string reason() const {
    if (failed.empty()) return "ok";
    std::string s;
    for (auto c : failed) {
      if (!s.empty()) s += '+';
      s += to_string(c);
    }
    return s;
  }
};

inline constexpr double kDetectTol = 1e-9;

inline bool nearly_equal(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Sender j's update recomputed from its own bundle, in the order j uses.
inline double recompute_update(double own_prev, const std::vector<double>& nbr_prev, const std::vector<double>& wj) {
  double s = 0.0;
  for (double w : wj) s += w;
  double x = (1.0 - s) * own_prev;
  for (std::size_t t = 0; t < wj.size(); ++t) x += wj[t] * nbr_prev[t];
  return x;
}

/// Runs the three checks at node `view` on the bundle from neighbor j.
/// `sender_prev` is x_j(k-1) as received one round earlier; `sender_alpha`
/// is the position of view.id in j's neighbor list.
inline DetectionVerdict detect_misbehaving(const NodeView& view, const DetectionBundle& b, double sender_prev,
                                           std::size_t sender_alpha, double rel_tol = kDetectTol) {
  if (!b.estimate || !b.neighbor_estimates || !b.link_weights)
    throw ProtocolFault("bundle from node " + std::to_string(b.sender) + " is missing fields");
  const auto& xs = *b.neighbor_estimates;
  const auto& ws = *b.link_weights;
  if (xs.size() != ws.size() || sender_alpha >= xs.size())
    throw ProtocolFault("bundle from node " + std::to_string(b.sender) + " has inconsistent lengths");
  const std::size_t s = view.slot(b.sender);

  DetectionVerdict v;
  if (!nearly_equal(*b.estimate, recompute_update(sender_prev, xs, ws), rel_tol))
    v.failed.push_back(DetectionCheck::Update);
  if (!nearly_equal(view.estimate_prev, xs[sender_alpha], rel_tol)) v.failed.push_back(DetectionCheck::EchoedEstimate);
  if (!nearly_equal(view.link_weights_prev[s], ws[sender_alpha], rel_tol))
    v.failed.push_back(DetectionCheck::EchoedWeight);
  v.misbehaving = !v.failed.empty();
  return v;
}

// ---------------------------------------------------------------------------
// Guarded JCO with optional adversaries

enum class AdversaryKind { Stubborn, ForgedEstimate, ForgedWeight };

struct Adversary {
  NodeId node = 0;
  AdversaryKind kind = AdversaryKind::Stubborn;
  std::size_t start_round = 0;  // first slot in which it misbehaves
  NodeId victim = 0;            // neighbor whose entry is forged (forgery kinds)
  double offset = 1.0;          // amount added to the forged entry
};

struct DetectionEvent {
  std::size_t round;
  NodeId detector;
  NodeId declared;
  std::string reason;
};

struct GuardedJcoResult {
  Vector x;
  ErrorTrace trace;
  MessageLog log;
  std::vector<DetectionEvent> events;
  std::vector<double> sums;
  std::optional<std::size_t> frozen_at;  // slot at which weight optimization stopped after a declaration
};

/// JCO where each estimate broadcast carries the detection bundle. Every node
/// checks every non-blacklisted neighbor each slot; a declared neighbor is
/// blacklisted (its link weight goes to 0, returning it to the self weight).
/// After the first declaration weights are frozen; averaging continues.
inline GuardedJcoResult run_guarded_jco(const Graph& g, int p, const WeightVector& w0, const Vector& x0,
                                        std::size_t rounds, const std::vector<Adversary>& adversaries = {},
                                        double gtol = kDefaultGradTol, double rel_tol = kDetectTol) {
  detail::check_power(p);
  require(p == 2 || p == 4, "run_guarded_jco: p must be 2 or 4");
  require(is_connected(g), "run_guarded_jco: graph is disconnected");
  require(static_cast<std::size_t>(x0.size()) == g.node_count(), "run_guarded_jco: x0 has wrong length");
  for (const auto& a : adversaries) {
    require(a.node < g.node_count(), "adversary node out of range");
    if (a.kind != AdversaryKind::Stubborn)
      require(g.has_edge(a.node, a.victim), "adversary victim must be a neighbor");
  }

  const auto sched = StepSchedule::interleaved(p);
  auto views = make_node_views(g, project_box(w0, -1.0, 1.0), &x0);
  const detail::ErrorMeter meter(x0);
  GuardedJcoResult r;
  r.log = MessageLog(g);
  r.trace.e.push_back(meter(x0));
  r.sums.push_back(x0.sum());

  auto adversary_of = [&](NodeId i, std::size_t k) -> const Adversary* {
    for (const auto& a : adversaries)
      if (a.node == i && k >= a.start_round) return &a;
    return nullptr;
  };

  detail::broadcast_estimates(views, r.log);
  bool optimizing = true;
  for (std::size_t k = 0; k < rounds; ++k) {
    if (optimizing) {
      auto round = distributed_round(g, views, p, k, sched, gtol);
      r.log.merge(round.log);
      if (round.all_done) optimizing = false;
    }

    // Each node forms its update and the bundle it broadcasts.
    std::vector<DetectionBundle> bundles(views.size());
    for (auto& v : views) {
      std::vector<double> xs = v.nbr_estimate, ws = v.link_weights;
      double x_new;
      const Adversary* adv = adversary_of(v.id, k);
      if (adv && adv->kind == AdversaryKind::Stubborn) {
        x_new = v.estimate;
      } else {
        if (adv && adv->kind == AdversaryKind::ForgedEstimate) xs[v.slot(adv->victim)] += adv->offset;
        if (adv && adv->kind == AdversaryKind::ForgedWeight) ws[v.slot(adv->victim)] += adv->offset;
        for (std::size_t t = 0; t < v.degree(); ++t)
          if (!v.active(t)) ws[t] = 0.0;
        x_new = recompute_update(v.estimate, xs, ws);
      }
      bundles[v.id] = {v.id, x_new, std::move(xs), std::move(ws)};
    }
    for (auto& v : views) {
      v.estimate_prev = v.estimate;
      v.estimate = *bundles[v.id].estimate;
      v.link_weights_prev = v.link_weights;
    }
    // Delivery and checks.
    bool declared_now = false;
    for (auto& v : views) {
      const bool honest =
          std::none_of(adversaries.begin(), adversaries.end(), [&](const Adversary& a) { return a.node == v.id; });
      for (std::size_t t = 0; t < v.degree(); ++t) {
        if (!v.active(t)) continue;
        const NodeId j = v.neighbors[t];
        const Payload msg = DetectionBundlePayload{*bundles[j].estimate, *bundles[j].neighbor_estimates,
                                                   *bundles[j].link_weights};
        r.log.record(j, v.id, kind_of(msg), payload_size(msg));
        const std::size_t alpha = views[j].slot(v.id);
        auto verdict = detect_misbehaving(v, bundles[j], v.nbr_estimate[t], alpha, rel_tol);
        v.nbr_estimate_prev[t] = v.nbr_estimate[t];
        v.nbr_estimate[t] = *bundles[j].estimate;
        if (verdict.misbehaving && honest) {
          r.events.push_back({k + 1, v.id, j, verdict.reason()});
          declared_now = true;
        }
      }
    }
    for (const auto& ev : r.events)
      if (ev.round == k + 1) views[ev.detector].blacklist(ev.declared);
    if (declared_now && optimizing) {
      optimizing = false;
      r.frozen_at = k + 1;
    }

    const Vector x = collect_estimates(views);
    r.trace.e.push_back(meter(x));
    r.sums.push_back(x.sum());
    if (!r.trace.conv_time && r.trace.e.back() < r.trace.threshold) r.trace.conv_time = k + 1;
  }
  r.x = collect_estimates(views);
  return r;
}

// ---------------------------------------------------------------------------
// Dual-run guard

struct GuardResult {
  WeightVector w_p;
  std::optional<WeightVector> w_conv;
  bool dual_run = false;
  bool diverged = false;  // the W_(p) branch failed to converge or disagreed with W^(conv)
  Vector x;               // estimate handed back to the caller
  ConsensusResult p_branch;
  std::optional<ConsensusResult> conv_branch;
  std::size_t optimizer_iterations = 0;
};

inline constexpr double kGuardAgreementFactor = 10.0;

/// Optimizes, and if W_(p) has any nonpositive link or self weight, runs the
/// repaired matrix alongside it. Agreement means both reach the threshold and
/// the final estimates differ by at most 10 * threshold * ||x0 - xbar||.
inline GuardResult parallel_consensus_guard(const Graph& g, int p, const RepairParams& params, const Vector& x0,
                                            double threshold = kDefaultThreshold,
                                            std::size_t max_iter = 100000) {
  auto tm = tm_optimize(g, p, StepSchedule::standard(p), kDefaultGradTol, kDefaultMaxIter, local_degree_weights(g));
  GuardResult out;
  out.w_p = tm.w;
  out.optimizer_iterations = tm.state.iteration;
  const auto wp = weights_to_matrix(g, tm.w);

  bool positive = true;
  for (EdgeId l = 0; l < g.edge_count(); ++l) positive = positive && tm.w[l] > 0.0;
  for (NodeId i = 0; i < g.node_count(); ++i) positive = positive && wp(i, i) > 0.0;

  out.p_branch = run_consensus(wp, x0, threshold, max_iter);
  if (positive) {
    out.x = out.p_branch.x;
    out.diverged = !out.p_branch.trace.converged();
    return out;
  }
  out.dual_run = true;
  auto rep = build_convergent(wp, params);
  out.w_conv = rep.w;
  out.conv_branch = run_consensus(rep.matrix, x0, threshold, max_iter);

  const double scale = (x0.array() - x0.mean()).matrix().norm();
  const bool both = out.p_branch.trace.converged() && out.conv_branch->trace.converged();
  const bool agree =
      both && (out.p_branch.x - out.conv_branch->x).norm() <= kGuardAgreementFactor * threshold * scale;
  out.diverged = !agree;
  out.x = agree ? out.p_branch.x : out.conv_branch->x;
  return out;
}

namespace csv {

inline void write_detections(std::ostream& out, const Graph& g, const std::vector<DetectionEvent>& events) {
  out << "round,detector,declared,reason\n";
  for (const auto& e : events)
    out << e.round << ',' << g.label(e.detector) << ',' << g.label(e.declared) << ',' << e.reason << '\n';
}

}  // namespace csv

}  // namespace tracemin
