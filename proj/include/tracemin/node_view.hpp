#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/weights.hpp"

namespace tracemin {

/// Local state of one node in the synchronous simulation. All per-neighbor
/// vectors are aligned with `neighbors` (ascending global id), so the slot of
/// neighbor j is its alpha(j) index.
struct NodeView {
  NodeId id = 0;
  std::vector<NodeId> neighbors;

  std::vector<double> link_weights;       // W_i at the current round
  std::vector<double> link_weights_prev;  // W_i^(k-1): weights used for the last averaging step

  double estimate = 0.0;       // x_i(k)
  double estimate_prev = 0.0;  // x_i(k-1)

  // Data received from neighbors, indexed by slot.
  std::vector<double> nbr_self_weight;
  std::vector<std::vector<std::pair<NodeId, double>>> nbr_rows;
  std::vector<double> nbr_cube_diagonal;
  std::vector<double> nbr_estimate;       // x_j(k)
  std::vector<double> nbr_estimate_prev;  // x_j(k-1)

  std::vector<char> blacklisted;
  double local_max_gradient = 0.0;

  std::size_t degree() const { return neighbors.size(); }

  std::size_t slot(NodeId j) const {
    auto it = std::lower_bound(neighbors.begin(), neighbors.end(), j);
    if (it == neighbors.end() || *it != j) throw ProtocolFault("node has no neighbor " + std::to_string(j));
    return static_cast<std::size_t>(it - neighbors.begin());
  }

  bool active(std::size_t s) const { return !blacklisted[s]; }

  /// 1 - sum of incident link weights, in slot order.
  double self_weight() const {
    double s = 0.0;
    for (double x : link_weights) s += x;
    return 1.0 - s;
  }
  double self_weight_prev() const {
    double s = 0.0;
    for (double x : link_weights_prev) s += x;
    return 1.0 - s;
  }

  std::vector<std::pair<NodeId, double>> row() const {
    std::vector<std::pair<NodeId, double>> r;
    r.reserve(neighbors.size());
    for (std::size_t s = 0; s < neighbors.size(); ++s) r.emplace_back(neighbors[s], link_weights[s]);
    return r;
  }

  /// Drop neighbor j: its link weight becomes 0, which returns the weight to
  /// the self weight since w_ii is derived from the row.
  void blacklist(NodeId j) {
    const auto s = slot(j);
    blacklisted[s] = 1;
    link_weights[s] = 0.0;
  }
};

inline std::vector<NodeView> make_node_views(const Graph& g, const WeightVector& w, const Vector* x0 = nullptr) {
  require(w.size() == g.edge_count(), "make_node_views: weight vector has wrong length");
  std::vector<NodeView> views(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto& v = views[i];
    v.id = i;
    v.neighbors.assign(g.neighbors(i).begin(), g.neighbors(i).end());
    const auto d = v.neighbors.size();
    v.link_weights.resize(d);
    for (std::size_t s = 0; s < d; ++s) v.link_weights[s] = w[g.incident_edges(i)[s]];
    v.link_weights_prev = v.link_weights;
    v.nbr_self_weight.assign(d, 0.0);
    v.nbr_rows.assign(d, {});
    v.nbr_cube_diagonal.assign(d, 0.0);
    v.nbr_estimate.assign(d, 0.0);
    v.nbr_estimate_prev.assign(d, 0.0);
    v.blacklisted.assign(d, 0);
    if (x0) v.estimate = v.estimate_prev = (*x0)(static_cast<Eigen::Index>(i));
  }
  return views;
}

/// Global weight vector from the views; both endpoints must hold the same value.
inline WeightVector collect_weights(const Graph& g, const std::vector<NodeView>& views) {
  WeightVector w(g.edge_count());
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    const auto& vu = views[e.u];
    const auto& vv = views[e.v];
    const double a = vu.link_weights[vu.slot(e.v)];
    const double b = vv.link_weights[vv.slot(e.u)];
    if (a != b)
      throw ProtocolFault("endpoints " + std::to_string(e.u) + " and " + std::to_string(e.v) +
                          " disagree on their link weight");
    w[l] = a;
  }
  return w;
}

inline Vector collect_estimates(const std::vector<NodeView>& views) {
  Vector x(static_cast<Eigen::Index>(views.size()));
  for (std::size_t i = 0; i < views.size(); ++i) x(static_cast<Eigen::Index>(i)) = views[i].estimate;
  return x;
}

}  // namespace tracemin
