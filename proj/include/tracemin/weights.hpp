#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <utility>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/spectral.hpp"

namespace tracemin {

/// Per-link weights w_l, indexed by the graph's edge index.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::size_t m, double value = 0.0) : w_(Vector::Constant(m, value)) {}
  explicit WeightVector(Vector w) : w_(std::move(w)) {}
  WeightVector(std::initializer_list<double> init) : w_(init.size()) {
    std::size_t i = 0;
    for (double x : init) w_(i++) = x;
  }

  std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
  double operator[](EdgeId l) const { return w_(l); }
  double& operator[](EdgeId l) { return w_(l); }
  const Vector& values() const& { return w_; }
  Vector& values() & { return w_; }
  Vector values() && { return std::move(w_); }  // safe in range-for over a temporary

  bool all_finite() const { return w_.allFinite(); }

 private:
  Vector w_;
};

/// Dense symmetric weight matrix following a graph.
class WeightMatrix {
 public:
  WeightMatrix(const Graph& g, Matrix m) : graph_(&g), m_(std::move(m)) {
    require(m_.rows() == static_cast<Eigen::Index>(g.node_count()) && m_.cols() == m_.rows(),
            "weight matrix dimension does not match graph");
  }

  const Graph& graph() const { return *graph_; }
  const Matrix& matrix() const { return m_; }
  double operator()(NodeId i, NodeId j) const { return m_(i, j); }

  WeightVector link_weights() const {
    WeightVector w(graph_->edge_count());
    for (EdgeId l = 0; l < graph_->edge_count(); ++l) w[l] = m_(graph_->edge(l).u, graph_->edge(l).v);
    return w;
  }

  double self_weight(NodeId i) const { return m_(i, i); }

 private:
  const Graph* graph_;
  Matrix m_;
};

/// Self weight 1 - sum of incident link weights, summed in ascending neighbor
/// order. Every component that needs w_ii uses this so results are bitwise equal.
inline double self_weight(const Graph& g, const WeightVector& w, NodeId i) {
  double s = 0.0;
  for (EdgeId l : g.incident_edges(i)) s += w[l];
  return 1.0 - s;
}

/// W = I - Inc diag(w) Inc^T.
inline WeightMatrix weights_to_matrix(const Graph& g, const WeightVector& w) {
  require(w.size() == g.edge_count(), "weight vector length does not match edge count");
  const auto n = g.node_count();
  Matrix m = Matrix::Zero(n, n);
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    m(e.u, e.v) = m(e.v, e.u) = w[l];
  }
  for (NodeId i = 0; i < n; ++i) m(i, i) = self_weight(g, w, i);
  return WeightMatrix(g, std::move(m));
}

inline WeightVector max_degree_weights(const Graph& g) {
  return WeightVector(g.edge_count(), 1.0 / (static_cast<double>(g.max_degree()) + 1.0));
}

/// Metropolis weights 1 / (max{d_i, d_j} + 1).
inline WeightVector local_degree_weights(const Graph& g) {
  WeightVector w(g.edge_count());
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    w[l] = 1.0 / (static_cast<double>(std::max(g.degree(e.u), g.degree(e.v))) + 1.0);
  }
  return w;
}

/// 2 / (lambda_1(L) + lambda_{n-1}(L)), computed centrally from the Laplacian spectrum.
inline WeightVector optimal_constant_weights(const Graph& g) {
  require(g.node_count() >= 2, "optimal_constant_weights: need at least two nodes");
  auto ev = symmetric_eigenvalues(laplacian(g));
  const double largest = ev.front();
  const double algebraic_connectivity = ev[ev.size() - 2];
  if (algebraic_connectivity <= 1e-9 * std::max(1.0, largest))
    throw std::invalid_argument("optimal_constant_weights: graph is disconnected");
  return WeightVector(g.edge_count(), 2.0 / (largest + algebraic_connectivity));
}

}  // namespace tracemin
