#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tracemin/graph.hpp"
#include "tracemin/weights.hpp"

namespace fixtures {

using namespace tracemin;

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph(n, e);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.push_back({i, j});
  return Graph(n, e);
}

inline Graph star_graph(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId i = 1; i <= leaves; ++i) e.push_back({0, i});
  return Graph(leaves + 1, e);
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return Graph(n, e);
}

/// Two stars of `leaves` leaves each, centers joined by a bridge.
inline Graph double_star(std::size_t leaves) {
  std::vector<Edge> e;
  const NodeId c1 = 0, c2 = leaves + 1;
  for (NodeId i = 1; i <= leaves; ++i) {
    e.push_back({c1, i});
    e.push_back({c2, c2 + i});
  }
  e.push_back({c1, c2});
  return Graph(2 * leaves + 2, e);
}

/// Two cliques of size k joined by one bridge link.
inline Graph barbell(std::size_t k) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < k; ++i)
    for (NodeId j = i + 1; j < k; ++j) {
      e.push_back({i, j});
      e.push_back({k + i, k + j});
    }
  e.push_back({k - 1, k});
  return Graph(2 * k, e);
}

/// Connected ER graph with n drawn from [nmin, nmax].
inline Graph random_connected(std::mt19937_64& rng, std::size_t nmin, std::size_t nmax) {
  std::uniform_int_distribution<std::size_t> pick_n(nmin, nmax);
  std::uniform_real_distribution<double> pick_p(0.25, 0.7);
  for (;;) {
    const std::size_t n = pick_n(rng);
    Graph g = generate_er(n, pick_p(rng), rng());
    if (is_connected(g)) return g;
  }
}

inline std::vector<Edge> edge_list(const Graph& g) { return {g.edges().begin(), g.edges().end()}; }

/// Random link weights in [lo, hi].
inline WeightVector random_weights(std::mt19937_64& rng, const Graph& g, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  WeightVector w(g.edge_count());
  for (EdgeId l = 0; l < g.edge_count(); ++l) w[l] = u(rng);
  return w;
}

}  // namespace fixtures
