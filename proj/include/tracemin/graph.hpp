#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tracemin/common.hpp"

namespace tracemin {

/// Undirected link with endpoints stored as (u < v).
struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph.
///
/// Edges are indexed 0..m-1 in lexicographic order of (min, max) endpoint,
/// so indexing is canonical for a given edge set. Neighbor lists are sorted
/// ascending and `incident_edges(i)[k]` is the link to `neighbors(i)[k]`.
class Graph {
 public:
  Graph() = default;

  Graph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> labels = {})
      : n_(n), labels_(std::move(labels)) {
    require(n >= 1, "graph must have at least one node");
    for (auto& e : edges) {
      require(e.u < n && e.v < n, "edge endpoint out of range");
      require(e.u != e.v, "self-loop on node " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    require(std::adjacent_find(edges.begin(), edges.end()) == edges.end(), "duplicate edge");
    edges_ = std::move(edges);

    if (labels_.empty()) {
      labels_.reserve(n_);
      for (std::size_t i = 0; i < n_; ++i) labels_.push_back(std::to_string(i));
    }
    require(labels_.size() == n_, "label count must equal node count");

    neighbors_.assign(n_, {});
    incident_.assign(n_, {});
    for (EdgeId l = 0; l < edges_.size(); ++l) {
      neighbors_[edges_[l].u].push_back(edges_[l].v);
      neighbors_[edges_[l].v].push_back(edges_[l].u);
    }
    for (NodeId i = 0; i < n_; ++i) {
      std::sort(neighbors_[i].begin(), neighbors_[i].end());
      incident_[i].reserve(neighbors_[i].size());
      for (NodeId j : neighbors_[i]) incident_[i].push_back(*find_edge(i, j));
      max_degree_ = std::max(max_degree_, neighbors_[i].size());
    }
  }

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const Edge& edge(EdgeId l) const { return edges_.at(l); }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId i) const { return neighbors_.at(i); }
  std::span<const EdgeId> incident_edges(NodeId i) const { return incident_.at(i); }
  std::size_t degree(NodeId i) const { return neighbors_.at(i).size(); }
  std::size_t max_degree() const { return max_degree_; }

  std::optional<EdgeId> find_edge(NodeId i, NodeId j) const {
    if (i > j) std::swap(i, j);
    Edge key{i, j};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return std::nullopt;
    return static_cast<EdgeId>(it - edges_.begin());
  }
  bool has_edge(NodeId i, NodeId j) const { return find_edge(i, j).has_value(); }

  /// Position of `j` in `neighbors(i)`; this is the alpha(j) index used when
  /// nodes exchange per-neighbor vectors.
  std::optional<std::size_t> neighbor_slot(NodeId i, NodeId j) const {
    const auto& nb = neighbors_.at(i);
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) return std::nullopt;
    return static_cast<std::size_t>(it - nb.begin());
  }

  const std::string& label(NodeId i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  Matrix adjacency() const {
    Matrix a = Matrix::Zero(n_, n_);
    for (const auto& e : edges_) a(e.u, e.v) = a(e.v, e.u) = 1.0;
    return a;
  }

  /// n x m incidence matrix, +1 at the smaller endpoint and -1 at the larger.
  Matrix incidence() const {
    Matrix inc = Matrix::Zero(n_, edges_.size());
    for (EdgeId l = 0; l < edges_.size(); ++l) {
      inc(edges_[l].u, l) = 1.0;
      inc(edges_[l].v, l) = -1.0;
    }
    return inc;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::vector<EdgeId>> incident_;
  std::size_t max_degree_ = 0;
};

/// L = D - A.
inline Matrix laplacian(const Graph& g) {
  Matrix lap = -g.adjacency();
  for (NodeId i = 0; i < g.node_count(); ++i) lap(i, i) = static_cast<double>(g.degree(i));
  return lap;
}

// Erdos-Renyi G(n, pr): every potential link kept independently with probability pr.
inline Graph generate_er(std::size_t n, double pr, std::uint64_t seed) {
  require(n >= 2, "generate_er: n must be at least 2");
  require(pr >= 0.0 && pr <= 1.0, "generate_er: probability must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(pr);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (keep(rng)) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

struct Point2 {
  double x;
  double y;
};

/// Random geometric graph on the unit square; link iff distance <= radius.
/// The sampled positions are written to `positions` when provided.
inline Graph generate_rgg(std::size_t n, double radius, std::uint64_t seed,
                          std::vector<Point2>* positions = nullptr) {
  require(n >= 2, "generate_rgg: n must be at least 2");
  require(radius > 0.0, "generate_rgg: radius must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = unit(rng);
    p.y = unit(rng);
  }
  std::vector<Edge> edges;
  const double r2 = radius * radius;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      if (dx * dx + dy * dy <= r2) edges.push_back({i, j});
    }
  if (positions) *positions = std::move(pts);
  return Graph(n, std::move(edges));
}

/// Parses a whitespace-separated "u v" edge list. Labels are arbitrary
/// tokens mapped to dense ids in order of first appearance; '#' starts a
/// comment; duplicate and reversed links collapse to one edge.
inline Graph load_edge_list(std::istream& in) {
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  auto intern = [&](const std::string& tok) {
    auto [it, fresh] = ids.emplace(tok, labels.size());
    if (fresh) labels.push_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks.size() < 2)
      throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                  ": expected two node labels");
    if (toks[0] == toks[1])
      throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": self-loop on '" +
                                  toks[0] + "'");
    NodeId a = intern(toks[0]);
    NodeId b = intern(toks[1]);
    edges.push_back({std::min(a, b), std::max(a, b)});
  }
  require(!labels.empty(), "edge list contains no edges");
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const std::size_t n = labels.size();
  return Graph(n, std::move(edges), std::move(labels));
}

inline Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return load_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  for (const auto& e : g.edges()) out << g.label(e.u) << ' ' << g.label(e.v) << '\n';
}

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

/// BFS hop distances from `source`; unreachable nodes get kUnreachable.
inline std::vector<std::size_t> hop_distances(const Graph& g, NodeId source) {
  std::vector<std::size_t> dist(g.node_count(), kUnreachable);
  std::queue<NodeId> q;
  dist.at(source) = 0;
  q.push(source);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u))
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist;
}

inline bool is_connected(const Graph& g) {
  if (g.node_count() == 0) return false;
  auto d = hop_distances(g, 0);
  return std::none_of(d.begin(), d.end(), [](std::size_t x) { return x == kUnreachable; });
}

/// Longest shortest path; requires a connected graph.
inline std::size_t diameter(const Graph& g) {
  require(is_connected(g), "diameter: graph is disconnected");
  std::size_t best = 0;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    auto d = hop_distances(g, s);
    best = std::max(best, *std::max_element(d.begin(), d.end()));
  }
  return best;
}

/// Node-induced subgraph of a parent graph. `center`/`radius` describe how it
/// was built: all nodes within `radius` hops of `center` (and, for link
/// neighborhoods, of `partner` as well).
struct Subgraph {
  const Graph* parent = nullptr;
  std::vector<NodeId> nodes;  // sorted
  std::vector<EdgeId> edges;  // sorted, parent edge ids
  NodeId center = 0;
  std::optional<NodeId> partner;
  std::size_t radius = 0;

  bool contains_node(NodeId v) const { return std::binary_search(nodes.begin(), nodes.end(), v); }
  bool contains_edge(EdgeId l) const { return std::binary_search(edges.begin(), edges.end(), l); }
};

namespace detail {

inline Subgraph induced(const Graph& g, std::vector<char> keep) {
  Subgraph h;
  h.parent = &g;
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (keep[v]) h.nodes.push_back(v);
  for (EdgeId l = 0; l < g.edge_count(); ++l)
    if (keep[g.edge(l).u] && keep[g.edge(l).v]) h.edges.push_back(l);
  return h;
}

inline void mark_ball(const Graph& g, NodeId c, std::size_t k, std::vector<char>& keep) {
  auto d = hop_distances(g, c);
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (d[v] != kUnreachable && d[v] <= k) keep[v] = 1;
}

}  // namespace detail

inline Subgraph k_hop_subgraph(const Graph& g, NodeId center, std::size_t k) {
  require(center < g.node_count(), "k_hop_subgraph: center out of range");
  std::vector<char> keep(g.node_count(), 0);
  detail::mark_ball(g, center, k, keep);
  Subgraph h = detail::induced(g, std::move(keep));
  h.center = center;
  h.radius = k;
  return h;
}

/// Nodes within k hops of either endpoint of link l, with all links among them.
inline Subgraph link_neighborhood(const Graph& g, EdgeId l, std::size_t k) {
  const Edge& e = g.edge(l);
  std::vector<char> keep(g.node_count(), 0);
  detail::mark_ball(g, e.u, k, keep);
  detail::mark_ball(g, e.v, k, keep);
  Subgraph h = detail::induced(g, std::move(keep));
  h.center = e.u;
  h.partner = e.v;
  h.radius = k;
  return h;
}

}  // namespace tracemin
