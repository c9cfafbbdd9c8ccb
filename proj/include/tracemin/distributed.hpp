#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/messages.hpp"
#include "tracemin/node_view.hpp"
#include "tracemin/schatten.hpp"

namespace tracemin {

struct RoundOutcome {
  MessageLog log;
  double max_abs_gradient = 0.0;  // over all links, as seen by the nodes
  bool all_done = false;          // every node's local max |g_l| <= gtol; no step applied
};

namespace detail {

using Row = std::vector<std::pair<NodeId, double>>;

inline double row_self_weight(const Row& r) {
  double s = 0.0;
  for (const auto& [j, w] : r) s += w;
  return 1.0 - s;
}

// W(a, b) as known from a's row, a's self weight when a == b.
inline double row_entry(const Row& ra, NodeId a, NodeId b) {
  if (a == b) return row_self_weight(ra);
  auto it = std::lower_bound(ra.begin(), ra.end(), b, [](const auto& e, NodeId v) { return e.first < v; });
  return (it != ra.end() && it->first == b) ? it->second : 0.0;
}

// Closed neighborhood N[a] in ascending order, taken from a's row.
inline std::vector<NodeId> closed_neighborhood(NodeId a, const Row& ra) {
  std::vector<NodeId> out;
  out.reserve(ra.size() + 1);
  bool placed = false;
  for (const auto& [j, w] : ra) {
    if (!placed && a < j) {
      out.push_back(a);
      placed = true;
    }
    out.push_back(j);
  }
  if (!placed) out.push_back(a);
  return out;
}

// Rows a node holds after the exchange, keyed by owner.
struct RowBook {
  std::map<NodeId, Row> rows;
  const Row& at(NodeId v) const {
    auto it = rows.find(v);
    if (it == rows.end()) throw ProtocolFault("row of node " + std::to_string(v) + " was never received");
    return it->second;
  }
  double entry(NodeId a, NodeId b) const {
    // symmetric weights: either endpoint's row holds W(a, b)
    auto it = rows.find(a);
    if (it != rows.end()) return row_entry(it->second, a, b);
    return row_entry(at(b), b, a);
  }
};

// (W^3)_{lo,hi} = sum_{a in N[lo]} W(lo,a) sum_{b in N[hi]} W(a,b) W(b,hi), fixed order so
// every node evaluating it gets the same bits.
inline double cube_entry(const RowBook& book, NodeId lo, NodeId hi) {
  const auto nlo = closed_neighborhood(lo, book.at(lo));
  const auto nhi = closed_neighborhood(hi, book.at(hi));
  double s = 0.0;
  for (NodeId a : nlo) {
    const double wla = book.entry(lo, a);
    double inner = 0.0;
    for (NodeId b : nhi) inner += book.entry(a, b) * book.entry(b, hi);
    s += wla * inner;
  }
  return s;
}

inline void check_row_consistency(const NodeView& v, std::size_t s, const Row& received) {
  const NodeId j = v.neighbors[s];
  const double theirs = row_entry(received, j, v.id);
  if (theirs != v.link_weights[s])
    throw ProtocolFault("node " + std::to_string(v.id) + " holds w = " + std::to_string(v.link_weights[s]) +
                        " on link to " + std::to_string(j) + " but the neighbor reports " + std::to_string(theirs));
}

inline void check_views(const Graph& g, const std::vector<NodeView>& views) {
  if (views.size() != g.node_count()) throw ProtocolFault("one view per node is required");
  for (NodeId i = 0; i < g.node_count(); ++i)
    if (views[i].id != i || views[i].neighbors.size() != g.degree(i) ||
        views[i].link_weights.size() != g.degree(i))
      throw ProtocolFault("view of node " + std::to_string(i) + " does not match the graph");
}

// Gradients of every link, one value per (node, slot); both endpoints compute
// their copy independently.
using SlotGradients = std::vector<std::vector<double>>;

inline SlotGradients gradients_p2(const Graph& g, std::vector<NodeView>& views, MessageLog& log) {
  std::vector<double> own(views.size());
  for (auto& v : views) own[v.id] = v.self_weight();
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const NodeId j = v.neighbors[s];
      const Payload msg = SelfWeightPayload{own[v.id]};
      log.record(v.id, j, kind_of(msg), payload_size(msg));
    }
  // delivery
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s) v.nbr_self_weight[s] = own[v.neighbors[s]];

  SlotGradients grad(views.size());
  for (auto& v : views) {
    grad[v.id].resize(v.degree());
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const NodeId j = v.neighbors[s];
      const double wij = v.link_weights[s];
      const double wi = v.self_weight(), wj = v.nbr_self_weight[s];
      const double wlo = v.id < j ? wi : wj, whi = v.id < j ? wj : wi;
      grad[v.id][s] = gradient_entry(2, wij, wij, wlo, whi);
    }
  }
  (void)g;
  return grad;
}

inline SlotGradients gradients_p4(const Graph& g, std::vector<NodeView>& views, MessageLog& log) {
  // step 1: every node sends its row of link weights
  std::vector<Row> rows(views.size());
  for (auto& v : views) rows[v.id] = v.row();
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const Payload msg = LinkWeightsPayload{rows[v.id]};
      log.record(v.id, v.neighbors[s], kind_of(msg), payload_size(msg));
    }
  std::vector<RowBook> books(views.size());
  for (auto& v : views) {
    books[v.id].rows[v.id] = rows[v.id];
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const NodeId j = v.neighbors[s];
      check_row_consistency(v, s, rows[j]);
      v.nbr_rows[s] = rows[j];
      books[v.id].rows[j] = rows[j];
    }
  }

  // step 2: (W^3)_ii
  std::vector<double> diag(views.size());
  for (auto& v : views) diag[v.id] = cube_entry(books[v.id], v.id, v.id);
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const Payload msg = CubeDiagonalPayload{diag[v.id]};
      log.record(v.id, v.neighbors[s], kind_of(msg), payload_size(msg));
    }
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s) v.nbr_cube_diagonal[s] = diag[v.neighbors[s]];

  SlotGradients grad(views.size());
  for (auto& v : views) {
    grad[v.id].resize(v.degree());
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const NodeId j = v.neighbors[s];
      const NodeId lo = std::min(v.id, j), hi = std::max(v.id, j);
      const double off = cube_entry(books[v.id], lo, hi);
      const double dlo = v.id == lo ? diag[v.id] : v.nbr_cube_diagonal[s];
      const double dhi = v.id == hi ? diag[v.id] : v.nbr_cube_diagonal[s];
      grad[v.id][s] = gradient_entry(4, off, off, dlo, dhi);
    }
  }
  (void)g;
  return grad;
}

// Even p >= 6: rows are flooded for p/2 steps, after which each node holds the
// rows of everyone within p/2 hops. The gradient of link (lo, hi) is then
// computed from the dense power of W restricted to the nodes within p/2 - 1
// hops of lo or hi, a region both endpoints know completely.
inline SlotGradients gradients_relay(const Graph& g, std::vector<NodeView>& views, int p, MessageLog& log) {
  const std::size_t steps = static_cast<std::size_t>(p / 2);
  std::vector<RowBook> books(views.size());
  for (auto& v : views) books[v.id].rows[v.id] = v.row();
  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<RowBook> next = books;
    for (auto& v : views)
      for (std::size_t s = 0; s < v.degree(); ++s) {
        const NodeId j = v.neighbors[s];
        std::size_t scalars = 0;
        for (const auto& [owner, r] : books[v.id].rows) scalars += r.size() + 1;
        const Payload msg = RelayPayload{books[v.id].rows.size(), scalars};
        log.record(v.id, j, kind_of(msg), payload_size(msg));
        for (const auto& [owner, r] : books[v.id].rows) next[j].rows.emplace(owner, r);
      }
    books = std::move(next);
  }
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s) check_row_consistency(v, s, books[v.id].at(v.neighbors[s]));

  const std::size_t reach = steps - 1;
  SlotGradients grad(views.size());
  for (auto& v : views) {
    grad[v.id].resize(v.degree());
    for (std::size_t s = 0; s < v.degree(); ++s) {
      const NodeId j = v.neighbors[s];
      const NodeId lo = std::min(v.id, j), hi = std::max(v.id, j);
      // Region found from the rows alone (BFS over known rows).
      std::vector<NodeId> region;
      {
        std::map<NodeId, std::size_t> dist{{lo, 0}, {hi, 0}};
        std::vector<NodeId> frontier{lo, hi};
        for (std::size_t d = 0; d < reach; ++d) {
          std::vector<NodeId> nxt;
          for (NodeId a : frontier)
            for (const auto& [b, w] : books[v.id].at(a))
              if (dist.emplace(b, d + 1).second) nxt.push_back(b);
          frontier = std::move(nxt);
        }
        for (const auto& [node, d] : dist) region.push_back(node);
      }
      const auto k = static_cast<Eigen::Index>(region.size());
      Matrix wl = Matrix::Zero(k, k);
      for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) wl(a, b) = books[v.id].entry(region[a], region[b]);
      const Matrix pw = matrix_power(wl, p - 1);
      const auto ilo = static_cast<Eigen::Index>(std::lower_bound(region.begin(), region.end(), lo) - region.begin());
      const auto ihi = static_cast<Eigen::Index>(std::lower_bound(region.begin(), region.end(), hi) - region.begin());
      grad[v.id][s] = gradient_entry(p, pw(ilo, ihi), pw(ihi, ilo), pw(ilo, ilo), pw(ihi, ihi));
    }
  }
  (void)g;
  return grad;
}

}  // namespace detail

/// One synchronous optimizer round: exchange, local gradients, projected step.
/// Blacklisted links are skipped by the step and keep weight 0.
inline RoundOutcome distributed_round(const Graph& g, std::vector<NodeView>& views, int p, std::size_t k,
                                      const StepSchedule& sched, double gtol = 0.0) {
  detail::check_power(p);
  detail::check_views(g, views);
  RoundOutcome out{MessageLog(g), 0.0, false};

  detail::SlotGradients grad;
  if (p == 2) grad = detail::gradients_p2(g, views, out.log);
  else if (p == 4) grad = detail::gradients_p4(g, views, out.log);
  else grad = detail::gradients_relay(g, views, p, out.log);

  bool all_done = true;
  for (auto& v : views) {
    double local = 0.0;
    for (std::size_t s = 0; s < v.degree(); ++s) {
      if (!std::isfinite(grad[v.id][s]))
        throw NumericalFault("non-finite gradient at node " + std::to_string(v.id) + " in round " + std::to_string(k));
      if (v.active(s)) local = std::max(local, std::abs(grad[v.id][s]));
    }
    v.local_max_gradient = local;
    out.max_abs_gradient = std::max(out.max_abs_gradient, local);
    all_done = all_done && local <= gtol;
  }
  out.all_done = all_done;
  if (all_done) return out;

  const double gamma = sched(k);
  for (auto& v : views)
    for (std::size_t s = 0; s < v.degree(); ++s)
      if (v.active(s)) v.link_weights[s] = std::clamp(v.link_weights[s] - gamma * grad[v.id][s], -1.0, 1.0);
  return out;
}

struct DistributedResult {
  WeightVector w;
  std::size_t rounds = 0;  // rounds with a step applied
  bool converged = false;
  MessageLog log;
  std::vector<WeightVector> history;  // w after each applied step when requested
};

/// Runs rounds until every node's local stopping test passes or max_rounds
/// steps were applied.
inline DistributedResult run_distributed_tm(const Graph& g, int p, const StepSchedule& sched, double gtol,
                                            std::size_t max_rounds, const WeightVector& w0,
                                            bool keep_history = false) {
  detail::check_power(p);
  require(is_connected(g), "run_distributed_tm: graph is disconnected");
  auto views = make_node_views(g, project_box(w0, -1.0, 1.0));
  DistributedResult res;
  res.log = MessageLog(g);
  for (std::size_t k = 0; k < max_rounds; ++k) {
    auto r = distributed_round(g, views, p, k, sched, gtol);
    res.log.merge(r.log);
    if (r.all_done) {
      res.converged = true;
      break;
    }
    ++res.rounds;
    if (keep_history) res.history.push_back(collect_weights(g, views));
  }
  res.w = collect_weights(g, views);
  return res;
}

struct InitProtocolResult {
  WeightVector w;
  MessageLog log;
};

/// Max-degree weights found in-network: max-consensus on degrees for
/// diameter(g) rounds, one message per directed link per round.
inline InitProtocolResult max_degree_protocol(const Graph& g) {
  require(is_connected(g), "max_degree_protocol: graph is disconnected");
  InitProtocolResult r{WeightVector(g.edge_count()), MessageLog(g)};
  std::vector<double> known(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) known[i] = static_cast<double>(g.degree(i));
  const std::size_t rounds = diameter(g);
  for (std::size_t k = 0; k < rounds; ++k) {
    std::vector<double> next = known;
    for (NodeId i = 0; i < g.node_count(); ++i)
      for (NodeId j : g.neighbors(i)) {
        const Payload msg = DegreePayload{known[i]};
        r.log.record(i, j, kind_of(msg), payload_size(msg));
        next[j] = std::max(next[j], known[i]);
      }
    known = std::move(next);
  }
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    if (known[e.u] != known[e.v]) throw ProtocolFault("max-consensus did not settle within the diameter");
    r.w[l] = 1.0 / (known[e.u] + 1.0);
  }
  return r;
}

/// Local-degree weights: every node sends its degree once over each link.
inline InitProtocolResult local_degree_protocol(const Graph& g) {
  InitProtocolResult r{WeightVector(g.edge_count()), MessageLog(g)};
  for (NodeId i = 0; i < g.node_count(); ++i)
    for (NodeId j : g.neighbors(i)) {
      const Payload msg = DegreePayload{static_cast<double>(g.degree(i))};
      r.log.record(i, j, kind_of(msg), payload_size(msg));
    }
  for (EdgeId l = 0; l < g.edge_count(); ++l) {
    const auto& e = g.edge(l);
    r.w[l] = 1.0 / (static_cast<double>(std::max(g.degree(e.u), g.degree(e.v))) + 1.0);
  }
  return r;
}

}  // namespace tracemin
