// Two stars joined at their centers: minimizing Tr(W^2) drives the bridge
// weight negative and the result does not converge. The repair step fixes it.
#include <iostream>

#include "tracemin/tracemin.hpp"

int main() {
  using namespace tracemin;
  const std::size_t leaves = 5;
  std::vector<Edge> edges{{0, leaves + 1}};
  for (NodeId i = 1; i <= leaves; ++i) {
    edges.push_back({0, i});
    edges.push_back({leaves + 1, leaves + 1 + i});
  }
  const Graph g(2 * leaves + 2, edges);
  const auto tm = tm_optimize(g, 2);
  const auto bridge = *g.find_edge(0, leaves + 1);
  std::cout << "bridge weight after optimization: " << tm.w[bridge] << '\n';
  std::cout << "mu before repair: " << mu_of(weights_to_matrix(g, tm.w).matrix()) << '\n';

  const auto fixed = build_convergent(weights_to_matrix(g, tm.w), RepairParams::for_graph(g));
  std::cout << "bridge weight after repair: " << fixed.w[bridge] << '\n';
  std::cout << "mu after repair: " << mu_of(fixed.matrix.matrix()) << '\n';

  Vector x0 = initial_state(g.node_count(), 1);
  const auto guard = parallel_consensus_guard(g, 2, RepairParams::for_graph(g), x0);
  std::cout << "dual run: " << guard.dual_run << ", optimized branch diverged: " << guard.diverged
            << ", repaired branch steps: " << guard.conv_branch->trace.time_or_inf() << '\n';
}
