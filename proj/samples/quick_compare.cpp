// Compares the heuristic weight rules with trace minimization on one random
// geometric graph and prints mu and the averaging time for each.
#include <iostream>

#include "tracemin/tracemin.hpp"

int main() {
  using namespace tracemin;
  ExperimentConfig c;
  c.model = "rgg";
  c.n = 60;
  c.radius = 0.2;
  c.seed = 7;
  const Graph g = make_graph(c, c.seed);
  const Vector x0 = initial_state(g.node_count(), c.seed);
  std::cout << "n=" << g.node_count() << " m=" << g.edge_count() << '\n';
  for (const char* name : {"MD", "LD", "OC", "TM2", "TM4"}) {
    const auto o = evaluate_algorithm(g, parse_algorithm(name), c, x0);
    std::cout << name << "\tmu=" << o.mu << "\tsteps=" << o.conv_time << "\tmessages=" << o.msgs_total() << '\n';
  }
}
