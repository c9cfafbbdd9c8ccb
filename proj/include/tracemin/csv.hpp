#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tracemin/common.hpp"
#include "tracemin/consensus.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/schatten.hpp"
#include "tracemin/weights.hpp"

namespace tracemin::csv {

// Shortest text that reads back to the same double, so output is stable.
inline std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  std::string full = os.str();
  for (int prec = 6; prec < 17; ++prec) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    if (std::stod(s.str()) == v) return s.str();
  }
  return full;
}

inline void write_weights(std::ostream& out, const Graph& g, const WeightVector& w) {
  out << "u,v,weight\n";
  for (EdgeId l = 0; l < g.edge_count(); ++l)
    out << g.label(g.edge(l).u) << ',' << g.label(g.edge(l).v) << ',' << num(w[l]) << '\n';
}

inline void write_error_trace(std::ostream& out, const ErrorTrace& t) {
  out << "k,e_k\n";
  for (std::size_t k = 0; k < t.e.size(); ++k) out << k << ',' << num(t.e[k]) << '\n';
}

inline void write_optimizer_trace(std::ostream& out, const std::vector<OptimizerTraceRow>& rows) {
  out << "k,trace_p,mu,grad_norm,msgs_cumulative\n";
  for (const auto& r : rows)
    out << r.k << ',' << num(r.trace_p) << ',' << num(r.mu) << ',' << num(r.grad_norm) << ',' << r.msgs_cumulative
        << '\n';
}

/// Writes `text` to `path`, or throws with the path in the message.
inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace tracemin::csv
