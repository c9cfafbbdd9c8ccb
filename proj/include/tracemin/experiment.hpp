#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "tracemin/common.hpp"
#include "tracemin/consensus.hpp"
#include "tracemin/csv.hpp"
#include "tracemin/distributed.hpp"
#include "tracemin/graph.hpp"
#include "tracemin/schatten.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"

namespace tracemin {

// ---------------------------------------------------------------------------
// Algorithms

enum class AlgoKind { MD, LD, OC, TM, JCO };

struct AlgoSpec {
  AlgoKind kind = AlgoKind::LD;
  int p = 0;                          // TM and JCO
  AlgoKind init = AlgoKind::LD;       // JCO starting weights: MD or LD

  std::string name() const {
    switch (kind) {
      case AlgoKind::MD: return "MD";
      case AlgoKind::LD: return "LD";
      case AlgoKind::OC: return "OC";
      case AlgoKind::TM: return "TM" + std::to_string(p);
      case AlgoKind::JCO: return "JCO" + std::to_string(p) + "-" + (init == AlgoKind::MD ? "MD" : "LD");
    }
    return "?";
  }
  friend bool operator==(const AlgoSpec&, const AlgoSpec&) = default;
};

/// Accepts MD, LD, OC, TM<p> and JCO<p>-MD / JCO<p>-LD (p = 2 or 4 for JCO).
inline AlgoSpec parse_algorithm(const std::string& s) {
  if (s == "MD") return {AlgoKind::MD};
  if (s == "LD") return {AlgoKind::LD};
  if (s == "OC") return {AlgoKind::OC};
  auto parse_p = [&](const std::string& digits) {
    std::size_t used = 0;
    int p = 0;
    try {
      p = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != digits.size() || !is_even_power(p)) throw std::invalid_argument("bad power in algorithm name: " + s);
    return p;
  };
  if (s.rfind("TM", 0) == 0) return {AlgoKind::TM, parse_p(s.substr(2))};
  if (s.rfind("JCO", 0) == 0) {
    const auto dash = s.find('-');
    if (dash == std::string::npos) throw std::invalid_argument("JCO needs an init suffix (-MD or -LD): " + s);
    const int p = parse_p(s.substr(3, dash - 3));
    if (p != 2 && p != 4) throw std::invalid_argument("JCO supports p = 2 or 4: " + s);
    const auto init = s.substr(dash + 1);
    if (init != "MD" && init != "LD") throw std::invalid_argument("JCO init must be MD or LD: " + s);
    return {AlgoKind::JCO, p, init == "MD" ? AlgoKind::MD : AlgoKind::LD};
  }
  throw std::invalid_argument("unknown algorithm: " + s);
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string model = "rgg";  // er, rgg or file
  std::size_t n = 100;
  double pr = 0.3;
  double radius = 0.1517;
  std::string graph_path;
  std::vector<std::string> algorithms = {"MD", "LD", "OC", "TM2", "TM4"};
  std::optional<double> a;  // step schedule; default 10/p
  double b = 100.0;
  double gtol = kDefaultGradTol;
  std::size_t max_opt_iter = kDefaultMaxIter;
  double threshold = kDefaultThreshold;
  std::size_t max_consensus_iter = kDefaultConsensusIter;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t cycles = 10;
  double x0_low = 0.0;
  double x0_high = 100.0;
  double guard_agreement = 10.0;  // guard: agreement when estimates differ by <= factor * threshold
  std::size_t threads = 0;        // 0: hardware concurrency
  std::string out = ".";

  std::vector<AlgoSpec> algorithm_specs() const {
    std::vector<AlgoSpec> out_specs;
    for (const auto& s : algorithms) out_specs.push_back(parse_algorithm(s));
    return out_specs;
  }
  StepSchedule schedule(int p) const { return {a.value_or(10.0 / p), b}; }

  void validate() const {
    require(model == "er" || model == "rgg" || model == "file", "model must be er, rgg or file");
    if (model == "file") require(!graph_path.empty(), "model=file needs graph");
    else require(n >= 2, "n must be at least 2");
    if (model == "er") require(pr >= 0.0 && pr <= 1.0, "pr must lie in [0, 1]");
    if (model == "rgg") require(radius > 0.0, "radius must be positive");
    require(!a || *a > 0.0, "a must be positive");
    require(b >= 0.0, "b must be nonnegative");
    require(gtol >= 0.0, "gtol must be nonnegative");
    require(threshold > 0.0, "threshold must be positive");
    require(reps >= 1, "reps must be at least 1");
    require(x0_low <= x0_high, "x0 range is empty");
    (void)algorithm_specs();
  }

  /// Flat key=value text, one key per line, in a fixed order.
  std::string to_text() const {
    std::ostringstream os;
    auto put = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
    put("model", model);
    put("n", std::to_string(n));
    put("pr", csv::num(pr));
    put("radius", csv::num(radius));
    if (!graph_path.empty()) put("graph", '"' + graph_path + '"');
    std::string algos;
    for (const auto& s : algorithms) algos += (algos.empty() ? "" : ",") + s;
    put("algorithms", '"' + algos + '"');
    if (a) put("a", csv::num(*a));
    put("b", csv::num(b));
    put("gtol", csv::num(gtol));
    put("max_opt_iter", std::to_string(max_opt_iter));
    put("threshold", csv::num(threshold));
    put("max_consensus_iter", std::to_string(max_consensus_iter));
    put("reps", std::to_string(reps));
    put("seed", std::to_string(seed));
    put("cycles", std::to_string(cycles));
    put("x0_low", csv::num(x0_low));
    put("x0_high", csv::num(x0_high));
    put("guard_agreement", csv::num(guard_agreement));
    put("threads", std::to_string(threads));
    put("out", '"' + out + '"');
    return os.str();
  }

  static ExperimentConfig from_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    CLI::ConfigINI parser;
    for (const auto& item : parser.from_config(in)) {
      if (item.inputs.empty()) continue;
      std::string v = item.inputs.front();
      for (std::size_t k = 1; k < item.inputs.size(); ++k) v += "," + item.inputs[k];
      const auto& key = item.name;
      auto as_size = [&] { return static_cast<std::size_t>(std::stoull(v)); };
      if (key == "model") c.model = v;
      else if (key == "n") c.n = as_size();
      else if (key == "pr") c.pr = std::stod(v);
      else if (key == "radius") c.radius = std::stod(v);
      else if (key == "graph") c.graph_path = v;
      else if (key == "algorithms") {
        c.algorithms.clear();
        std::stringstream ss(v);
        for (std::string tok; std::getline(ss, tok, ',');)
          if (!tok.empty()) c.algorithms.push_back(tok);
      } else if (key == "a") c.a = std::stod(v);
      else if (key == "b") c.b = std::stod(v);
      else if (key == "gtol") c.gtol = std::stod(v);
      else if (key == "max_opt_iter") c.max_opt_iter = as_size();
      else if (key == "threshold") c.threshold = std::stod(v);
      else if (key == "max_consensus_iter") c.max_consensus_iter = as_size();
      else if (key == "reps") c.reps = as_size();
      else if (key == "seed") c.seed = std::stoull(v);
      else if (key == "cycles") c.cycles = as_size();
      else if (key == "x0_low") c.x0_low = std::stod(v);
      else if (key == "x0_high") c.x0_high = std::stod(v);
      else if (key == "guard_agreement") c.guard_agreement = std::stod(v);
      else if (key == "threads") c.threads = as_size();
      else if (key == "out") c.out = v;
      else throw std::invalid_argument("unknown config key: " + key);
    }
    return c;
  }
};

// ---------------------------------------------------------------------------
// Seeds, graphs, initial states

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t replication_seed(const ExperimentConfig& c, std::size_t r) { return c.seed + r; }

/// Graph for one replication. Random models draw from the replication seed and
/// redraw with fresh derived seeds until the sample is connected.
inline Graph make_graph(const ExperimentConfig& c, std::uint64_t rep_seed, std::size_t max_attempts = 10000) {
  if (c.model == "file") {
    Graph g = load_edge_list_file(c.graph_path);
    require(is_connected(g), "graph file " + c.graph_path + " is disconnected");
    return g;
  }
  std::uint64_t s = rep_seed;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Graph g = c.model == "er" ? generate_er(c.n, c.pr, s) : generate_rgg(c.n, c.radius, s);
    if (is_connected(g)) return g;
    s = splitmix64(s ^ (attempt + 1));
  }
  throw std::runtime_error("no connected sample after " + std::to_string(max_attempts) + " attempts");
}

inline Vector initial_state(std::size_t n, std::uint64_t rep_seed, double lo = 0.0, double hi = 100.0) {
  std::mt19937_64 rng(splitmix64(rep_seed ^ 0x5eedULL));
  std::uniform_real_distribution<double> u(lo, hi);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
  return x;
}

// ---------------------------------------------------------------------------
// Per-algorithm evaluation

struct AlgoOutcome {
  std::string algorithm;
  WeightVector w;
  double mu = 0.0;
  double conv_time = 0.0;               // +inf when never below threshold
  std::uint64_t init_messages = 0;      // weight selection (MD/LD init, optimizer rounds)
  std::uint64_t consensus_messages = 0; // averaging iterations * 2m
  std::uint64_t msgs_total() const { return init_messages + consensus_messages; }
  bool converged_optimizer = true;
};

/// Weights plus the messages needed to compute them in-network. OC is computed
/// centrally and has no message count; JCO is handled by evaluate_algorithm.
inline std::pair<WeightVector, std::uint64_t> select_weights(const Graph& g, const AlgoSpec& a,
                                                             const ExperimentConfig& c, bool* optimizer_converged = nullptr) {
  switch (a.kind) {
    case AlgoKind::MD: {
      auto r = max_degree_protocol(g);
      return {r.w, r.log.total_messages()};
    }
    case AlgoKind::LD: {
      auto r = local_degree_protocol(g);
      return {r.w, r.log.total_messages()};
    }
    case AlgoKind::OC: return {optimal_constant_weights(g), 0};
    case AlgoKind::TM: {
      auto r = tm_optimize(g, a.p, c.schedule(a.p), c.gtol, c.max_opt_iter, local_degree_weights(g));
      if (optimizer_converged) *optimizer_converged = r.state.converged;
      return {r.w, r.state.messages};
    }
    case AlgoKind::JCO: break;
  }
  throw std::invalid_argument("select_weights: JCO has no standalone weight selection");
}

inline AlgoOutcome evaluate_algorithm(const Graph& g, const AlgoSpec& a, const ExperimentConfig& c, const Vector& x0) {
  AlgoOutcome o;
  o.algorithm = a.name();
  const std::uint64_t per_step = 2 * static_cast<std::uint64_t>(g.edge_count());
  if (a.kind == AlgoKind::JCO) {
    const auto w0 = a.init == AlgoKind::MD ? max_degree_protocol(g) : local_degree_protocol(g);
    auto r = run_jco(g, a.p, w0.w, x0, c.threshold, c.max_consensus_iter, c.gtol);
    o.w = r.w;
    o.mu = mu_of(weights_to_matrix(g, r.w).matrix());
    o.conv_time = r.trace.time_or_inf();
    const auto estimates = r.log.count(MessageKind::Estimate);
    o.init_messages = w0.log.total_messages() + (r.log.total_messages() - estimates);
    o.consensus_messages = estimates;
    return o;
  }
  auto [w, init] = select_weights(g, a, c, &o.converged_optimizer);
  o.w = w;
  o.init_messages = init;
  const Matrix wm = weights_to_matrix(g, w).matrix();
  o.mu = mu_of(wm);
  auto run = run_consensus(wm, x0, c.threshold, c.max_consensus_iter);
  o.conv_time = run.trace.time_or_inf();
  o.consensus_messages = run.trace.conv_time ? *run.trace.conv_time * per_step : 0;
  return o;
}

// ---------------------------------------------------------------------------
// Statistics

struct Summary {
  double mean = 0.0;
  double ci95_half = std::numeric_limits<double>::quiet_NaN();  // needs at least two samples
  std::size_t reps = 0;
};

/// Mean with a Student-t 95% half-width on reps - 1 degrees of freedom.
inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.reps = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  if (!std::isfinite(s.mean)) {
    s.ci95_half = std::numeric_limits<double>::infinity();
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  boost::math::students_t dist(static_cast<double>(xs.size() - 1));
  s.ci95_half = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(static_cast<double>(xs.size()));
  return s;
}

namespace detail {

// Runs f(r) for r in [0, count) on up to `threads` workers; results keep replication order.
template <class F>
auto run_replications(std::size_t count, std::size_t threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t start = 0; start < count; start += threads) {
    std::vector<std::future<R>> batch;
    for (std::size_t r = start; r < std::min(count, start + threads); ++r)
      batch.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async, f, r));
    for (auto& fut : batch) out.push_back(fut.get());
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Comparison

struct ReplicationRecord {
  std::uint64_t seed;
  std::size_t n;
  std::size_t m;
  std::vector<AlgoOutcome> outcomes;  // in config order
};

struct ComparisonRow {
  std::string algorithm;
  std::string metric;  // mu, conv_time or msgs_total
  Summary summary;
};

struct ComparisonResult {
  std::vector<ReplicationRecord> replications;
  std::vector<ComparisonRow> rows;
};

inline ComparisonResult run_comparison(const ExperimentConfig& c) {
  c.validate();
  const auto specs = c.algorithm_specs();
  ComparisonResult res;
  res.replications = detail::run_replications(c.reps, c.threads, [&](std::size_t r) {
    const auto seed = replication_seed(c, r);
    const Graph g = make_graph(c, seed);
    const Vector x0 = initial_state(g.node_count(), seed, c.x0_low, c.x0_high);
    ReplicationRecord rec{seed, g.node_count(), g.edge_count(), {}};
    for (const auto& a : specs) rec.outcomes.push_back(evaluate_algorithm(g, a, c, x0));
    return rec;
  });
  for (std::size_t k = 0; k < specs.size(); ++k) {
    std::vector<double> mu, t, msgs;
    for (const auto& rec : res.replications) {
      mu.push_back(rec.outcomes[k].mu);
      t.push_back(rec.outcomes[k].conv_time);
      msgs.push_back(static_cast<double>(rec.outcomes[k].msgs_total()));
    }
    const auto name = specs[k].name();
    res.rows.push_back({name, "mu", summarize(mu)});
    res.rows.push_back({name, "conv_time", summarize(t)});
    res.rows.push_back({name, "msgs_total", summarize(msgs)});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Communication overhead

struct OverheadEntry {
  std::string algorithm;
  double init_per_link = 0.0;       // mean over replications
  double per_cycle_per_link = 0.0;  // mean over replications
  std::vector<double> cumulative;   // index c = 0..cycles: init + c * per_cycle
  std::uint64_t init_messages_total = 0;   // summed over replications, from the message logs
  std::uint64_t cycle_messages_total = 0;  // one cycle, summed over replications
};

struct Crossover {
  std::string algorithm;  // the one with the larger initialization cost
  std::string overtakes;
  std::optional<std::size_t> cycle;  // first cycle with a strictly smaller cumulative count
};

struct OverheadLedger {
  std::size_t cycles = 0;
  std::vector<OverheadEntry> entries;
  std::vector<Crossover> crossovers;
};

inline OverheadLedger run_overhead(const ExperimentConfig& c) {
  c.validate();
  std::vector<AlgoSpec> specs;
  for (const auto& a : c.algorithm_specs())
    if (a.kind != AlgoKind::JCO && a.kind != AlgoKind::OC) specs.push_back(a);
  require(!specs.empty(), "overhead needs at least one of MD, LD or TM<p>");

  struct Rep {
    std::vector<double> init, cycle;
    std::vector<std::uint64_t> init_total, cycle_total;
  };
  auto reps = detail::run_replications(c.reps, c.threads, [&](std::size_t r) {
    const auto seed = replication_seed(c, r);
    const Graph g = make_graph(c, seed);
    const Vector x0 = initial_state(g.node_count(), seed, c.x0_low, c.x0_high);
    const double m = static_cast<double>(g.edge_count());
    Rep out;
    for (const auto& a : specs) {
      auto o = evaluate_algorithm(g, a, c, x0);
      out.init.push_back(static_cast<double>(o.init_messages) / m);
      out.cycle.push_back(static_cast<double>(o.consensus_messages) / m);
      out.init_total.push_back(o.init_messages);
      out.cycle_total.push_back(o.consensus_messages);
    }
    return out;
  });

  OverheadLedger ledger;
  ledger.cycles = c.cycles;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    OverheadEntry e;
    e.algorithm = specs[k].name();
    for (const auto& r : reps) {
      e.init_per_link += r.init[k];
      e.per_cycle_per_link += r.cycle[k];
      e.init_messages_total += r.init_total[k];
      e.cycle_messages_total += r.cycle_total[k];
    }
    e.init_per_link /= static_cast<double>(reps.size());
    e.per_cycle_per_link /= static_cast<double>(reps.size());
    for (std::size_t cy = 0; cy <= c.cycles; ++cy)
      e.cumulative.push_back(e.init_per_link + static_cast<double>(cy) * e.per_cycle_per_link);
    ledger.entries.push_back(std::move(e));
  }
  for (const auto& a : ledger.entries)
    for (const auto& b : ledger.entries) {
      if (&a == &b || a.init_per_link <= b.init_per_link) continue;
      Crossover x{a.algorithm, b.algorithm, std::nullopt};
      for (std::size_t cy = 1; cy <= c.cycles; ++cy)
        if (a.cumulative[cy] < b.cumulative[cy]) {
          x.cycle = cy;
          break;
        }
      ledger.crossovers.push_back(x);
    }
  return ledger;
}

// ---------------------------------------------------------------------------
// CSV

namespace csv {

inline void write_comparison(std::ostream& out, const ComparisonResult& r) {
  out << "algorithm,metric,mean,ci95_half,reps\n";
  for (const auto& row : r.rows)
    out << row.algorithm << ',' << row.metric << ',' << num(row.summary.mean) << ',' << num(row.summary.ci95_half)
        << ',' << row.summary.reps << '\n';
}

inline void write_summary(std::ostream& out, const ComparisonResult& r) {
  out << "seed,algorithm,mu,conv_time,msgs_total\n";
  for (const auto& rec : r.replications)
    for (const auto& o : rec.outcomes)
      out << rec.seed << ',' << o.algorithm << ',' << num(o.mu) << ',' << num(o.conv_time) << ',' << o.msgs_total()
          << '\n';
}

inline void write_ledger(std::ostream& out, const OverheadLedger& l) {
  out << "algorithm,cycle,msgs_per_link\n";
  for (const auto& e : l.entries)
    for (std::size_t cy = 0; cy < e.cumulative.size(); ++cy) out << e.algorithm << ',' << cy << ',' << num(e.cumulative[cy]) << '\n';
}

inline void write_crossovers(std::ostream& out, const OverheadLedger& l) {
  out << "algorithm,overtakes,cycle\n";
  for (const auto& x : l.crossovers)
    out << x.algorithm << ',' << x.overtakes << ',' << (x.cycle ? std::to_string(*x.cycle) : "none") << '\n';
}

}  // namespace csv

}  // namespace tracemin
