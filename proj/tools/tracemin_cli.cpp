#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tracemin/tracemin.hpp"

namespace fs = std::filesystem;
using namespace tracemin;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string graph;
  std::string model;
  std::size_t n = 0;
  double pr = -1.0;
  double radius = -1.0;
  int p = 2;
  double a = 0.0;
  double b = -1.0;
  double gtol = -1.0;
  double threshold = -1.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t cycles = 0;
  std::string out;
  std::string algorithms;
};

void add_graph_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "key=value config file; flags override it");
  app->add_option("--graph", f.graph, "edge-list file (sets model=file)");
  app->add_option("--model", f.model, "er, rgg or file");
  app->add_option("--n", f.n, "node count for random models");
  app->add_option("--pr", f.pr, "edge probability for er");
  app->add_option("--radius", f.radius, "connection radius for rgg");
  app->add_option("--seed", f.seed, "base seed")->each([&](const std::string&) { f.seed_set = true; });
  app->add_option("--out", f.out, "output directory");
}

void add_opt_flags(CLI::App* app, CommonFlags& f) {
  app->add_option("--p", f.p, "even power")->check(CLI::PositiveNumber);
  app->add_option("--a", f.a, "step schedule numerator (default 10/p)");
  app->add_option("--b", f.b, "step schedule offset (default 100)");
  app->add_option("--gtol", f.gtol, "gradient tolerance (default 0.02)");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw std::runtime_error("cannot read config " + f.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    c = ExperimentConfig::from_text(ss.str());
  }
  if (!f.graph.empty()) {
    c.graph_path = f.graph;
    c.model = "file";
  }
  if (!f.model.empty()) c.model = f.model;
  if (f.n) c.n = f.n;
  if (f.pr >= 0.0) c.pr = f.pr;
  if (f.radius >= 0.0) c.radius = f.radius;
  if (f.a > 0.0) c.a = f.a;
  if (f.b >= 0.0) c.b = f.b;
  if (f.gtol >= 0.0) c.gtol = f.gtol;
  if (f.threshold >= 0.0) c.threshold = f.threshold;
  if (f.reps) c.reps = f.reps;
  if (f.seed_set) c.seed = f.seed;
  if (f.cycles) c.cycles = f.cycles;
  if (!f.out.empty()) c.out = f.out;
  if (!f.algorithms.empty()) {
    c.algorithms.clear();
    std::stringstream ss(f.algorithms);
    for (std::string tok; std::getline(ss, tok, ',');)
      if (!tok.empty()) c.algorithms.push_back(tok);
  }
  c.validate();
  return c;
}

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

template <class Fn>
void write_csv(const ExperimentConfig& c, const std::string& name, Fn fn) {
  std::ostringstream os;
  fn(os);
  const auto path = out_path(c, name);
  csv::write_file(path, os.str());
  std::cout << "wrote " << path << '\n';
}

WeightVector weights_for(const Graph& g, const AlgoSpec& a, const ExperimentConfig& c) {
  if (a.kind == AlgoKind::JCO) throw std::invalid_argument("use the jco subcommand for JCO");
  return select_weights(g, a, c).first;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average consensus with trace-minimizing weights"};
  app.require_subcommand(1);
  CommonFlags f;

  auto* gen = app.add_subcommand("gen", "generate a random connected graph as an edge list");
  add_graph_flags(gen, f);

  auto* optimize = app.add_subcommand("optimize", "minimize Tr(W^p) and write weights and the optimizer trace");
  add_graph_flags(optimize, f);
  add_opt_flags(optimize, f);
  std::size_t max_iter = kDefaultMaxIter;
  bool distributed = false;
  optimize->add_option("--max-iter", max_iter, "iteration cap");
  optimize->add_flag("--distributed", distributed, "run the message-level protocol");

  auto* consensus = app.add_subcommand("consensus", "run averaging with one weight rule");
  add_graph_flags(consensus, f);
  add_opt_flags(consensus, f);
  std::string algorithm = "LD";
  consensus->add_option("--algorithm", algorithm, "MD, LD, OC or TM<p>");
  consensus->add_option("--threshold", f.threshold, "error threshold (default 0.001)");

  auto* jco = app.add_subcommand("jco", "joint consensus and optimization");
  add_graph_flags(jco, f);
  std::string init = "LD";
  jco->add_option("--p", f.p, "2 or 4");
  jco->add_option("--init", init, "starting weights: MD or LD");
  jco->add_option("--threshold", f.threshold, "error threshold (default 0.001)");
  jco->add_option("--gtol", f.gtol, "gradient tolerance (default 0.02)");

  auto* compare = app.add_subcommand("compare", "replicated comparison of weight rules");
  add_graph_flags(compare, f);
  add_opt_flags(compare, f);
  compare->add_option("--algorithms", f.algorithms, "comma list, e.g. MD,LD,OC,TM2,TM4,JCO4-LD");
  compare->add_option("--reps", f.reps, "replications");
  compare->add_option("--threshold", f.threshold, "error threshold (default 0.001)");

  auto* overhead = app.add_subcommand("overhead", "cumulative messages per link over consensus cycles");
  add_graph_flags(overhead, f);
  add_opt_flags(overhead, f);
  overhead->add_option("--algorithms", f.algorithms, "comma list of MD, LD, TM<p>");
  overhead->add_option("--reps", f.reps, "replications");
  overhead->add_option("--cycles", f.cycles, "consensus cycles");
  overhead->add_option("--threshold", f.threshold, "error threshold (default 0.001)");

  auto* repair = app.add_subcommand("repair", "optimize, repair if needed and run the dual consensus guard");
  add_graph_flags(repair, f);
  add_opt_flags(repair, f);
  double delta = 0.0;
  repair->add_option("--delta", delta, "lower bound on repaired link weights (default 1/(2n))");
  repair->add_option("--threshold", f.threshold, "error threshold (default 0.001)");

  auto* detect = app.add_subcommand("detect", "guarded JCO with an optional misbehaving node");
  add_graph_flags(detect, f);
  std::size_t rounds = 200;
  std::string adversary = "none";
  NodeId adv_node = 0, victim = 0;
  std::size_t start = 1;
  double offset = 1.0;
  detect->add_option("--p", f.p, "2 or 4");
  detect->add_option("--rounds", rounds, "slots to simulate");
  detect->add_option("--adversary", adversary, "none, stubborn, forge-estimate or forge-weight")
      ->check(CLI::IsMember({"none", "stubborn", "forge-estimate", "forge-weight"}));
  detect->add_option("--adversary-node", adv_node, "misbehaving node index");
  detect->add_option("--victim", victim, "neighbor whose entry is forged");
  detect->add_option("--start", start, "first misbehaving slot");
  detect->add_option("--offset", offset, "forged amount");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig c = build_config(f);
    if (gen->parsed()) {
      const Graph g = make_graph(c, c.seed);
      if (f.out.empty()) {
        write_edge_list(std::cout, g);
      } else {
        std::ostringstream os;
        write_edge_list(os, g);
        const auto path = out_path(c, "graph.txt");
        csv::write_file(path, os.str());
        std::cout << "wrote " << path << " (n=" << g.node_count() << ", m=" << g.edge_count() << ")\n";
      }
      return 0;
    }

    const Graph g = make_graph(c, c.seed);
    const Vector x0 = initial_state(g.node_count(), c.seed, c.x0_low, c.x0_high);

    if (optimize->parsed()) {
      const auto w0 = local_degree_weights(g);
      if (distributed) {
        auto r = run_distributed_tm(g, f.p, c.schedule(f.p), c.gtol, max_iter, w0);
        const auto rep = spectral_report(weights_to_matrix(g, r.w).matrix());
        std::cout << "rounds=" << r.rounds << " converged=" << r.converged << " mu=" << rep.mu
                  << " messages=" << r.log.total_messages() << " per_link=" << r.log.per_link_average() << '\n';
        write_csv(c, "weights.csv", [&](std::ostream& os) { csv::write_weights(os, g, r.w); });
      } else {
        OptimizerOptions opts;
        opts.record_trace = true;
        auto r = tm_optimize(g, f.p, c.schedule(f.p), c.gtol, max_iter, w0, opts);
        const auto rep = spectral_report(weights_to_matrix(g, r.w).matrix());
        std::cout << "iterations=" << r.state.iteration << " converged=" << r.state.converged << " mu=" << rep.mu
                  << " trace_initial=" << r.state.trace_initial << " trace_final=" << r.state.trace_final
                  << " messages=" << r.state.messages << '\n';
        write_csv(c, "weights.csv", [&](std::ostream& os) { csv::write_weights(os, g, r.w); });
        write_csv(c, "optimizer_trace.csv", [&](std::ostream& os) { csv::write_optimizer_trace(os, r.state.trace); });
      }
    } else if (consensus->parsed()) {
      const auto spec = parse_algorithm(algorithm);
      const auto w = weights_for(g, spec, c);
      const auto wm = weights_to_matrix(g, w);
      auto r = run_consensus(wm, x0, c.threshold, c.max_consensus_iter);
      std::cout << "algorithm=" << spec.name() << " mu=" << mu_of(wm.matrix()) << " conv_time=" << r.trace.time_or_inf()
                << '\n';
      write_csv(c, "trace.csv", [&](std::ostream& os) { csv::write_error_trace(os, r.trace); });
      write_csv(c, "weights.csv", [&](std::ostream& os) { csv::write_weights(os, g, w); });
    } else if (jco->parsed()) {
      const auto spec = parse_algorithm("JCO" + std::to_string(f.p) + "-" + init);
      const auto w0 = spec.init == AlgoKind::MD ? max_degree_weights(g) : local_degree_weights(g);
      auto r = run_jco(g, f.p, w0, x0, c.threshold, c.max_consensus_iter, c.gtol);
      std::cout << "algorithm=" << spec.name() << " conv_time=" << r.trace.time_or_inf()
                << " optimizer_rounds=" << r.optimizer_rounds << " messages=" << r.log.total_messages() << '\n';
      write_csv(c, "trace.csv", [&](std::ostream& os) { csv::write_error_trace(os, r.trace); });
      write_csv(c, "weights.csv", [&](std::ostream& os) { csv::write_weights(os, g, r.w); });
    } else if (compare->parsed()) {
      auto r = run_comparison(c);
      for (const auto& row : r.rows)
        std::cout << row.algorithm << ' ' << row.metric << ' ' << row.summary.mean << " +- " << row.summary.ci95_half
                  << '\n';
      write_csv(c, "comparison.csv", [&](std::ostream& os) { csv::write_comparison(os, r); });
      write_csv(c, "summary.csv", [&](std::ostream& os) { csv::write_summary(os, r); });
      write_csv(c, "config.txt", [&](std::ostream& os) { os << c.to_text(); });
    } else if (overhead->parsed()) {
      auto l = run_overhead(c);
      for (const auto& e : l.entries)
        std::cout << e.algorithm << " init_per_link=" << e.init_per_link << " per_cycle_per_link=" << e.per_cycle_per_link
                  << '\n';
      write_csv(c, "ledger.csv", [&](std::ostream& os) { csv::write_ledger(os, l); });
      write_csv(c, "crossovers.csv", [&](std::ostream& os) { csv::write_crossovers(os, l); });
    } else if (repair->parsed()) {
      RepairParams params = delta > 0.0 ? RepairParams{delta} : RepairParams::for_graph(g);
      auto r = parallel_consensus_guard(g, f.p, params, x0, c.threshold);
      const double mu_p = mu_of(weights_to_matrix(g, r.w_p).matrix());
      std::cout << "mu_p=" << mu_p << " dual_run=" << r.dual_run << " diverged=" << r.diverged;
      if (r.w_conv) std::cout << " mu_conv=" << mu_of(weights_to_matrix(g, *r.w_conv).matrix());
      std::cout << '\n';
      write_csv(c, "weights.csv", [&](std::ostream& os) { csv::write_weights(os, g, r.w_p); });
      if (r.w_conv) write_csv(c, "weights_conv.csv", [&](std::ostream& os) { csv::write_weights(os, g, *r.w_conv); });
    } else if (detect->parsed()) {
      std::vector<Adversary> advs;
      if (adversary != "none") {
        Adversary a;
        a.node = adv_node;
        a.kind = adversary == "stubborn"         ? AdversaryKind::Stubborn
                 : adversary == "forge-estimate" ? AdversaryKind::ForgedEstimate
                                                 : AdversaryKind::ForgedWeight;
        a.victim = victim;
        a.start_round = start;
        a.offset = offset;
        advs.push_back(a);
      }
      auto r = run_guarded_jco(g, f.p, local_degree_weights(g), x0, rounds, advs, c.gtol);
      std::cout << "declarations=" << r.events.size() << '\n';
      write_csv(c, "detections.csv", [&](std::ostream& os) { csv::write_detections(os, g, r.events); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
