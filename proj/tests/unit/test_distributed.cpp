#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "tracemin/distributed.hpp"

using namespace tracemin;
using namespace fixtures;

namespace {

double max_diff(const WeightVector& a, const WeightVector& b) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) d = std::max(d, std::abs(a[l] - b[l]));
  return d;
}

}  // namespace

TEST(MessageCount, SquareCostsTwoPerLink) {
  Graph g = path_graph(3);
  auto views = make_node_views(g, local_degree_weights(g));
  auto r = distributed_round(g, views, 2, 0, StepSchedule::standard(2));
  EXPECT_EQ(r.log.total_messages(), 4u);
  EXPECT_EQ(r.log.count(MessageKind::SelfWeight), 4u);
  EXPECT_EQ(r.log.total_scalars(), 4u);
}

TEST(MessageCount, FourthPowerCostsFourPerLink) {
  Graph g = complete_graph(4);
  auto views = make_node_views(g, local_degree_weights(g));
  auto r = distributed_round(g, views, 4, 0, StepSchedule::standard(4));
  EXPECT_EQ(r.log.total_messages(), 24u);
  EXPECT_EQ(r.log.count(MessageKind::LinkWeights), 12u);
  EXPECT_EQ(r.log.count(MessageKind::CubeDiagonal), 12u);
  // each row message lists the sender's three incident weights
  EXPECT_EQ(r.log.total_scalars(), 12u * 3u + 12u);
}

TEST(MessageCount, EveryDirectedLinkUsedEqually) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_connected(rng, 4, 15);
    for (int p : {2, 4, 6, 8}) {
      auto views = make_node_views(g, local_degree_weights(g));
      auto r = distributed_round(g, views, p, 0, StepSchedule::standard(p));
      EXPECT_EQ(r.log.total_messages(), messages_per_round(g, p));
      const auto per = messages_per_round(g, p) / (2 * g.edge_count());
      for (auto c : r.log.per_directed_link()) EXPECT_EQ(c, per);
    }
  }
}

TEST(MessageLog, RejectsNonLinks) {
  Graph g = path_graph(3);
  MessageLog log(g);
  EXPECT_THROW(log.record(0, 2, MessageKind::Estimate, 1), ProtocolFault);
  log.record(1, 0, MessageKind::Estimate, 1);
  EXPECT_EQ(log.directed_count(0, false), 1u);
  EXPECT_EQ(log.directed_count(0, true), 0u);
  EXPECT_DOUBLE_EQ(log.per_link_average(), 0.5);
}

TEST(Equivalence, DistributedMatchesCentralized) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 8; ++t) {
    Graph g = random_connected(rng, 5, 14);
    for (int p : {2, 4, 6}) {
      auto sched = StepSchedule::standard(p);
      WeightVector w0 = local_degree_weights(g);
      auto d = run_distributed_tm(g, p, sched, 0.0, 50, w0);
      auto c = tm_optimize(g, p, sched, 0.0, 50, w0);
      EXPECT_EQ(d.rounds, 50u);
      EXPECT_LE(max_diff(d.w, c.w), 1e-12) << "p=" << p;
    }
  }
}

TEST(Equivalence, StoppingRuleMatchesCentralizedMaxNorm) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 5; ++t) {
    Graph g = random_connected(rng, 5, 12);
    for (int p : {2, 4}) {
      auto sched = StepSchedule::standard(p);
      OptimizerOptions o;
      o.stop_on_max_norm = true;
      auto c = tm_optimize(g, p, sched, kDefaultGradTol, kDefaultMaxIter, local_degree_weights(g), o);
      auto d = run_distributed_tm(g, p, sched, kDefaultGradTol, kDefaultMaxIter, local_degree_weights(g));
      ASSERT_TRUE(d.converged);
      EXPECT_EQ(d.rounds, c.state.iteration);
      EXPECT_LE(max_diff(d.w, c.w), 1e-10);
      // the final round only exchanges, it applies no step
      EXPECT_EQ(d.log.total_messages(), (d.rounds + 1) * messages_per_round(g, p));
    }
  }
}

TEST(Equivalence, EndpointsAgreeEveryRound) {
  std::mt19937_64 rng(13);
  Graph g = random_connected(rng, 10, 10);
  for (int p : {2, 4, 6}) {
    auto d = run_distributed_tm(g, p, StepSchedule::standard(p), 0.0, 20, local_degree_weights(g), true);
    EXPECT_EQ(d.history.size(), 20u);  // collect_weights throws on any endpoint disagreement
  }
}

TEST(ProtocolFaults, InconsistentEndpointWeightsDetected) {
  Graph g = path_graph(4);
  auto views = make_node_views(g, local_degree_weights(g));
  views[1].link_weights[views[1].slot(2)] += 0.1;
  EXPECT_THROW(distributed_round(g, views, 4, 0, StepSchedule::standard(4)), ProtocolFault);
  EXPECT_THROW(collect_weights(g, views), ProtocolFault);
}

TEST(ProtocolFaults, WrongViewCount) {
  Graph g = path_graph(4);
  auto views = make_node_views(g, local_degree_weights(g));
  views.pop_back();
  EXPECT_THROW(distributed_round(g, views, 2, 0, StepSchedule::standard(2)), ProtocolFault);
}

TEST(ProtocolFaults, UnknownNeighborSlot) {
  Graph g = path_graph(4);
  auto views = make_node_views(g, local_degree_weights(g));
  EXPECT_THROW(views[0].slot(3), ProtocolFault);
}

TEST(Blacklist, LinkFrozenAtZero) {
  Graph g = complete_graph(5);
  auto views = make_node_views(g, local_degree_weights(g));
  views[0].blacklist(1);
  views[1].blacklist(0);
  for (std::size_t k = 0; k < 10; ++k) distributed_round(g, views, 2, k, StepSchedule::standard(2));
  EXPECT_EQ(collect_weights(g, views)[*g.find_edge(0, 1)], 0.0);
}

TEST(NumericalFaults, NonFiniteWeights) {
  Graph g = path_graph(3);
  WeightVector w{std::numeric_limits<double>::infinity(), 0.2};
  auto views = make_node_views(g, w);
  EXPECT_THROW(distributed_round(g, views, 2, 0, StepSchedule::standard(2)), NumericalFault);
}

TEST(InitProtocols, LocalDegreeOneExchange) {
  std::mt19937_64 rng(2);
  Graph g = random_connected(rng, 8, 16);
  auto r = local_degree_protocol(g);
  EXPECT_EQ(r.w.values(), local_degree_weights(g).values());
  EXPECT_EQ(r.log.total_messages(), 2 * g.edge_count());
  EXPECT_EQ(r.log.count(MessageKind::Degree), 2 * g.edge_count());
}

TEST(InitProtocols, MaxDegreeNeedsDiameterRounds) {
  Graph g = path_graph(16);
  auto r = max_degree_protocol(g);
  EXPECT_DOUBLE_EQ(r.log.per_link_average(), 30.0);
  for (double x : r.w.values()) EXPECT_DOUBLE_EQ(x, 1.0 / 3);
}

TEST(InitProtocols, MaxDegreeMatchesCentral) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    Graph g = random_connected(rng, 3, 20);
    auto r = max_degree_protocol(g);
    EXPECT_EQ(r.w.values(), max_degree_weights(g).values());
    EXPECT_EQ(r.log.total_messages(), 2 * g.edge_count() * diameter(g));
  }
}

TEST(InitProtocols, MaxDegreeRejectsDisconnected) {
  EXPECT_THROW(max_degree_protocol(Graph(4, {{0, 1}, {2, 3}})), std::invalid_argument);
}
