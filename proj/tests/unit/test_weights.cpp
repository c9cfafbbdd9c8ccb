#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"

using namespace tracemin;
using namespace fixtures;

TEST(WeightsToMatrix, SingleEdgeHalf) {
  auto w = weights_to_matrix(Graph(2, {{0, 1}}), {0.5});
  EXPECT_EQ(w.matrix(), Matrix::Constant(2, 2, 0.5));
}

TEST(WeightsToMatrix, ZeroWeightsGiveIdentity) {
  Graph g = generate_er(8, 0.5, 1);
  EXPECT_EQ(weights_to_matrix(g, WeightVector(g.edge_count(), 0.0)).matrix(), Matrix::Identity(8, 8));
}

TEST(WeightsToMatrix, TriangleThirds) {
  auto w = weights_to_matrix(complete_graph(3), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(w(i, j), 1.0 / 3, 1e-15);
}

TEST(WeightsToMatrix, RejectsLengthMismatch) {
  EXPECT_THROW(weights_to_matrix(complete_graph(3), {0.1, 0.2}), std::invalid_argument);
}

TEST(WeightsToMatrix, MatchesIncidenceFormAndFollowsGraph) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    Graph g = random_connected(rng, 3, 12);
    WeightVector w = random_weights(rng, g, -1.0, 1.0);
    Matrix m = weights_to_matrix(g, w).matrix();
    Matrix inc = g.incidence();
    Matrix expect = Matrix::Identity(g.node_count(), g.node_count()) - inc * w.values().asDiagonal() * inc.transpose();
    EXPECT_LE((m - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(m, m.transpose());
    EXPECT_LE((m.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    for (NodeId i = 0; i < g.node_count(); ++i)
      for (NodeId j = 0; j < g.node_count(); ++j)
        if (i != j && !g.has_edge(i, j)) EXPECT_EQ(m(i, j), 0.0);
  }
}

TEST(MaxDegree, Examples) {
  for (double x : max_degree_weights(path_graph(3)).values()) EXPECT_DOUBLE_EQ(x, 1.0 / 3);
  for (double x : max_degree_weights(complete_graph(5)).values()) EXPECT_DOUBLE_EQ(x, 1.0 / 5);
  for (double x : max_degree_weights(star_graph(3)).values()) EXPECT_DOUBLE_EQ(x, 1.0 / 4);
}

TEST(LocalDegree, Examples) {
  for (double x : local_degree_weights(star_graph(3)).values()) EXPECT_DOUBLE_EQ(x, 1.0 / 4);
  for (double x : local_degree_weights(path_graph(3)).values()) EXPECT_DOUBLE_EQ(x, 1.0 / 3);
  for (double x : local_degree_weights(complete_graph(4)).values()) EXPECT_DOUBLE_EQ(x, 1.0 / 4);
}

TEST(LocalDegree, UnaffectedByDistantEdges) {
  // path 0-1-2-3-4-5-6; adding (5,6)'s neighbor link far away keeps w(0,1)
  Graph g = path_graph(7);
  std::vector<Edge> e(g.edges().begin(), g.edges().end());
  e.push_back({4, 6});
  Graph h(7, e);
  EXPECT_EQ(local_degree_weights(g)[*g.find_edge(0, 1)], local_degree_weights(h)[*h.find_edge(0, 1)]);
  EXPECT_EQ(local_degree_weights(g)[*g.find_edge(1, 2)], local_degree_weights(h)[*h.find_edge(1, 2)]);
}

TEST(OptimalConstant, Examples) {
  for (std::size_t n : {3u, 5u, 8u})
    for (double x : optimal_constant_weights(complete_graph(n)).values()) EXPECT_NEAR(x, 1.0 / n, 1e-12);
  EXPECT_NEAR(optimal_constant_weights(Graph(2, {{0, 1}}))[0], 0.5, 1e-12);
  EXPECT_NEAR(optimal_constant_weights(path_graph(3))[0], 0.5, 1e-12);
}

TEST(OptimalConstant, RejectsDisconnected) {
  EXPECT_THROW(optimal_constant_weights(Graph(4, {{0, 1}, {2, 3}})), std::invalid_argument);
}

TEST(Heuristics, AllConvergentOnConnectedGraphs) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 60; ++t) {
    Graph g = t % 2 ? random_connected(rng, 2, 20) : [&] {
      for (;;) {
        Graph r = generate_rgg(25, 0.35, rng());
        if (is_connected(r)) return r;
      }
    }();
    for (const auto& w : {max_degree_weights(g), local_degree_weights(g), optimal_constant_weights(g)}) {
      auto v = check_convergent(weights_to_matrix(g, w).matrix());
      EXPECT_TRUE(v.convergent) << (v.reasons.empty() ? "" : v.reasons[0]);
    }
  }
}
