#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tracemin/spectral.hpp"
#include "tracemin/weights.hpp"

using namespace tracemin;
using namespace fixtures;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = z(rng);
  return 0.5 * (a + a.transpose());
}

// Symmetric, rows sum to one, nonnegative off the diagonal by construction.
Matrix random_stochastic_symmetric(std::mt19937_64& rng, const Graph& g) {
  return weights_to_matrix(g, random_weights(rng, g, -0.3, 0.6)).matrix();
}

}  // namespace

TEST(SymmetricEigenvalues, Identity) {
  auto ev = symmetric_eigenvalues(Matrix::Identity(3, 3));
  EXPECT_EQ(ev, (std::vector<double>{1, 1, 1}));
}

TEST(SymmetricEigenvalues, Reflection) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  auto ev = symmetric_eigenvalues(m);
  EXPECT_NEAR(ev[0], 1.0, 1e-12);
  EXPECT_NEAR(ev[1], -1.0, 1e-12);
}

TEST(SymmetricEigenvalues, TriangleLaplacian) {
  auto ev = symmetric_eigenvalues(laplacian(complete_graph(3)));
  EXPECT_NEAR(ev[0], 3.0, 1e-12);
  EXPECT_NEAR(ev[1], 3.0, 1e-12);
  EXPECT_NEAR(ev[2], 0.0, 1e-12);
}

TEST(SymmetricEigenvalues, RejectsAsymmetric) {
  Matrix m(2, 2);
  m << 0, 1, 0, 0;
  EXPECT_THROW(symmetric_eigenvalues(m), std::invalid_argument);
}

TEST(SymmetricEigenvalues, SortedAndAccurateOnCycle) {
  // cycle C_n Laplacian spectrum: 2 - 2 cos(2 pi k / n)
  const int n = 9;
  auto ev = symmetric_eigenvalues(laplacian(cycle_graph(n)));
  std::vector<double> expect;
  for (int k = 0; k < n; ++k) expect.push_back(2.0 - 2.0 * std::cos(2.0 * M_PI * k / n));
  std::sort(expect.begin(), expect.end(), std::greater<>());
  for (int k = 0; k < n; ++k) EXPECT_NEAR(ev[k], expect[k], 1e-9 * 4.0);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(), std::greater<>()));
}

TEST(SpectralReport, Identity) {
  auto r = spectral_report(Matrix::Identity(4, 4));
  EXPECT_DOUBLE_EQ(r.mu, 1.0);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_DOUBLE_EQ(r.tau, 1.0);
}

TEST(SpectralReport, AveragingProjector) {
  auto r = spectral_report(Matrix::Constant(4, 4, 0.25));
  EXPECT_NEAR(r.mu, 0.0, 1e-12);
  EXPECT_NEAR(r.rho, 1.0, 1e-12);
  EXPECT_NEAR(r.gap, 1.0, 1e-12);
}

TEST(SpectralReport, TwoNodeHalfWeight) {
  auto r = spectral_report(weights_to_matrix(Graph(2, {{0, 1}}), {0.5}).matrix());
  EXPECT_NEAR(r.eigenvalues[0], 1.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[1], 0.0, 1e-12);
  EXPECT_NEAR(r.mu, 0.0, 1e-12);
}

TEST(SpectralReport, TauCaseSplit) {
  // rho > 1 when a negative eigenvalue exceeds 1 in modulus
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 1.0, 0.3, -1.5;
  auto r = spectral_report(m);
  EXPECT_DOUBLE_EQ(r.rho, 1.5);
  EXPECT_DOUBLE_EQ(r.tau, 1.5);
  EXPECT_DOUBLE_EQ(r.mu, 1.5);
  m.diagonal() << 1.0, 0.3, -0.5;
  r = spectral_report(m);
  EXPECT_DOUBLE_EQ(r.tau, r.mu);
  EXPECT_LE(r.mu, r.rho);
}

TEST(TracePower, Examples) {
  EXPECT_NEAR(trace_power(Matrix::Identity(3, 3), 4), 3.0, 1e-12);
  EXPECT_NEAR(trace_power(Matrix::Constant(2, 2, 0.5), 2), 1.0, 1e-12);
  EXPECT_THROW(trace_power(Matrix::Identity(2, 2), 3), std::invalid_argument);
  EXPECT_THROW(trace_power(Matrix::Identity(2, 2), 0), std::invalid_argument);
}

TEST(TracePower, EqualsEigenvalueSum) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    Matrix m = random_symmetric(rng, 6);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const double expect = es.eigenvalues().array().pow(6).sum();
    EXPECT_NEAR(trace_power(m, 6), expect, 1e-8 * std::max(1.0, expect));
    EXPECT_NEAR(trace_power_spectral(m, 6), expect, 1e-8 * std::max(1.0, expect));
  }
}

TEST(TracePower, MatchesRepeatedProducts) {
  std::mt19937_64 rng(3);
  Matrix m = random_symmetric(rng, 5);
  Matrix prod = Matrix::Identity(5, 5);
  for (int k = 0; k < 8; ++k) prod = prod * m;
  EXPECT_NEAR(trace_power(m, 8), prod.trace(), 1e-8 * std::abs(prod.trace()));
}

TEST(CheckConvergent, LocalDegreeWeightsPass) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    Graph g = random_connected(rng, 3, 15);
    auto v = check_convergent(weights_to_matrix(g, local_degree_weights(g)).matrix());
    EXPECT_TRUE(v.convergent);
    EXPECT_TRUE(v.reasons.empty());
  }
}

TEST(CheckConvergent, IdentityFails) {
  auto v = check_convergent(Matrix::Identity(4, 4));
  EXPECT_FALSE(v.convergent);
  ASSERT_EQ(v.reasons.size(), 1u);
  EXPECT_NE(v.reasons[0].find("spectral radius"), std::string::npos);
}

TEST(CheckConvergent, DisconnectedBlocksFail) {
  Matrix w = weights_to_matrix(Graph(4, {{0, 1}, {2, 3}}), {0.5, 0.5}).matrix();
  EXPECT_FALSE(check_convergent(w).convergent);
}

TEST(CheckConvergent, ReportsEachViolatedCondition) {
  Matrix w = Matrix::Constant(3, 3, 0.3);
  auto v = check_convergent(w);
  EXPECT_FALSE(v.convergent);
  EXPECT_EQ(v.reasons.size(), 2u);  // column and row sums; radius of W - J is 0.1 < 1
}

TEST(SchattenNorm, Examples) {
  EXPECT_NEAR(schatten_norm(Matrix::Identity(4, 4), 2), 2.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 3, -4;
  EXPECT_NEAR(schatten_norm(d, 1), 7.0, 1e-12);
}

TEST(SchattenNorm, PowerEqualsTraceForEvenP) {
  std::mt19937_64 rng(4);
  for (int p : {2, 4, 6}) {
    Matrix m = random_symmetric(rng, 5);
    EXPECT_NEAR(std::pow(schatten_norm(m, p), p), trace_power(m, p), 1e-8 * trace_power(m, p));
  }
}

TEST(SchattenNorm, NonSymmetricUsesSingularValues) {
  Matrix m(2, 2);
  m << 0, 2, 0, 0;
  EXPECT_NEAR(schatten_norm(m, 1), 2.0, 1e-12);
}

// For W symmetric with rows summing to one and p = 2q:
// tau K1^{1/p} <= (Tr(W^p) - 1)^{1/p} <= tau (2(n-1))^{1/p}.
// K1 counts the eigenvalues other than the Perron one that attain tau in modulus.
TEST(TraceBounds, SandwichAroundTau) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    Graph g = random_connected(rng, 3, 10);
    Matrix w = random_stochastic_symmetric(rng, g);
    auto rep = spectral_report(w);
    const auto n = static_cast<double>(g.node_count());
    // drop one copy of the eigenvalue 1 belonging to the all-ones vector
    std::vector<double> rest = rep.eigenvalues;
    auto one = std::min_element(rest.begin(), rest.end(), [](double a, double b) { return std::abs(a - 1) < std::abs(b - 1); });
    rest.erase(one);
    double k1 = 0;
    for (double l : rest) k1 += std::abs(std::abs(l) - rep.tau) <= 1e-9;
    for (int p : {2, 4, 6, 8}) {
      const double mid = std::pow(std::max(0.0, trace_power(w, p) - 1.0), 1.0 / p);
      const double lo = rep.tau * std::pow(k1, 1.0 / p);
      const double hi = rep.tau * std::pow(2.0 * (n - 1.0), 1.0 / p);
      EXPECT_GE(k1, 1.0);
      EXPECT_LE(lo, mid * (1 + 1e-9) + 1e-12);
      EXPECT_LE(mid, hi * (1 + 1e-9) + 1e-12);
    }
  }
}

// Symmetric W with rows summing to one and rho(W) = 1 has every entry in [-1, 1].
TEST(EntryBound, UnitRadiusMatricesHaveBoundedEntries) {
  std::mt19937_64 rng(5);
  int tested = 0;
  for (int t = 0; t < 2000 && tested < 100; ++t) {
    Graph g = random_connected(rng, 3, 10);
    Matrix w = random_stochastic_symmetric(rng, g);
    auto rep = spectral_report(w);
    // a Laplacian with negative weights can push an eigenvalue above 1; no rescaling fixes that
    if (rep.eigenvalues.front() > 1.0 + 1e-12) continue;
    if (rep.rho > 1.0 + 1e-12) {
      // rescale the deviation from the identity so the extreme eigenvalue is -1
      const double s = 2.0 / (1.0 - rep.eigenvalues.back());
      w = Matrix::Identity(w.rows(), w.cols()) + s * (w - Matrix::Identity(w.rows(), w.cols()));
      rep = spectral_report(w);
    }
    ASSERT_LE(rep.rho, 1.0 + 1e-9);
    EXPECT_LE(w.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    ++tested;
  }
  EXPECT_EQ(tested, 100);
}

TEST(PerronFrobenius, PositiveWeightsConverge) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    Graph g = random_connected(rng, 2, 12);
    // positive link weights that keep every self weight positive
    std::uniform_real_distribution<double> u(0.05, 0.95);
    WeightVector w(g.edge_count());
    for (EdgeId l = 0; l < g.edge_count(); ++l) {
      const auto& e = g.edge(l);
      w[l] = u(rng) / static_cast<double>(std::max(g.degree(e.u), g.degree(e.v)) + 1);
    }
    EXPECT_LT(mu_of(weights_to_matrix(g, w).matrix()), 1.0);
  }
}
