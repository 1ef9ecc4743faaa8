#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hybrid/catalog.hpp"
#include "hybrid/stability.hpp"

using namespace hybrid;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

FlowSystem linear(const Matrix& a) {
  return {"linear", BoxSpace::real(static_cast<std::size_t>(a.rows())),
          [a](const Vector& x) { return Vector(a * x); }};
}

FlowSystem growth() { return linear(Matrix::Identity(1, 1)); }

FlowOptions flow(double horizon, double step = 1e-2) {
  FlowOptions o;
  o.horizon = horizon;
  o.step = step;
  return o;
}

std::vector<Vector> grid(double lo, double hi, std::size_t n) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(v1(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1)));
  return out;
}

/// sup_t ||exp(A t)|| on [0, T] from a truncated Taylor series on a fine grid.
double transient_bound(const Matrix& a, double horizon) {
  const double dt = 1e-3;
  Matrix step = Matrix::Identity(a.rows(), a.cols());
  Matrix term = step;
  for (int k = 1; k < 20; ++k) {
    term = term * a * (dt / k);
    step += term;
  }
  Matrix e = Matrix::Identity(a.rows(), a.cols());
  double sup = 1.0;
  for (double t = 0.0; t < horizon; t += dt) {
    e = step * e;
    sup = std::max(sup, e.operatorNorm());
  }
  return sup;
}

}  // namespace

TEST(Solve, DecayMatchesTheExponential) {
  const auto tr = solve(catalog::decay(), v1(1.0), flow(10.0));
  ASSERT_EQ(tr.samples.size(), 1001u);
  EXPECT_DOUBLE_EQ(tr.samples.back().t, 10.0);
  for (const auto& s : tr.samples) EXPECT_NEAR(s.coords[0], std::exp(-s.t), 1e-9);
}

TEST(Solve, LastStepLandsOnTheHorizon) {
  const auto tr = solve(catalog::drift(), v1(0.0), flow(1.0, 0.3));
  ASSERT_EQ(tr.samples.size(), 5u);
  EXPECT_DOUBLE_EQ(tr.samples.back().t, 1.0);
  EXPECT_DOUBLE_EQ(tr.samples.back().coords[0], 1.0);
}

TEST(Solve, EscapeAndBadStart) {
  const FlowSystem blowup{"blowup", BoxSpace::real(1), [](const Vector& x) { return Vector(x.cwiseProduct(x)); }};
  try {
    solve(blowup, v1(1.0), flow(5.0));
    FAIL() << "expected escape";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("escape"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("(1)"), std::string::npos);
  }
  EXPECT_THROW(solve(catalog::decay(), v1(-1.0)), Error);
  EXPECT_THROW(solve(catalog::decay(), Vector::Zero(2)), Error);
}

TEST(SupMetric, IdenticalIsZero) {
  const auto tr = solve(catalog::decay(), v1(0.5), flow(3.0));
  EXPECT_EQ(sup_metric(tr, tr), 0.0);
}

TEST(SupMetric, DecayFromOneAndTwo) {
  const auto a = solve(catalog::decay(), v1(1.0), flow(10.0));
  const auto b = solve(catalog::decay(), v1(2.0), flow(10.0));
  EXPECT_NEAR(sup_metric(a, b), 1.0, 1e-6);
}

TEST(SupMetric, GrowthFromZero) {
  const auto a = solve(growth(), v1(0.0), flow(5.0));
  const auto b = solve(growth(), v1(0.1), flow(5.0));
  EXPECT_NEAR(sup_metric(a, b), 0.1 * std::exp(5.0), 0.01 * 0.1 * std::exp(5.0));
}

TEST(SupMetric, DifferentGridsAreResampled) {
  const auto a = solve(catalog::drift(), v1(0.0), flow(2.0, 0.1));
  const auto b = solve(catalog::drift(), v1(0.5), flow(1.5, 0.07));
  EXPECT_NEAR(sup_metric(a, b), 0.5, 1e-12);
  EXPECT_THROW(sup_metric(a, Trajectory{}), Error);
}

TEST(SupMetric, MetricAxiomsOnRandomTriples) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  const auto sys = catalog::cubic_decay();
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = solve(sys, v1(u(g)), flow(4.0, 0.05));
    const auto b = solve(sys, v1(u(g)), flow(4.0, 0.05));
    const auto c = solve(sys, v1(u(g)), flow(4.0, 0.05));
    EXPECT_EQ(sup_metric(a, b), sup_metric(b, a));
    EXPECT_LE(sup_metric(a, c), sup_metric(a, b) + sup_metric(b, c) + 1e-15);
    EXPECT_GT(sup_metric(a, b), 0.0);
  }
}

TEST(SupMetric, PushforwardIsLipschitzOnAWindow) {
  // On [0.5, 1] the map -log has Lipschitz constant 2.
  const auto f = catalog::minus_log();
  const auto a = solve(catalog::decay(), v1(1.0), flow(0.6, 0.01));
  const auto b = solve(catalog::decay(), v1(0.9), flow(0.6, 0.01));
  auto push = [&](Trajectory t) {
    for (auto& s : t.samples) s.coords = f(s.coords);
    return t;
  };
  EXPECT_LE(sup_metric(push(a), push(b)), 2.0 * sup_metric(a, b));
}

TEST(SystemMap, CubicStraightening) {
  const auto r = check_system_map(catalog::cubic_straightening(), catalog::decay(), catalog::cubic_decay(),
                                  grid(0.2, 1.6, 141), 1e-7);
  EXPECT_TRUE(r.pass());
  EXPECT_LE(r.max_residual, 1e-7);
  EXPECT_EQ(r.points, 141u);
}

TEST(SystemMap, MinusLog) {
  const auto r = check_system_map(catalog::minus_log(), catalog::decay(), catalog::drift(),
                                  grid(0.05, 5.0, 100), 1e-9);
  EXPECT_TRUE(r.pass());
}

TEST(SystemMap, IdentityAndAMismatch) {
  const auto d = catalog::cubic_decay();
  EXPECT_EQ(check_system_map(SmoothMap::identity(1), d, d, grid(-2, 2, 9), 0.0).max_residual, 0.0);
  const auto bad = check_system_map(catalog::minus_log(), catalog::decay(), catalog::cubic_decay(),
                                    grid(0.5, 2.0, 9), 1e-9);
  EXPECT_FALSE(bad.pass());
}

TEST(Stability, DecayDeltaEqualsEpsilon) {
  StabilityOptions o;
  o.flow = flow(50.0);
  const auto v = empirical_stability(catalog::decay(), v1(1.0), {0.05, 0.1, 0.2}, o);
  EXPECT_TRUE(v.stable);
  EXPECT_TRUE(v.horizon_robust);
  for (const auto& r : v.rows) {
    ASSERT_TRUE(r.delta.has_value());
    EXPECT_EQ(*r.delta, r.epsilon);
    EXPECT_NEAR(r.worst_distance, r.epsilon, 1e-14);
  }
  EXPECT_NE(v.notes.front().find("horizon"), std::string::npos);
}

TEST(Stability, DriftIsStableThoughUnbounded) {
  StabilityOptions o;
  o.flow = flow(50.0);
  const auto v = empirical_stability(catalog::drift(), v1(3.0), {0.05, 0.1, 0.2}, o);
  EXPECT_TRUE(v.stable);
  EXPECT_TRUE(v.horizon_robust);
  for (const auto& r : v.rows) EXPECT_EQ(r.delta, r.epsilon);
}

TEST(Stability, GrowthNeedsTinyDeltaAndIsFlagged) {
  StabilityOptions o;
  o.flow = flow(10.0, 1e-3);
  const auto v = empirical_stability(growth(), v1(0.0), {0.1}, o);
  ASSERT_TRUE(v.rows[0].delta.has_value());
  const double bound = 0.1 * std::exp(-10.0);
  EXPECT_LE(*v.rows[0].delta, bound * (1.0 + 1e-6));
  EXPECT_GE(*v.rows[0].delta, bound * 0.99);
  EXPECT_TRUE(v.rows[0].growing_at_horizon);
  EXPECT_FALSE(v.horizon_robust);
  bool flagged = false;
  for (const auto& n : v.notes) flagged = flagged || n.find("not horizon-robust") != std::string::npos;
  EXPECT_TRUE(flagged);
}

TEST(Stability, HurwitzTransientBound) {
  Matrix a(2, 2);
  a << -1.0, 4.0, 0.0, -2.0;
  StabilityOptions o;
  o.flow = flow(20.0);
  const double kappa = transient_bound(a, 20.0);
  ASSERT_GT(kappa, 1.0);
  Vector x0(2);
  x0 << 0.3, -0.2;
  const auto v = empirical_stability(linear(a), x0, {0.1, 0.2}, o);
  EXPECT_TRUE(v.stable);
  for (const auto& r : v.rows) {
    ASSERT_TRUE(r.delta.has_value());
    EXPECT_GE(*r.delta, r.epsilon / kappa * (1.0 - 1e-6));
    EXPECT_LE(r.worst_distance, r.epsilon);
  }
}

TEST(Stability, EscapeIsRejected) {
  const FlowSystem blowup{"blowup", BoxSpace::real(1), [](const Vector& x) { return Vector(x.cwiseProduct(x)); }};
  StabilityOptions o;
  o.flow = flow(0.95);
  // The reference from 1 survives to t = 0.95; the ring at 1.2 blows up first.
  EXPECT_THROW(empirical_stability(blowup, v1(1.0), {0.2}, o), Error);
}

TEST(Stability, BadGrids) {
  EXPECT_THROW(empirical_stability(catalog::drift(), v1(0.0), {}), Error);
  EXPECT_THROW(empirical_stability(catalog::drift(), v1(0.0), {0.1, -1.0}), Error);
}

TEST(Stability, BoundaryPerturbationsAreSkipped) {
  StabilityOptions o;
  o.flow = flow(5.0);
  const auto v = empirical_stability(catalog::decay(), v1(0.1), {0.2}, o);
  EXPECT_TRUE(v.stable);
  EXPECT_EQ(v.notes.size(), 2u);
}

TEST(Transport, CubicStraighteningCarriesStability) {
  TransportOptions o;
  o.stability.flow = flow(50.0);
  o.map_grid = grid(0.2, 1.6, 141);
  const auto rep = stability_transport_demo(catalog::cubic_straightening(), catalog::decay(),
                                            catalog::cubic_decay(), v1(1.0), o);
  EXPECT_DOUBLE_EQ(rep.fx0[0], 1.0);
  EXPECT_TRUE(rep.source.stable);
  EXPECT_TRUE(rep.target.stable);
  EXPECT_GT(rep.min_singular_value, 0.5);
}

TEST(Transport, MinusLogCarriesStabilityToDrift) {
  TransportOptions o;
  o.stability.flow = flow(50.0);
  o.map_grid = grid(0.05, 5.0, 100);
  o.map_tol = 1e-9;
  const auto rep = stability_transport_demo(catalog::minus_log(), catalog::decay(), catalog::drift(), v1(1.0), o);
  EXPECT_EQ(rep.fx0[0], 0.0);
  EXPECT_TRUE(rep.source.stable);
  EXPECT_TRUE(rep.target.stable);
}

TEST(Transport, IdentityGivesIdenticalVerdicts) {
  TransportOptions o;
  o.stability.flow = flow(10.0);
  o.map_grid = grid(-1.0, 1.0, 11);
  const auto d = catalog::cubic_decay();
  const auto rep = stability_transport_demo(SmoothMap::identity(1), d, d, v1(0.5), o);
  EXPECT_EQ(delta_epsilon_csv(rep.source), delta_epsilon_csv(rep.target));
}

TEST(Transport, FailedChecksThrow) {
  TransportOptions o;
  o.map_grid = grid(0.5, 2.0, 5);
  EXPECT_THROW(stability_transport_demo(catalog::minus_log(), catalog::decay(), catalog::cubic_decay(), v1(1.0), o),
               Error);
  const auto d = catalog::drift();
  const FlowSystem still{"still", BoxSpace::real(1), [](const Vector&) { return v1(0.0); }};
  o.map_grid = grid(-1.0, 1.0, 5);
  EXPECT_THROW(stability_transport_demo(SmoothMap::constant(1, v1(0.0)), d, still, v1(0.0), o), Error);
}

TEST(Csv, DeltaEpsilonTable) {
  StabilityVerdict v;
  v.rows.push_back({0.1, 0.1, 0.1, false});
  v.rows.push_back({0.2, std::nullopt, 0.5, true});
  EXPECT_EQ(delta_epsilon_csv(v),
            "epsilon,delta,worst_distance,growing_at_horizon\n"
            "0.10000000000000001,0.10000000000000001,0.10000000000000001,0\n"
            "0.20000000000000001,,0.5,1\n");
}
