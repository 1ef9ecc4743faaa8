#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybrid/catalog.hpp"
#include "hybrid/execution.hpp"

using namespace hybrid;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// One node, no jumps.
DeterministicControl flow_on(BoxSpace box, std::function<Vector(const Vector&)> f) {
  HybridPhaseSpace::Builder b("line");
  b.add_node("0", std::move(box));
  return closed_control(b.build(), [f](const TaggedPoint& p) { return f(p.coords); },
                        [](const TaggedPoint& p) { return p; });
}

// Bounce times of the drag-free ball from (0, v0): t_k = sum_{j<k} 2 v0 r^j.
std::vector<double> bounce_oracle(double r, double v0, std::size_t n) {
  std::vector<double> out;
  double t = 0.0;
  double v = v0;
  for (std::size_t k = 0; k < n; ++k) {
    t += 2.0 * v;
    v *= r;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(Execution, BouncingBallBounceTimesAndZeno) {
  const auto ball = catalog::bouncing_ball(0.5);
  const auto ex = execute(ball, {NodeId{0}, v2(0.0, 0.5)});
  const auto expect = bounce_oracle(0.5, 0.5, 4);
  ASSERT_GE(ex.jumps.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(ex.jumps[k].t, expect[k], 1e-5);
  EXPECT_EQ(ex.reason, StopReason::zeno);
  ASSERT_TRUE(ex.zeno.has_value());
  EXPECT_NEAR(*ex.zeno, 2.0, 1e-2);
}

TEST(Execution, BouncingBallJumpsUseTheImpactEdge) {
  const auto ball = catalog::bouncing_ball(0.5);
  const auto ex = execute(ball, {NodeId{0}, v2(0.0, 0.5)});
  const auto& hps = *ball.ssub.state;
  for (const auto& j : ex.jumps) {
    EXPECT_EQ(hps.graph().edge(j.edge).name, "e");
    EXPECT_NEAR(j.to.coords[1], -0.5 * j.from.coords[1], 1e-12);
  }
}

TEST(Execution, ThermostatSwitchTimes) {
  const auto th = catalog::thermostat();
  IntegratorOptions opts;
  opts.horizon = 12.0;
  const auto ex = execute(th, {NodeId{1}, v1(0.0)}, opts);
  // Up from 0 to 1 takes 1, then each crossing of [-1, 1] takes 2.
  ASSERT_EQ(ex.jumps.size(), 6u);
  for (std::size_t k = 0; k < ex.jumps.size(); ++k) {
    EXPECT_NEAR(ex.jumps[k].t, 1.0 + 2.0 * static_cast<double>(k), 1e-5);
    EXPECT_EQ(ex.jumps[k].to.node.index, k % 2 == 0 ? 0u : 1u);
  }
  EXPECT_EQ(ex.reason, StopReason::horizon);
}

TEST(Execution, EquilibriumIsOneConstantArc) {
  const auto c = flow_on(BoxSpace::real(2), [](const Vector& x) { return Vector(Vector::Zero(x.size())); });
  const auto ex = execute(c, {NodeId{0}, v2(0.3, -0.2)});
  ASSERT_EQ(ex.arcs.size(), 1u);
  EXPECT_TRUE(ex.jumps.empty());
  for (const auto& s : ex.arcs[0].samples) EXPECT_EQ(s.coords, v2(0.3, -0.2));
  EXPECT_EQ(ex.partition.times.size(), 2u);
}

TEST(Execution, StartOutsideTheSpaceThrows) {
  const auto ball = catalog::bouncing_ball(0.5);
  EXPECT_THROW(execute(ball, {NodeId{0}, v2(-1.0, 0.0)}), Error);
}

TEST(Execution, JumpFirstWhenRhoMovesTheStart) {
  const auto th = catalog::thermostat();
  const auto ex = execute(th, {NodeId{1}, v1(1.5)});
  ASSERT_TRUE(ex.initial_jump.has_value());
  EXPECT_EQ(ex.initial_jump->to.node.index, 0u);
  EXPECT_EQ(ex.arcs.front().node.index, 0u);
}

TEST(Execution, RunsAreBitIdentical) {
  const auto ball = catalog::bouncing_ball(0.7);
  const auto a = execute(ball, {NodeId{0}, v2(1.0, 0.0)});
  const auto b = execute(ball, {NodeId{0}, v2(1.0, 0.0)});
  ASSERT_EQ(a.jumps.size(), b.jumps.size());
  for (std::size_t k = 0; k < a.jumps.size(); ++k) EXPECT_EQ(a.jumps[k].t, b.jumps[k].t);
  ASSERT_EQ(a.arcs.size(), b.arcs.size());
  for (std::size_t k = 0; k < a.arcs.size(); ++k) {
    ASSERT_EQ(a.arcs[k].samples.size(), b.arcs[k].samples.size());
    for (std::size_t i = 0; i < a.arcs[k].samples.size(); ++i) {
      EXPECT_EQ(a.arcs[k].samples[i].coords, b.arcs[k].samples[i].coords);
    }
  }
}

TEST(Execution, NoTwoJumpsAtTheSameInstant) {
  const auto th = catalog::thermostat();
  const auto ex = execute(th, {NodeId{0}, v1(0.2)});
  for (std::size_t k = 1; k < ex.jumps.size(); ++k) EXPECT_GT(ex.jumps[k].t, ex.jumps[k - 1].t);
}

TEST(UniversalSystem, TwoIntervals) {
  const auto u = universal_system({{0.0, 1.0, 2.0}});
  const auto& hps = *u.ssub.state;
  ASSERT_EQ(hps.node_count(), 2u);
  EXPECT_EQ(hps.space(NodeId{0}), BoxSpace({Interval::closed(0.0, 1.0)}));
  EXPECT_EQ(hps.space(NodeId{1}), BoxSpace({Interval::closed(1.0, 2.0)}));
  EXPECT_TRUE(check_control(u).ok());

  const auto ex = execute(u, {NodeId{0}, v1(0.0)});
  ASSERT_EQ(ex.arcs.size(), 2u);
  ASSERT_EQ(ex.jumps.size(), 1u);
  EXPECT_NEAR(ex.jumps[0].t, 1.0, 1e-9);
  EXPECT_NEAR(ex.arcs[0].t_end, 1.0, 1e-9);
  EXPECT_NEAR(ex.arcs[1].t_end, 2.0, 1e-9);
  EXPECT_EQ(ex.reason, StopReason::domain_exit);
}

TEST(UniversalSystem, InfiniteLastTime) {
  const auto u = universal_system({{0.0, 1.0, INFINITY}});
  EXPECT_EQ(u.ssub.state->space(NodeId{1}), BoxSpace({Interval::at_least(1.0)}));
  IntegratorOptions opts;
  opts.horizon = 3.0;
  const auto ex = execute(u, {NodeId{0}, v1(0.0)}, opts);
  EXPECT_EQ(ex.jumps.size(), 1u);
  EXPECT_EQ(ex.reason, StopReason::horizon);
}

TEST(UniversalSystem, RejectsBadPartitions) {
  EXPECT_THROW(universal_system({{0.0, 0.0}}), Error);
  EXPECT_THROW(universal_system({{0.0}}), Error);
  EXPECT_THROW(universal_system({{0.0, INFINITY, 5.0}}), Error);
}

TEST(VerifyExecution, BallPasses) {
  const auto ball = catalog::bouncing_ball(0.5);
  const auto ex = execute(ball, {NodeId{0}, v2(0.0, 0.5)});
  const auto rep = verify_execution(ex, ball, 1e-4);
  EXPECT_TRUE(rep.ok()) << (rep.ok() ? "" : rep.violations.front());
}

TEST(VerifyExecution, WrongPostJumpVelocityFails) {
  const auto ball = catalog::bouncing_ball(0.5);
  auto ex = execute(ball, {NodeId{0}, v2(0.0, 0.5)});
  // +v instead of -r v after the first impact.
  const double v = ex.jumps[0].from.coords[1];
  ex.jumps[0].to.coords[1] = v;
  ex.arcs[1].samples.front().coords[1] = v;
  const auto rep = verify_execution(ex, ball, 1e-4);
  ASSERT_FALSE(rep.ok());
  bool at_jump = false;
  for (const auto& s : rep.violations) at_jump = at_jump || s.rfind("jump 0", 0) == 0;
  EXPECT_TRUE(at_jump);
}

TEST(VerifyExecution, ConstantArcPasses) {
  const auto c = flow_on(BoxSpace::real(1), [](const Vector&) { return Vector(Vector::Zero(1)); });
  Execution ex;
  ex.partition.times = {0.0, 1.0};
  ex.arcs.push_back({NodeId{0}, 0.0, 1.0, {{0.0, v1(2.0)}, {0.5, v1(2.0)}, {1.0, v1(2.0)}}});
  EXPECT_TRUE(verify_execution(ex, c, 1e-9).ok());
}

TEST(Pushforward, IdentityKeepsTheExecution) {
  const auto ball = catalog::bouncing_ball(0.5);
  const auto ex = execute(ball, {NodeId{0}, v2(0.0, 0.5)});
  const auto pushed = pushforward_execution(PhaseSpaceMorphism::identity(ball.ssub.state), ex);
  ASSERT_EQ(pushed.arcs.size(), ex.arcs.size());
  for (std::size_t k = 0; k < ex.arcs.size(); ++k) {
    for (std::size_t i = 0; i < ex.arcs[k].samples.size(); ++i) {
      EXPECT_EQ(pushed.arcs[k].samples[i].coords, ex.arcs[k].samples[i].coords);
    }
  }
}

TEST(Pushforward, MinusLogStraightensDecay) {
  const auto decay = flow_on(BoxSpace({Interval::greater_than(0.0)}), [](const Vector& x) { return Vector(-x); });
  const auto clock = flow_on(BoxSpace::real(1), [](const Vector&) { return Vector(Vector::Ones(1)); });
  SmoothMap f{1, 1, [](const Vector& x) { return v1(-std::log(x[0])); },
              [](const Vector& x) { return Matrix::Constant(1, 1, -1.0 / x[0]); }};
  const PhaseSpaceMorphism m(decay.ssub.state, clock.ssub.state, {{NodeId{0}}, {EdgeId{0}}}, {f});
  IntegratorOptions opts;
  opts.horizon = 5.0;
  const auto ex = execute(decay, {NodeId{0}, v1(1.0)}, opts);
  const auto pushed = pushforward_execution(m, ex);
  for (const auto& s : pushed.arcs[0].samples) EXPECT_NEAR(s.coords[0], s.t, 1e-9);
  EXPECT_TRUE(verify_execution(pushed, clock, 1e-4).ok());
}

TEST(Pushforward, CubicDecayThroughTheLogMap) {
  const auto decay = flow_on(BoxSpace({Interval::greater_than(0.0)}), [](const Vector& x) { return Vector(-x); });
  const auto cubic = flow_on(BoxSpace::real(1), [](const Vector& y) { return v1(-y[0] * y[0] * y[0]); });
  SmoothMap f{1, 1, [](const Vector& x) { return v1(1.0 / std::sqrt(1.0 - 2.0 * std::log(x[0]))); },
              {}};
  const PhaseSpaceMorphism m(decay.ssub.state, cubic.ssub.state, {{NodeId{0}}, {EdgeId{0}}}, {f});
  IntegratorOptions opts;
  opts.horizon = 5.0;
  const auto pushed = pushforward_execution(m, execute(decay, {NodeId{0}, v1(1.0)}, opts));
  for (const auto& s : pushed.arcs[0].samples) {
    EXPECT_NEAR(s.coords[0], 1.0 / std::sqrt(1.0 + 2.0 * s.t), 1e-9);
  }
  const auto rep = verify_execution(pushed, cubic, 1e-4);
  EXPECT_TRUE(rep.ok()) << (rep.ok() ? "" : rep.violations.front());
}

TEST(StateAt, InterpolatesAndPrefersThePostJumpArc) {
  const auto th = catalog::thermostat();
  const auto ex = execute(th, {NodeId{1}, v1(0.0)});
  const auto mid = state_at(ex, 0.5);
  EXPECT_EQ(mid.node.index, 1u);
  EXPECT_NEAR(mid.coords[0], 0.5, 1e-9);
  EXPECT_EQ(state_at(ex, ex.jumps[0].t).node.index, 0u);
}

TEST(IntegratorOptions, RejectsNonPositiveValues) {
  IntegratorOptions o;
  o.step = 0.0;
  EXPECT_THROW(o.validate(), Error);
  o = {};
  o.max_jumps = 0;
  EXPECT_THROW(o.validate(), Error);
}

TEST(Csv, TrajectoryAndJumpColumns) {
  const auto th = catalog::thermostat();
  IntegratorOptions o;
  o.horizon = 2.5;
  o.step = 0.5;
  const auto ex = execute(th, {NodeId{1}, v1(0.0)}, o);
  const auto& hps = *th.ssub.state;
  const std::string traj = trajectory_csv(ex, hps);
  EXPECT_EQ(traj.substr(0, traj.find('\n')), "arc_index,node,t,coord_0");
  EXPECT_NE(traj.find("\n0,1,0.5,0.5\n"), std::string::npos);

  const std::string jumps = jumps_csv(ex, hps);
  std::istringstream in(jumps);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "t,from_node,from_0,to_node,to_0,edge");
  std::vector<std::string> f;
  std::istringstream row(first);
  for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
  ASSERT_EQ(f.size(), 6u);
  EXPECT_NEAR(std::stod(f[0]), 1.0, 1e-9);
  EXPECT_EQ(f[1], "1");
  EXPECT_EQ(f[3], "0");
  EXPECT_EQ(f[2], f[4]);
  EXPECT_EQ(f[5], hps.graph().edge(ex.jumps[0].edge).name);
  EXPECT_EQ(std::count(jumps.begin(), jumps.end(), '\n'), static_cast<long>(ex.jumps.size() + 1));
}

TEST(Csv, QuotesNamesWithCommasAndPadsShortRows) {
  HybridPhaseSpace::Builder b("mixed");
  const NodeId a = b.add_node("(0,1)", BoxSpace::real(2));
  b.add_node("flat", BoxSpace::real(1));
  (void)a;
  const auto hps = b.build();
  Execution e;
  e.arcs.push_back(Arc{NodeId{0}, 0.0, 0.0, {{0.0, v2(0.1, 0.2)}}});
  e.arcs.push_back(Arc{NodeId{1}, 0.0, 1.0, {{1.0, v1(3.0)}}});
  EXPECT_EQ(trajectory_csv(e, *hps),
            "arc_index,node,t,coord_0,coord_1\n"
            "0,\"(0,1)\",0,0.10000000000000001,0.20000000000000001\n"
            "1,flat,1,3,\n");
}
