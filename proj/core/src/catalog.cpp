#include "hybrid/catalog.hpp"

#include <cmath>

namespace hybrid::catalog {

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double heater_sign(std::size_t j) { return j == 1 ? 1.0 : -1.0; }

JumpRelation threshold(double sign) {
  Membership m = [sign](const Vector& a, const Vector& b, double tol) {
    return std::abs(a[0] - b[0]) <= tol && sign * a[0] >= 1.0 - tol;
  };
  PairSampler s = [sign](std::size_t count, std::uint64_t seed) {
    HaltonSequence h(1, seed);
    std::vector<PointPair> out;
    for (std::size_t i = 0; i < count; ++i) {
      const Vector x = vec({sign * (1.0 + 4.0 * h.next()[0])});
      out.emplace_back(x, x);
    }
    return out;
  };
  return JumpRelation::predicate(std::move(m), std::move(s));
}

/// v v' < 0 on coordinate `vi`; with `pin_height` coordinate 0 must be 0 on both sides.
JumpRelation impact(std::size_t dim, std::size_t vi, bool pin_height) {
  Membership m = [vi, pin_height](const Vector& a, const Vector& b, double tol) {
    if (pin_height && (std::abs(a[0]) > tol || std::abs(b[0]) > tol)) return false;
    const double prod = a[vi] * b[vi];
    return tol == 0.0 ? prod < 0.0 : prod <= tol;
  };
  PairSampler s = [dim, vi](std::size_t count, std::uint64_t seed) {
    HaltonSequence h(2, seed);
    std::vector<PointPair> out;
    for (std::size_t i = 0; i < count; ++i) {
      const auto u = h.next();
      double v = -4.0 + 8.0 * u[0];
      if (std::abs(v) < 1e-3) v = 1.0;
      Vector a = Vector::Zero(static_cast<Eigen::Index>(dim));
      Vector b = a;
      a[vi] = v;
      b[vi] = -v * (0.1 + 1.9 * u[1]);
      out.emplace_back(a, b);
    }
    return out;
  };
  return JumpRelation::predicate(std::move(m), std::move(s));
}

/// Points 0..k-1 with one edge between every ordered pair of distinct nodes.
PhaseSpacePtr mode_space(const std::string& name, const std::vector<std::string>& modes) {
  HybridPhaseSpace::Builder b(name);
  for (const auto& m : modes) b.add_node(m, BoxSpace::point());
  const Vector empty(0);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      if (i == j) continue;
      b.add_edge("e_" + modes[j] + "_" + modes[i], NodeId{i}, NodeId{j},
                 JumpRelation::finite({{empty, empty}}));
    }
  }
  return b.build();
}

PhaseSpacePtr single(const std::string& name, BoxSpace box) {
  HybridPhaseSpace::Builder b(name);
  b.add_node("s_" + name, std::move(box));
  return b.build();
}

InterconnectedExample assemble(PhaseSpacePtr a, PhaseSpacePtr b,
                               std::vector<DeterministicControl> parts) {
  ProductChain ab({a, b});
  std::vector<HybridSSub> ssubs;
  for (const auto& p : parts) ssubs.push_back(p.ssub);
  const SSubProduct prod = product_ssub(ssubs);
  const auto id = PhaseSpaceMorphism::identity(ab.space());
  const auto p0 = PhaseSpaceMorphism::projection(ab, 0);
  const auto p1 = PhaseSpaceMorphism::projection(ab, 1);
  SSubMorphism m{HybridSSub::identity(ab.space()), prod.ssub,
                 PhaseSpaceMorphism::pairing(ab.space(), prod.total, {id, id}),
                 PhaseSpaceMorphism::pairing(ab.space(), prod.state, {p0, p1}),
                 PhaseSpaceMorphism::pairing(prod.state.space(), ab,
                                             {PhaseSpaceMorphism::projection(prod.state, 0),
                                              PhaseSpaceMorphism::projection(prod.state, 1)})};
  Interconnection iota = Interconnection::verify(std::move(m));
  DeterministicControl closed = interconnect_control(iota, product_control(parts));
  return {std::move(a), std::move(b), std::move(ab), std::move(parts), std::move(iota),
          std::move(closed)};
}

HybridSSub left_of(const ProductChain& ab) { return HybridSSub(PhaseSpaceMorphism::projection(ab, 0)); }
HybridSSub right_of(const ProductChain& ab) { return HybridSSub(PhaseSpaceMorphism::projection(ab, 1)); }

std::vector<std::vector<EventFunction>> ball_events() {
  return {{[](const Vector& x) { return x[0]; }}};
}

JumpMap ball_jump(double r) {
  return [r](const TaggedPoint& p) {
    if (p.coords[0] == 0.0 && p.coords[1] < 0.0) return TaggedPoint{p.node, vec({0.0, -r * p.coords[1]})};
    return p;
  };
}

/// Mode index wanted by the state-dependent switch signal.
std::size_t state_signal(const Vector& x) { return x[0] * x[1] >= 0.0 ? 0 : 1; }

std::size_t time_signal(double t) {
  return static_cast<long long>(std::floor(t)) % 2 == 0 ? 0 : 1;
}

InterconnectedExample switched(bool clock) {
  const auto modes = switched_modes();
  const std::size_t n = 2;
  auto a = single("a", BoxSpace::real(clock ? n + 1 : n));
  auto b = mode_space("b", {"1", "2"});
  ProductChain ab({a, b});
  const std::size_t dim = clock ? n + 1 : n;

  VectorField x = [modes, clock, dim](const TaggedPoint& p) {
    const std::size_t j = p.node.index;
    Vector out(static_cast<Eigen::Index>(dim));
    out.head(2) = modes[j] * p.coords.head(2);
    if (clock) out[2] = 1.0;
    return out;
  };
  JumpMap rho = [](const TaggedPoint& p) { return TaggedPoint{NodeId{0}, p.coords}; };
  auto want = [clock](const Vector& c) { return clock ? time_signal(c[2]) : state_signal(c); };
  JumpMap sigma = [want](const TaggedPoint& p) { return TaggedPoint{NodeId{want(p.coords)}, Vector(0)}; };
  VectorField zero = [](const TaggedPoint&) { return Vector(0); };

  std::vector<std::vector<EventFunction>> events(2);
  for (std::size_t j = 0; j < 2; ++j) {
    if (clock) {
      events[j].push_back([j](const Vector& c) { return time_signal(c[2]) == j ? 1.0 : -1.0; });
    } else {
      const double s = j == 0 ? 1.0 : -1.0;
      events[j].push_back([s](const Vector& c) { return s * c[0] * c[1]; });
    }
  }
  std::vector<DeterministicControl> parts{{left_of(ab), x, rho, {}},
                                          {right_of(ab), zero, sigma, events}};
  return assemble(a, b, std::move(parts));
}

PhaseSpaceMorphism swap_nodes(const PhaseSpacePtr& c) {
  const SmoothMap neg = SmoothMap::affine(-Matrix::Identity(1, 1), Vector::Zero(1));
  // Edges: id_0, id_1, e_1_0, e_0_1.
  NodeMap nm{{NodeId{1}, NodeId{0}}, {EdgeId{1}, EdgeId{0}, EdgeId{3}, EdgeId{2}}};
  return PhaseSpaceMorphism(c, c, std::move(nm), {neg, neg});
}

}  // namespace

PhaseSpacePtr thermostat_space() {
  HybridPhaseSpace::Builder b("thermostat");
  const NodeId off = b.add_node("0", BoxSpace::real(1));
  const NodeId on = b.add_node("1", BoxSpace::real(1));
  b.add_edge("e_1_0", off, on, JumpRelation::diagonal(BoxSpace::real(1)));
  b.add_edge("e_0_1", on, off, JumpRelation::diagonal(BoxSpace::real(1)));
  return b.build();
}

PhaseSpacePtr thermostat_threshold_space() {
  HybridPhaseSpace::Builder b("thermostat_threshold");
  const NodeId off = b.add_node("0", BoxSpace::real(1));
  const NodeId on = b.add_node("1", BoxSpace::real(1));
  b.add_edge("e_1_0", off, on, threshold(1.0));
  b.add_edge("e_0_1", on, off, threshold(-1.0));
  return b.build();
}

DeterministicControl thermostat() {
  VectorField z = [](const TaggedPoint& p) { return vec({heater_sign(p.node.index)}); };
  JumpMap nu = [](const TaggedPoint& p) {
    const std::size_t j = p.node.index;
    if (heater_sign(j) * p.coords[0] >= 1.0) return TaggedPoint{NodeId{1 - j}, p.coords};
    return p;
  };
  std::vector<std::vector<EventFunction>> events{{[](const Vector& x) { return x[0] + 1.0; }},
                                                 {[](const Vector& x) { return 1.0 - x[0]; }}};
  return closed_control(thermostat_space(), z, nu, events);
}

PhaseSpacePtr bouncing_ball_space() {
  HybridPhaseSpace::Builder b("ball");
  const BoxSpace box({Interval::at_least(0.0), Interval::real_line()});
  const NodeId n = b.add_node("0", box);
  b.add_edge("e", n, n, impact(2, 1, true));
  return b.build();
}

DeterministicControl bouncing_ball(double r) { return bouncing_ball_drag(r, 0.0); }

DeterministicControl bouncing_ball_drag(double r, double k) {
  if (!(r > 0.0 && r < 1.0)) throw Error("restitution must lie in (0, 1)");
  VectorField z = [k](const TaggedPoint& p) {
    return vec({p.coords[1], -1.0 - k * p.coords[1]});
  };
  return closed_control(bouncing_ball_space(), z, ball_jump(r), ball_events());
}

InterconnectedExample thermostat_interconnect() {
  auto a = single("a", BoxSpace::real(1));
  auto b = mode_space("b", {"0", "1"});
  ProductChain ab({a, b});
  VectorField x = [](const TaggedPoint& p) { return vec({heater_sign(p.node.index)}); };
  JumpMap rho = [](const TaggedPoint& p) { return TaggedPoint{NodeId{0}, p.coords}; };
  VectorField y = [](const TaggedPoint&) { return Vector(0); };
  JumpMap sigma = [](const TaggedPoint& p) {
    const std::size_t j = p.node.index;
    return TaggedPoint{NodeId{heater_sign(j) * p.coords[0] >= 1.0 ? 1 - j : j}, Vector(0)};
  };
  std::vector<std::vector<EventFunction>> events{{[](const Vector& c) { return c[0] + 1.0; }},
                                                 {[](const Vector& c) { return 1.0 - c[0]; }}};
  std::vector<DeterministicControl> parts{{left_of(ab), x, rho, {}},
                                          {right_of(ab), y, sigma, events}};
  return assemble(a, b, std::move(parts));
}

InterconnectedExample bouncing_ball_interconnect(double r) {
  if (!(r > 0.0 && r < 1.0)) throw Error("restitution must lie in (0, 1)");
  auto a = single("a", BoxSpace({Interval::at_least(0.0)}));
  HybridPhaseSpace::Builder bb("b");
  const NodeId sb = bb.add_node("s_b", BoxSpace::real(1));
  bb.add_edge("e", sb, sb, impact(1, 0, false));
  auto b = bb.build();
  ProductChain ab({a, b});

  VectorField x = [](const TaggedPoint& p) { return vec({p.coords[1]}); };
  JumpMap rho = [](const TaggedPoint& p) { return TaggedPoint{NodeId{0}, vec({p.coords[0]})}; };
  VectorField y = [](const TaggedPoint&) { return vec({-1.0}); };
  JumpMap sigma = [r](const TaggedPoint& p) {
    const double v = p.coords[1];
    return TaggedPoint{NodeId{0}, vec({p.coords[0] == 0.0 && v < 0.0 ? -r * v : v})};
  };
  std::vector<DeterministicControl> parts{{left_of(ab), x, rho, {}},
                                          {right_of(ab), y, sigma, ball_events()}};
  return assemble(a, b, std::move(parts));
}

std::vector<Matrix> switched_modes() {
  Matrix a1(2, 2);
  a1 << -0.1, 1.0, -2.0, -0.1;
  Matrix a2(2, 2);
  a2 << -0.1, 2.0, -1.0, -0.1;
  return {a1, a2};
}

InterconnectedExample switched_state() { return switched(false); }
InterconnectedExample switched_time() { return switched(true); }

NetworkedThermostats networked_thermostats(double gain) {
  auto c = thermostat_space();
  const ProductChain cc({c, c});
  const auto id_c = PhaseSpaceMorphism::identity(c);
  const auto flip = swap_nodes(c);
  const auto p0 = PhaseSpaceMorphism::projection(cc, 0);
  const auto p1 = PhaseSpaceMorphism::projection(cc, 1);
  const HybridSSub entry(p0);

  // Target network: labels {*}, bound c, iota_Y(x, j) = (x, j, x, j).
  SystemList ly;
  ly.add("*", entry);
  const SSubProduct py = pi_product(ly);
  SSubMorphism iota_y{HybridSSub::identity(c), py.ssub,
                      PhaseSpaceMorphism::pairing(c, py.total, {PhaseSpaceMorphism::pairing(c, cc, {id_c, id_c})}),
                      PhaseSpaceMorphism::pairing(c, py.state, {id_c}),
                      PhaseSpaceMorphism::pairing(py.state.space(), ProductChain({c}),
                                                  {PhaseSpaceMorphism::projection(py.state, 0)})};
  Network ny = make_network(ly, std::move(iota_y));

  // Source network: labels {1, 2}, bound c x c,
  // iota_X(x, j, x', j') = (x, j, x', j', x', j', x, j).
  SystemList lx;
  lx.add("1", entry);
  lx.add("2", entry);
  const SSubProduct px = pi_product(lx);
  const auto id_cc = PhaseSpaceMorphism::identity(cc.space());
  const auto swap = PhaseSpaceMorphism::pairing(cc.space(), cc, {p1, p0});
  SSubMorphism iota_x{HybridSSub::identity(cc.space()), px.ssub,
                      PhaseSpaceMorphism::pairing(cc.space(), px.total, {id_cc, swap}),
                      PhaseSpaceMorphism::pairing(cc.space(), px.state, {p0, p1}),
                      PhaseSpaceMorphism::pairing(px.state.space(), cc,
                                                  {PhaseSpaceMorphism::projection(px.state, 0),
                                                   PhaseSpaceMorphism::projection(px.state, 1)})};
  Network nx = make_network(lx, std::move(iota_x));

  // Phi_1 = (id x flip, id), Phi_2 = (flip x id, flip).
  ListMorphism lm{lx, ly, {0, 0}, {}};
  lm.components.push_back({entry, entry, PhaseSpaceMorphism::product(cc, cc, {id_c, flip}), id_c,
                           std::nullopt});
  lm.components.push_back({entry, entry, PhaseSpaceMorphism::product(cc, cc, {flip, id_c}), flip,
                           std::nullopt});

  const auto z = PhaseSpaceMorphism::pairing(c, cc, {id_c, flip});
  SSubMorphism zm{HybridSSub::identity(c), HybridSSub::identity(cc.space()), z, z, std::nullopt};
  NetworkMorphism nm{std::move(nx), std::move(ny), std::move(lm), std::move(zm)};

  auto f = [gain](double x, double xp) { return gain * (xp - x); };
  // Total points of c x c: node index 2 j + j', coordinates (x, x').
  auto room = [](std::function<double(std::size_t, double, double)> rate) {
    VectorField vf = [rate](const TaggedPoint& p) {
      return vec({rate(p.node.index / 2, p.coords[0], p.coords[1])});
    };
    JumpMap jump = [](const TaggedPoint& p) {
      const std::size_t j = p.node.index / 2;
      const double x = p.coords[0];
      return TaggedPoint{NodeId{heater_sign(j) * x >= 1.0 ? 1 - j : j}, vec({x})};
    };
    std::vector<std::vector<EventFunction>> events(4);
    for (std::size_t n = 0; n < 4; ++n) {
      const double s = heater_sign(n / 2);
      events[n].push_back([s](const Vector& v) { return 1.0 - s * v[0]; });
    }
    return std::make_tuple(vf, jump, events);
  };
  auto control = [&](std::function<double(std::size_t, double, double)> rate) {
    auto [vf, jump, events] = room(std::move(rate));
    return DeterministicControl{entry, vf, jump, events};
  };

  std::vector<DeterministicControl> w{
      control([f](std::size_t j, double x, double xp) { return heater_sign(j) + f(x, xp); })};
  std::vector<DeterministicControl> v{
      control([f](std::size_t j, double x, double xp) { return heater_sign(j) + f(x, -xp); }),
      control([f](std::size_t j, double x, double xp) { return heater_sign(j) - f(-x, xp); })};
  return {c, flip, std::move(nm), std::move(w), std::move(v)};
}

FlowSystem decay() {
  return {"decay", BoxSpace({Interval::greater_than(0.0)}), [](const Vector& x) { return Vector(-x); }};
}

FlowSystem cubic_decay() {
  return {"cubic_decay", BoxSpace::real(1), [](const Vector& y) { return vec({-y[0] * y[0] * y[0]}); }};
}

FlowSystem drift() {
  return {"drift", BoxSpace::real(1), [](const Vector&) { return vec({1.0}); }};
}

SmoothMap cubic_straightening() {
  SmoothMap m;
  m.in_dim = m.out_dim = 1;
  m.evaluate = [](const Vector& x) { return vec({1.0 / std::sqrt(1.0 - 2.0 * std::log(x[0]))}); };
  m.jacobian = [](const Vector& x) {
    const double f = 1.0 / std::sqrt(1.0 - 2.0 * std::log(x[0]));
    return Matrix::Constant(1, 1, f * f * f / x[0]);
  };
  return m;
}

SmoothMap minus_log() {
  SmoothMap m;
  m.in_dim = m.out_dim = 1;
  m.evaluate = [](const Vector& x) { return vec({-std::log(x[0])}); };
  m.jacobian = [](const Vector& x) { return Matrix::Constant(1, 1, -1.0 / x[0]); };
  return m;
}

}  // namespace hybrid::catalog
