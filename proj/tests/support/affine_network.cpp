#include "affine_network.hpp"

#include <random>

namespace hybrid::testing {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : g_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(g_() >> 11) * 0x1.0p-53;
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(g_() % n); }
  Matrix matrix(Eigen::Index r, Eigen::Index c, double scale) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform(-scale, scale);
    }
    return m;
  }
  Vector vector(Eigen::Index n, double scale) { return matrix(n, 1, scale).col(0); }
  /// Upper triangular with diagonal entries of modulus in [0.5, 1.5].
  Matrix invertible(Eigen::Index n) {
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) = (below(2) ? 1.0 : -1.0) * uniform(0.5, 1.5);
      for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = uniform(-0.5, 0.5);
    }
    return m;
  }

 private:
  std::mt19937_64 g_;
};

struct Entry {
  Eigen::Index m = 0;
  Eigen::Index k = 0;
  ProductChain total;
  HybridSSub ssub;
};

Entry make_entry(Eigen::Index m, Eigen::Index k) {
  HybridPhaseSpace::Builder sb("S" + std::to_string(m));
  const auto box = BoxSpace::real(static_cast<std::size_t>(m));
  const NodeId a = sb.add_node("0", box);
  const NodeId b = sb.add_node("1", box);
  sb.add_edge("e_1_0", a, b, JumpRelation::diagonal(box));
  sb.add_edge("e_0_1", b, a, JumpRelation::diagonal(box));
  HybridPhaseSpace::Builder ub("U" + std::to_string(k));
  ub.add_node("u", BoxSpace::real(static_cast<std::size_t>(k)));
  ProductChain total({sb.build(), ub.build()});
  HybridSSub ssub(PhaseSpaceMorphism::projection(total, 0));
  return {m, k, std::move(total), std::move(ssub)};
}

PhaseSpacePtr input_space(Eigen::Index k) {
  HybridPhaseSpace::Builder b("V" + std::to_string(k));
  b.add_node("v", BoxSpace::real(static_cast<std::size_t>(k)));
  return b.build();
}

/// Same smooth map on every node.
PhaseSpaceMorphism uniform_morphism(const PhaseSpacePtr& dom, const PhaseSpacePtr& cod,
                                    const std::function<NodeId(NodeId)>& nodes,
                                    const std::function<EdgeId(EdgeId)>& edges, const SmoothMap& m) {
  NodeMap nm;
  for (std::size_t n = 0; n < dom->node_count(); ++n) nm.nodes.push_back(nodes(NodeId{n}));
  for (std::size_t e = 0; e < dom->edge_count(); ++e) nm.edges.push_back(edges(EdgeId{e}));
  return PhaseSpaceMorphism(dom, cod, std::move(nm), std::vector<SmoothMap>(dom->node_count(), m));
}

struct Component {
  bool swap = false;
  Matrix a, c, d;
  Vector b, e;

  std::size_t mode(std::size_t j) const { return swap ? 1 - j : j; }
  std::size_t edge(std::size_t g) const {
    static const std::size_t table[] = {1, 0, 3, 2};
    return swap ? table[g] : g;
  }
  Vector tot(const Vector& p, Eigen::Index m) const {
    const Vector s = p.head(m);
    return concat(a * s + b, c * s + d * p.tail(p.size() - m) + e);
  }
  Vector tot_inverse(const Vector& q, Eigen::Index m) const {
    const Vector s = a.triangularView<Eigen::Upper>().solve(Vector(q.head(m) - b));
    const Vector u =
        d.triangularView<Eigen::Upper>().solve(Vector(q.tail(q.size() - m) - e - c * s));
    return concat(s, u);
  }
};

struct WParams {
  Matrix rate[2];
  Vector offset[2];
  Vector guard[2];
};

DeterministicControl make_w(const Entry& y, const WParams& w) {
  const Eigen::Index m = y.m;
  VectorField vf = [w](const TaggedPoint& p) {
    return Vector(w.rate[p.node.index] * p.coords + w.offset[p.node.index]);
  };
  JumpMap jump = [w, m](const TaggedPoint& p) {
    const std::size_t j = p.node.index;
    const bool go = w.guard[j].dot(p.coords) >= 1.0;
    return TaggedPoint{NodeId{go ? 1 - j : j}, p.coords.head(m)};
  };
  std::vector<std::vector<EventFunction>> events(2);
  for (std::size_t j = 0; j < 2; ++j) {
    const Vector g = w.guard[j];
    events[j].push_back([g](const Vector& x) { return 1.0 - g.dot(x); });
  }
  return {y.ssub, vf, jump, events};
}

DeterministicControl push_w(const Entry& x, const Component& comp, const DeterministicControl& w,
                            Defect defect) {
  const Eigen::Index m = x.m;
  VectorField vf = [comp, w, m, defect](const TaggedPoint& q) {
    const TaggedPoint p{NodeId{comp.mode(q.node.index)}, comp.tot_inverse(q.coords, m)};
    Vector out = comp.a * w.vector_field(p);
    if (defect == Defect::vector_field) out[0] += 0.1;
    return out;
  };
  JumpMap jump = [comp, w, m, defect](const TaggedPoint& q) {
    if (defect == Defect::jump) return TaggedPoint{q.node, q.coords.head(m)};
    const TaggedPoint p{NodeId{comp.mode(q.node.index)}, comp.tot_inverse(q.coords, m)};
    const TaggedPoint j = w.jump_map(p);
    return TaggedPoint{NodeId{comp.mode(j.node.index)}, comp.a * j.coords + comp.b};
  };
  std::vector<std::vector<EventFunction>> events(2);
  for (std::size_t n = 0; n < 2; ++n) {
    for (const auto& ev : w.events_at(NodeId{comp.mode(n)})) {
      events[n].push_back([ev, comp, m](const Vector& q) { return ev(comp.tot_inverse(q, m)); });
    }
  }
  return {x.ssub, vf, jump, events};
}

}  // namespace

SmoothMap affine_from(std::size_t in_dim, const std::function<Vector(const Vector&)>& f) {
  const auto n = static_cast<Eigen::Index>(in_dim);
  const Vector b = f(Vector::Zero(n));
  Matrix m(b.size(), n);
  for (Eigen::Index i = 0; i < n; ++i) m.col(i) = f(Vector::Unit(n, i)) - b;
  return SmoothMap::affine(m, b);
}

AffineNetwork random_affine_network(std::uint64_t seed, Defect defect) {
  Draw draw(seed);
  const std::size_t ny = 1 + draw.below(2);
  const std::size_t nx = ny + draw.below(4 - ny);

  std::vector<Entry> ys;
  std::vector<DeterministicControl> w;
  SystemList ly;
  for (std::size_t y = 0; y < ny; ++y) {
    ys.push_back(make_entry(1 + static_cast<Eigen::Index>(draw.below(2)),
                            1 + static_cast<Eigen::Index>(draw.below(2))));
    const Eigen::Index dim = ys[y].m + ys[y].k;
    WParams p;
    for (int j = 0; j < 2; ++j) {
      p.rate[j] = draw.matrix(ys[y].m, dim, 1.0);
      p.offset[j] = draw.vector(ys[y].m, 1.0);
      p.guard[j] = draw.vector(dim, 1.0);
    }
    w.push_back(make_w(ys[y], p));
    ly.add("y" + std::to_string(y), ys[y].ssub);
  }

  // Surjective label map; x_of[y] is the first label over y.
  std::vector<std::size_t> phi(nx);
  for (std::size_t x = 0; x < nx; ++x) phi[x] = x < ny ? (ny - 1 - x) : draw.below(ny);
  std::vector<std::size_t> x_of(ny, nx);
  for (std::size_t x = 0; x < nx; ++x) {
    if (x_of[phi[x]] == nx) x_of[phi[x]] = x;
  }

  const std::size_t bad = defect == Defect::none ? nx : draw.below(nx);
  std::vector<Entry> xs;
  std::vector<Component> comps;
  std::vector<DeterministicControl> v;
  SystemList lx;
  ListMorphism lm{{}, ly, phi, {}};
  for (std::size_t x = 0; x < nx; ++x) {
    const Entry& src = ys[phi[x]];
    xs.push_back(make_entry(src.m, src.k));
    Component c;
    c.swap = draw.below(2) == 1;
    c.a = draw.invertible(src.m);
    c.b = draw.vector(src.m, 1.0);
    c.c = draw.matrix(src.k, src.m, 0.5);
    c.d = draw.invertible(src.k);
    c.e = draw.vector(src.k, 1.0);
    comps.push_back(c);
    v.push_back(push_w(xs[x], c, w[phi[x]], x == bad ? defect : Defect::none));
    lx.add("x" + std::to_string(x), xs[x].ssub);

    const Eigen::Index m = src.m;
    auto node = [c](NodeId n) { return NodeId{c.mode(n.index)}; };
    auto edge = [c](EdgeId e) { return EdgeId{c.edge(e.index)}; };
    const auto tot = uniform_morphism(
        src.total.space(), xs[x].total.space(), node, edge,
        affine_from(static_cast<std::size_t>(src.m + src.k), [c, m](const Vector& p) { return c.tot(p, m); }));
    const auto st = uniform_morphism(src.ssub.state, xs[x].ssub.state, node, edge,
                                     SmoothMap::affine(c.a, c.b));
    lm.components.push_back({src.ssub, xs[x].ssub, tot, st, std::nullopt});
  }
  lm.source = lx;

  // Bound Y: Pi_st(Y) x V with iota_Y(s, v) = (s_y, G_y (s, v) + h_y)_y.
  const Eigen::Index kv = 1 + static_cast<Eigen::Index>(draw.below(2));
  const auto vspace = input_space(kv);
  const SSubProduct py = pi_product(ly);
  const ProductChain by_chain({py.state.space(), vspace});
  const HybridSSub bound_y(PhaseSpaceMorphism::projection(by_chain, 0));
  Eigen::Index sy = 0;
  std::vector<Eigen::Index> y_off;
  for (const auto& e : ys) {
    y_off.push_back(sy);
    sy += e.m;
  }
  std::vector<Matrix> g;
  std::vector<Vector> h;
  for (const auto& e : ys) {
    g.push_back(draw.matrix(e.k, sy + kv, 0.5));
    h.push_back(draw.vector(e.k, 1.0));
  }
  auto inputs_y = [ys, g, h](const Vector& sv) {
    std::vector<Vector> out;
    for (std::size_t y = 0; y < ys.size(); ++y) out.push_back(g[y] * sv + h[y]);
    return out;
  };
  auto iota_y_map = [ys, y_off, inputs_y](const Vector& sv) {
    const auto u = inputs_y(sv);
    Vector out(0);
    for (std::size_t y = 0; y < ys.size(); ++y) out = concat(out, concat(sv.segment(y_off[y], ys[y].m), u[y]));
    return out;
  };
  const ProductChain& pyt = py.total;
  const ProductChain& pys = py.state;
  const auto iota_y_tot = uniform_morphism(
      by_chain.space(), pyt.space(), [&](NodeId n) { return pyt.join_nodes(pys.split_node(n)); },
      [&](EdgeId e) { return pyt.join_edges(pys.split_edge(e)); },
      affine_from(static_cast<std::size_t>(sy + kv), iota_y_map));
  const auto id_ys = PhaseSpaceMorphism::identity(py.state.space());
  Network ny_net = make_network(ly, SSubMorphism{bound_y, py.ssub, iota_y_tot, id_ys, id_ys});

  // Bound X: Pi_st(X) x V. The input part of iota_X reads the Y state back
  // through the left inverse of Pi_st given by the first label over each y.
  const SSubProduct px = pi_product(lx);
  const ProductChain bx_chain({px.state.space(), vspace});
  const HybridSSub bound_x(PhaseSpaceMorphism::projection(bx_chain, 0));
  std::vector<Eigen::Index> x_off;
  Eigen::Index sx = 0;
  for (const auto& e : xs) {
    x_off.push_back(sx);
    sx += e.m;
  }
  auto iota_x_map = [=](const Vector& rv) {
    Vector sv(sy + kv);
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t x = x_of[y];
      const Vector r = rv.segment(x_off[x], xs[x].m);
      sv.segment(y_off[y], ys[y].m) =
          comps[x].a.triangularView<Eigen::Upper>().solve(Vector(r - comps[x].b));
    }
    sv.tail(kv) = rv.tail(kv);
    const auto u = inputs_y(sv);
    Vector out(0);
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t y = phi[x];
      const Vector s = sv.segment(y_off[y], ys[y].m);
      const Vector input = comps[x].c * s + comps[x].d * u[y] + comps[x].e;
      out = concat(out, concat(rv.segment(x_off[x], xs[x].m), input));
    }
    return out;
  };
  const ProductChain& pxt = px.total;
  const ProductChain& pxs = px.state;
  const auto iota_x_tot = uniform_morphism(
      bx_chain.space(), pxt.space(), [&](NodeId n) { return pxt.join_nodes(pxs.split_node(n)); },
      [&](EdgeId e) { return pxt.join_edges(pxs.split_edge(e)); },
      affine_from(static_cast<std::size_t>(sx + kv), iota_x_map));
  const auto id_xs = PhaseSpaceMorphism::identity(px.state.space());
  Network nx_net = make_network(lx, SSubMorphism{bound_x, px.ssub, iota_x_tot, id_xs, id_xs});

  const SSubMorphism pi = pi_morphism(lm);
  const auto z_tot = PhaseSpaceMorphism::product(by_chain, bx_chain,
                                                 {pi.f_st, PhaseSpaceMorphism::identity(vspace)});
  SSubMorphism z{bound_y, bound_x, z_tot, pi.f_st, std::nullopt};

  AffineNetwork out{{std::move(nx_net), std::move(ny_net), std::move(lm), std::move(z)},
                    std::move(w), std::move(v), {}};
  if (bad < nx) out.defect_label = "x" + std::to_string(bad);
  return out;
}

}  // namespace hybrid::testing
