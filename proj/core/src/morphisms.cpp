#include "hybrid/morphisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace hybrid {

namespace {

bool close(const TaggedPoint& a, const TaggedPoint& b, double tol) {
  if (a.node != b.node || a.coords.size() != b.coords.size()) return false;
  return a.coords.size() == 0 || (a.coords - b.coords).cwiseAbs().maxCoeff() <= tol;
}

std::string node_label(const HybridPhaseSpace& h, NodeId n) {
  return n.index < h.node_count() ? h.graph().node_name(n) : "#" + std::to_string(n.index);
}

bool is_bijection(const std::vector<std::size_t>& table, std::size_t target_size) {
  if (table.size() != target_size) return false;
  std::vector<bool> hit(target_size, false);
  for (auto v : table) {
    if (v >= target_size || hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Matrix out = Matrix::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ SmoothMap

SmoothMap SmoothMap::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {dim, dim, [](const Vector& x) { return x; },
          [d](const Vector&) { return Matrix(Matrix::Identity(d, d)); }};
}

SmoothMap SmoothMap::affine(Matrix a, Vector b) {
  const auto in = static_cast<std::size_t>(a.cols());
  const auto out = static_cast<std::size_t>(a.rows());
  if (b.size() != a.rows()) throw Error("affine map: offset has wrong dimension");
  return {in, out, [a, b](const Vector& x) { return Vector(a * x + b); },
          [a](const Vector&) { return a; }};
}

SmoothMap SmoothMap::select(std::size_t in_dim, std::vector<std::size_t> indices) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(in_dim));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= in_dim) throw Error("select: index out of range");
    a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(indices[r])) = 1.0;
  }
  return {in_dim, indices.size(),
          [indices](const Vector& x) {
            Vector y(static_cast<Eigen::Index>(indices.size()));
            for (std::size_t r = 0; r < indices.size(); ++r) {
              y[static_cast<Eigen::Index>(r)] = x[static_cast<Eigen::Index>(indices[r])];
            }
            return y;
          },
          [a](const Vector&) { return a; }};
}

SmoothMap SmoothMap::constant(std::size_t in_dim, Vector value) {
  const auto out = static_cast<std::size_t>(value.size());
  const auto rows = value.size();
  const auto cols = static_cast<Eigen::Index>(in_dim);
  return {in_dim, out, [value](const Vector&) { return value; },
          [rows, cols](const Vector&) { return Matrix(Matrix::Zero(rows, cols)); }};
}

SmoothMap compose(const SmoothMap& g, const SmoothMap& f) {
  if (f.out_dim != g.in_dim) throw Error("compose: smooth map dimensions do not chain");
  SmoothMap out;
  out.in_dim = f.in_dim;
  out.out_dim = g.out_dim;
  out.fd_step = std::min(f.fd_step, g.fd_step);
  out.evaluate = [g, f](const Vector& x) { return g.evaluate(f.evaluate(x)); };
  if (f.jacobian && g.jacobian) {
    out.jacobian = [g, f](const Vector& x) {
      return Matrix(g.jacobian(f.evaluate(x)) * f.jacobian(x));
    };
  }
  return out;
}

// ---------------------------------------------------------- PhaseSpaceMorphism

PhaseSpaceMorphism::PhaseSpaceMorphism(PhaseSpacePtr domain, PhaseSpacePtr codomain, NodeMap nodes,
                                       std::vector<SmoothMap> maps)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), nodes_(std::move(nodes)),
      maps_(std::move(maps)) {
  if (!domain_ || !codomain_) throw Error("morphism needs a domain and a codomain");
  if (nodes_.nodes.size() != domain_->node_count() || maps_.size() != domain_->node_count()) {
    throw Error("morphism node table size differs from the domain node count");
  }
  if (nodes_.edges.size() != domain_->edge_count()) {
    throw Error("morphism edge table size differs from the domain edge count");
  }
}

PhaseSpaceMorphism PhaseSpaceMorphism::identity(const PhaseSpacePtr& hps) {
  NodeMap nm;
  std::vector<SmoothMap> maps;
  for (std::size_t i = 0; i < hps->node_count(); ++i) {
    nm.nodes.push_back(NodeId{i});
    maps.push_back(SmoothMap::identity(hps->dim(NodeId{i})));
  }
  for (std::size_t i = 0; i < hps->edge_count(); ++i) nm.edges.push_back(EdgeId{i});
  return {hps, hps, std::move(nm), std::move(maps)};
}

PhaseSpaceMorphism PhaseSpaceMorphism::projection(const ProductChain& chain, std::size_t i) {
  if (i >= chain.size()) throw Error("projection index out of range");
  const auto& prod = chain.space();
  const auto& target = chain.factors()[i];
  NodeMap nm;
  std::vector<SmoothMap> maps;
  for (std::size_t n = 0; n < prod->node_count(); ++n) {
    const auto parts = chain.split_node(NodeId{n});
    std::size_t offset = 0;
    for (std::size_t k = 0; k < i; ++k) offset += chain.factors()[k]->dim(parts[k]);
    std::vector<std::size_t> idx(target->dim(parts[i]));
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = offset + k;
    nm.nodes.push_back(parts[i]);
    maps.push_back(SmoothMap::select(prod->dim(NodeId{n}), std::move(idx)));
  }
  for (std::size_t e = 0; e < prod->edge_count(); ++e) {
    nm.edges.push_back(chain.split_edge(EdgeId{e})[i]);
  }
  return {prod, target, std::move(nm), std::move(maps)};
}

PhaseSpaceMorphism PhaseSpaceMorphism::pairing(const PhaseSpacePtr& domain,
                                               const ProductChain& codomain,
                                               const std::vector<PhaseSpaceMorphism>& components) {
  if (components.size() != codomain.size()) throw Error("pairing: wrong number of components");
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (!same_structure(*components[i].domain(), *domain) ||
        !same_structure(*components[i].codomain(), *codomain.factors()[i])) {
      throw Error("pairing: component " + std::to_string(i) + " has the wrong domain or codomain");
    }
  }
  NodeMap nm;
  std::vector<SmoothMap> maps;
  for (std::size_t n = 0; n < domain->node_count(); ++n) {
    std::vector<NodeId> parts;
    std::vector<SmoothMap> comps;
    bool analytic = true;
    std::size_t out_dim = 0;
    for (const auto& c : components) {
      parts.push_back(c.map_node(NodeId{n}));
      comps.push_back(c.map(NodeId{n}));
      analytic = analytic && static_cast<bool>(comps.back().jacobian);
      out_dim += comps.back().out_dim;
    }
    nm.nodes.push_back(codomain.join_nodes(parts));
    SmoothMap m;
    m.in_dim = domain->dim(NodeId{n});
    m.out_dim = out_dim;
    const auto od = static_cast<Eigen::Index>(out_dim);
    m.evaluate = [comps, od](const Vector& x) {
      Vector y(od);
      Eigen::Index off = 0;
      for (const auto& c : comps) {
        const Vector part = c.evaluate(x);
        y.segment(off, part.size()) = part;
        off += part.size();
      }
      return y;
    };
    if (analytic) {
      m.jacobian = [comps, od](const Vector& x) {
        Matrix j(od, x.size());
        Eigen::Index off = 0;
        for (const auto& c : comps) {
          const Matrix part = c.jacobian(x);
          j.middleRows(off, part.rows()) = part;
          off += part.rows();
        }
        return j;
      };
    }
    for (const auto& c : comps) m.fd_step = std::min(m.fd_step, c.fd_step);
    maps.push_back(std::move(m));
  }
  for (std::size_t e = 0; e < domain->edge_count(); ++e) {
    std::vector<EdgeId> parts;
    for (const auto& c : components) parts.push_back(c.map_edge(EdgeId{e}));
    nm.edges.push_back(codomain.join_edges(parts));
  }
  return {domain, codomain.space(), std::move(nm), std::move(maps)};
}

PhaseSpaceMorphism PhaseSpaceMorphism::product(const ProductChain& domain,
                                               const ProductChain& codomain,
                                               const std::vector<PhaseSpaceMorphism>& factors) {
  if (factors.size() != domain.size() || factors.size() != codomain.size()) {
    throw Error("product of morphisms: factor count mismatch");
  }
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (!same_structure(*factors[i].domain(), *domain.factors()[i]) ||
        !same_structure(*factors[i].codomain(), *codomain.factors()[i])) {
      throw Error("product of morphisms: factor " + std::to_string(i) + " does not match");
    }
  }
  const auto& dom = domain.space();
  NodeMap nm;
  std::vector<SmoothMap> maps;
  for (std::size_t n = 0; n < dom->node_count(); ++n) {
    const auto parts = domain.split_node(NodeId{n});
    std::vector<NodeId> images;
    std::vector<SmoothMap> comps;
    std::vector<Eigen::Index> in_dims;
    bool analytic = true;
    std::size_t out_dim = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      images.push_back(factors[i].map_node(parts[i]));
      comps.push_back(factors[i].map(parts[i]));
      in_dims.push_back(static_cast<Eigen::Index>(comps.back().in_dim));
      analytic = analytic && static_cast<bool>(comps.back().jacobian);
      out_dim += comps.back().out_dim;
    }
    nm.nodes.push_back(codomain.join_nodes(images));
    SmoothMap m;
    m.in_dim = dom->dim(NodeId{n});
    m.out_dim = out_dim;
    const auto od = static_cast<Eigen::Index>(out_dim);
    m.evaluate = [comps, in_dims, od](const Vector& x) {
      Vector y(od);
      Eigen::Index in = 0;
      Eigen::Index out = 0;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const Vector part = comps[i].evaluate(x.segment(in, in_dims[i]));
        y.segment(out, part.size()) = part;
        in += in_dims[i];
        out += part.size();
      }
      return y;
    };
    if (analytic) {
      m.jacobian = [comps, in_dims](const Vector& x) {
        std::vector<Matrix> blocks;
        Eigen::Index in = 0;
        for (std::size_t i = 0; i < comps.size(); ++i) {
          blocks.push_back(comps[i].jacobian(x.segment(in, in_dims[i])));
          in += in_dims[i];
        }
        return block_diagonal(blocks);
      };
    }
    for (const auto& c : comps) m.fd_step = std::min(m.fd_step, c.fd_step);
    maps.push_back(std::move(m));
  }
  for (std::size_t e = 0; e < dom->edge_count(); ++e) {
    const auto parts = domain.split_edge(EdgeId{e});
    std::vector<EdgeId> images;
    for (std::size_t i = 0; i < factors.size(); ++i) images.push_back(factors[i].map_edge(parts[i]));
    nm.edges.push_back(codomain.join_edges(images));
  }
  return {dom, codomain.space(), std::move(nm), std::move(maps)};
}

ValidationReport validate(const PhaseSpaceMorphism& f) {
  ValidationReport r;
  const auto& a = *f.domain();
  const auto& b = *f.codomain();
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    const NodeId s{n};
    const NodeId t = f.map_node(s);
    if (t.index >= b.node_count()) {
      r.add("node '" + node_label(a, s) + "' maps to an undeclared node");
      continue;
    }
    const auto& m = f.map(s);
    if (m.in_dim != a.dim(s) || m.out_dim != b.dim(t)) {
      r.add("map on node '" + node_label(a, s) + "' is " + std::to_string(m.in_dim) + "->" +
            std::to_string(m.out_dim) + ", expected " + std::to_string(a.dim(s)) + "->" +
            std::to_string(b.dim(t)));
    }
    if (!m.evaluate) r.add("map on node '" + node_label(a, s) + "' has no evaluator");
  }
  for (std::size_t e = 0; e < a.edge_count(); ++e) {
    const auto& ed = a.graph().edge(EdgeId{e});
    const EdgeId img = f.map_edge(EdgeId{e});
    if (img.index >= b.edge_count()) {
      r.add("edge '" + ed.name + "' maps to an undeclared edge");
      continue;
    }
    if (ed.src.index >= a.node_count() || ed.tgt.index >= a.node_count()) continue;
    const auto& ie = b.graph().edge(img);
    if (ie.src != f.map_node(ed.src) || ie.tgt != f.map_node(ed.tgt)) {
      r.add("edge '" + ed.name + "' maps to '" + ie.name + "' with mismatched endpoints");
    }
    if (a.graph().is_unit(EdgeId{e}) && !b.graph().is_unit(img)) {
      r.add("unit edge '" + ed.name + "' maps to non-unit edge '" + ie.name + "'");
    }
  }
  return r;
}

TaggedPoint apply(const PhaseSpaceMorphism& f, const TaggedPoint& p, double tol) {
  const auto& a = *f.domain();
  const auto& b = *f.codomain();
  if (p.node.index >= a.node_count()) {
    throw Error("apply: unknown node index " + std::to_string(p.node.index));
  }
  const auto& box = a.space(p.node);
  if (static_cast<std::size_t>(p.coords.size()) != box.dim()) {
    throw Error("apply: point has " + std::to_string(p.coords.size()) + " coordinates, node '" +
                node_label(a, p.node) + "' has dimension " + std::to_string(box.dim()));
  }
  if (const auto k = box.first_violation(p.coords, tol); k < box.dim()) {
    throw Error("apply: coordinate " + std::to_string(k) + " = " +
                std::to_string(p.coords[static_cast<Eigen::Index>(k)]) + " lies outside " +
                box[k].to_string() + " at node '" + node_label(a, p.node) + "'");
  }
  TaggedPoint out{f.map_node(p.node), f.map(p.node).evaluate(p.coords)};
  const auto& obox = b.space(out.node);
  if (static_cast<std::size_t>(out.coords.size()) != obox.dim()) {
    throw Error("apply: image has wrong dimension at node '" + node_label(b, out.node) + "'");
  }
  if (const auto k = obox.first_violation(out.coords, tol); k < obox.dim()) {
    throw Error("apply: image coordinate " + std::to_string(k) + " = " +
                std::to_string(out.coords[static_cast<Eigen::Index>(k)]) + " lies outside " +
                obox[k].to_string() + " at node '" + node_label(b, out.node) + "'");
  }
  return out;
}

Differential differential(const SmoothMap& m, const BoxSpace& box, const Vector& x) {
  Differential d;
  if (m.jacobian) {
    d.jacobian = m.jacobian(x);
    d.analytic = true;
    return d;
  }
  const auto n = x.size();
  d.jacobian.resize(static_cast<Eigen::Index>(m.out_dim), n);
  const double h = m.fd_step;
  for (Eigen::Index k = 0; k < n; ++k) {
    auto shifted = [&](double s) {
      Vector y = x;
      y[k] += s;
      return y;
    };
    const Vector xp = shifted(h);
    const Vector xm = shifted(-h);
    const bool up = box.contains(xp) && box.contains(shifted(2 * h));
    const bool down = box.contains(xm) && box.contains(shifted(-2 * h));
    if ((box.contains(xp) && box.contains(xm)) || (!up && !down)) {
      d.jacobian.col(k) = (m.evaluate(xp) - m.evaluate(xm)) / (2 * h);
    } else if (up) {
      d.jacobian.col(k) =
          (-3.0 * m.evaluate(x) + 4.0 * m.evaluate(xp) - m.evaluate(shifted(2 * h))) / (2 * h);
      d.one_sided = true;
    } else {
      d.jacobian.col(k) =
          (3.0 * m.evaluate(x) - 4.0 * m.evaluate(xm) + m.evaluate(shifted(-2 * h))) / (2 * h);
      d.one_sided = true;
    }
  }
  return d;
}

Differential differential(const PhaseSpaceMorphism& f, const TaggedPoint& p) {
  if (p.node.index >= f.domain()->node_count()) throw Error("differential: unknown node");
  return differential(f.map(p.node), f.domain()->space(p.node), p.coords);
}

PhaseSpaceMorphism compose(const PhaseSpaceMorphism& g, const PhaseSpaceMorphism& f) {
  if (!same_structure(*f.codomain(), *g.domain())) {
    throw Error("compose: codomain '" + f.codomain()->name() + "' does not match domain '" +
                g.domain()->name() + "'");
  }
  NodeMap nm;
  std::vector<SmoothMap> maps;
  for (std::size_t n = 0; n < f.domain()->node_count(); ++n) {
    const NodeId mid = f.map_node(NodeId{n});
    nm.nodes.push_back(g.map_node(mid));
    maps.push_back(compose(g.map(mid), f.map(NodeId{n})));
  }
  for (std::size_t e = 0; e < f.domain()->edge_count(); ++e) {
    nm.edges.push_back(g.map_edge(f.map_edge(EdgeId{e})));
  }
  return {f.domain(), g.codomain(), std::move(nm), std::move(maps)};
}

MorphismReport check_morphism(const PhaseSpaceMorphism& f, const CheckOptions& opts) {
  MorphismReport rep;
  const auto table = validate(f);
  rep.failures = table.violations;
  if (!table.ok()) return rep;

  const auto& a = *f.domain();
  const auto& b = *f.codomain();
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    const NodeId s{n};
    const NodeId t = f.map_node(s);
    for (const auto& p : sample_node(a, s, opts.samples, opts.seed)) {
      const Vector y = f.map(s).evaluate(p.coords);
      if (!b.space(t).contains(y, opts.tol)) {
        rep.failures.push_back("node '" + node_label(a, s) + "': image of " +
                               format_vector(p.coords) + " is " + format_vector(y) +
                               ", outside the box of '" + node_label(b, t) + "'");
        break;
      }
    }
  }
  for (std::size_t e = 0; e < a.edge_count(); ++e) {
    const EdgeId g{e};
    const auto& ed = a.graph().edge(g);
    const auto& rel = a.relation(g);
    if (!rel.sampleable()) {
      rep.unsampleable.push_back(ed.name);
      continue;
    }
    const EdgeId img = f.map_edge(g);
    const auto& target = b.relation(img);
    for (const auto& [x, y] : rel.sample(opts.samples, mix_seed(opts.seed, 1000 + e))) {
      ++rep.checked_pairs;
      const Vector fx = f.map(ed.src).evaluate(x);
      const Vector fy = f.map(ed.tgt).evaluate(y);
      if (!target.contains(fx, fy, opts.tol)) {
        rep.failures.push_back("edge '" + ed.name + "': pair " + format_vector(x) + " -> " +
                               format_vector(y) + " maps to " + format_vector(fx) + " -> " +
                               format_vector(fy) + ", not in the relation of '" +
                               b.graph().edge(img).name + "'");
        break;
      }
    }
  }
  return rep;
}

// -------------------------------------------------------------------- HybridSSub

HybridSSub HybridSSub::identity(const PhaseSpacePtr& hps) {
  return HybridSSub(PhaseSpaceMorphism::identity(hps));
}

SubmersionReport check_submersion(const HybridSSub& s, std::size_t samples_per_node,
                                  double rank_tol, std::uint64_t seed) {
  SubmersionReport rep;
  rep.asserted_surjective = s.asserted_surjective;
  rep.min_singular_value = std::numeric_limits<double>::infinity();
  const auto& tot = *s.total;
  const auto& st = *s.state;
  std::vector<bool> hit(st.node_count(), false);
  for (std::size_t n = 0; n < tot.node_count(); ++n) {
    const auto t = s.proj.map_node(NodeId{n});
    if (t.index < hit.size()) hit[t.index] = true;
  }
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (!hit[i]) rep.missed_nodes.push_back(st.graph().node_name(NodeId{i}));
  }
  rep.node_surjective = rep.missed_nodes.empty();

  for (std::size_t n = 0; n < tot.node_count(); ++n) {
    const NodeId node{n};
    const auto rows = static_cast<Eigen::Index>(st.dim(s.proj.map_node(node)));
    if (rows == 0) continue;
    for (const auto& p : sample_node(tot, node, samples_per_node, seed)) {
      const Matrix j = differential(s.proj, p).jacobian;
      double smallest = 0.0;
      if (j.cols() >= rows) {
        Eigen::JacobiSVD<Matrix> svd(j);
        smallest = svd.singularValues()[rows - 1];
      }
      rep.min_singular_value = std::min(rep.min_singular_value, smallest);
      if (smallest < rank_tol) {
        rep.rank_failures.push_back("node '" + tot.graph().node_name(node) + "' at " +
                                    format_vector(p.coords) + ": singular value " +
                                    std::to_string(smallest) + " below " + std::to_string(rank_tol));
        break;
      }
    }
  }
  return rep;
}

SSubProduct product_ssub(const std::vector<HybridSSub>& parts) {
  std::vector<PhaseSpacePtr> totals;
  std::vector<PhaseSpacePtr> states;
  std::vector<PhaseSpaceMorphism> projs;
  for (const auto& p : parts) {
    totals.push_back(p.total);
    states.push_back(p.state);
    projs.push_back(p.proj);
  }
  ProductChain tot(std::move(totals));
  ProductChain st(std::move(states));
  bool surj = std::all_of(parts.begin(), parts.end(),
                          [](const HybridSSub& p) { return p.asserted_surjective; });
  HybridSSub ssub(PhaseSpaceMorphism::product(tot, st, projs), surj);
  return {std::move(tot), std::move(st), std::move(ssub)};
}

// ------------------------------------------------------------------ SSubMorphism

SSubMorphism identity_ssub_morphism(const HybridSSub& s) {
  return {s, s, PhaseSpaceMorphism::identity(s.total), PhaseSpaceMorphism::identity(s.state),
          PhaseSpaceMorphism::identity(s.state)};
}

ValidationReport check_ssub_morphism(const SSubMorphism& f, const CheckOptions& opts) {
  ValidationReport r;
  if (!same_structure(*f.f_tot.domain(), *f.domain.total) ||
      !same_structure(*f.f_tot.codomain(), *f.codomain.total)) {
    r.add("total map does not run between the total spaces");
  }
  if (!same_structure(*f.f_st.domain(), *f.domain.state) ||
      !same_structure(*f.f_st.codomain(), *f.codomain.state)) {
    r.add("state map does not run between the state spaces");
  }
  if (!r.ok()) return r;
  for (const auto& msg : check_morphism(f.f_tot, opts).failures) r.add("total: " + msg);
  for (const auto& msg : check_morphism(f.f_st, opts).failures) r.add("state: " + msg);

  for (const auto& p : sample_points(*f.domain.total, opts.samples, mix_seed(opts.seed, 77))) {
    try {
      const TaggedPoint lhs = apply(f.codomain.proj, apply(f.f_tot, p, opts.tol), opts.tol);
      const TaggedPoint rhs = apply(f.f_st, apply(f.domain.proj, p, opts.tol), opts.tol);
      if (!close(lhs, rhs, opts.tol)) {
        r.add("square does not commute at " + to_string(*f.domain.total, p) + ": " +
              to_string(*f.codomain.state, lhs) + " vs " + to_string(*f.codomain.state, rhs));
        break;
      }
    } catch (const Error& e) {
      r.add(std::string("square evaluation failed: ") + e.what());
      break;
    }
  }
  return r;
}

SSubMorphism compose(const SSubMorphism& g, const SSubMorphism& f) {
  std::optional<PhaseSpaceMorphism> inv;
  if (f.st_inverse && g.st_inverse) inv = compose(*f.st_inverse, *g.st_inverse);
  return {f.domain, g.codomain, compose(g.f_tot, f.f_tot), compose(g.f_st, f.f_st), std::move(inv)};
}

SSubMorphism product_morphism(const std::vector<SSubMorphism>& parts) {
  std::vector<HybridSSub> doms;
  std::vector<HybridSSub> cods;
  std::vector<PhaseSpaceMorphism> tots;
  std::vector<PhaseSpaceMorphism> sts;
  std::vector<PhaseSpaceMorphism> invs;
  bool have_inv = true;
  for (const auto& p : parts) {
    doms.push_back(p.domain);
    cods.push_back(p.codomain);
    tots.push_back(p.f_tot);
    sts.push_back(p.f_st);
    if (p.st_inverse) {
      invs.push_back(*p.st_inverse);
    } else {
      have_inv = false;
    }
  }
  auto dom = product_ssub(doms);
  auto cod = product_ssub(cods);
  auto f_tot = PhaseSpaceMorphism::product(dom.total, cod.total, tots);
  auto f_st = PhaseSpaceMorphism::product(dom.state, cod.state, sts);
  std::optional<PhaseSpaceMorphism> inv;
  if (have_inv) inv = PhaseSpaceMorphism::product(cod.state, dom.state, invs);
  return {dom.ssub, cod.ssub, std::move(f_tot), std::move(f_st), std::move(inv)};
}

// --------------------------------------------------------------- interconnections

namespace {

std::string check_inverse_pair(const PhaseSpaceMorphism& f, const PhaseSpaceMorphism& g,
                               const CheckOptions& opts) {
  const auto& a = *f.domain();
  const auto& b = *f.codomain();
  if (!same_structure(*g.domain(), b) || !same_structure(*g.codomain(), a)) {
    return "inverse candidate runs between the wrong spaces";
  }
  std::vector<std::size_t> nodes;
  for (auto n : f.node_map().nodes) nodes.push_back(n.index);
  std::vector<std::size_t> edges;
  for (auto e : f.node_map().edges) edges.push_back(e.index);
  if (!is_bijection(nodes, b.node_count())) return "node map is not a bijection";
  if (!is_bijection(edges, b.edge_count())) return "edge map is not a bijection";
  for (std::size_t n = 0; n < a.node_count(); ++n) {
    if (g.map_node(f.map_node(NodeId{n})) != NodeId{n}) {
      return "inverse node map fails at '" + a.graph().node_name(NodeId{n}) + "'";
    }
  }
  for (std::size_t e = 0; e < a.edge_count(); ++e) {
    if (g.map_edge(f.map_edge(EdgeId{e})) != EdgeId{e}) {
      return "inverse edge map fails at '" + a.graph().edge(EdgeId{e}).name + "'";
    }
  }
  auto round_trip = [&](const PhaseSpaceMorphism& first, const PhaseSpaceMorphism& second,
                        std::uint64_t stream) -> std::string {
    for (const auto& p : sample_points(*first.domain(), opts.samples, mix_seed(opts.seed, stream))) {
      try {
        const TaggedPoint back = apply(second, apply(first, p, opts.tol), opts.tol);
        if (!close(back, p, opts.tol)) {
          return "round trip moves " + to_string(*first.domain(), p) + " to " +
                 to_string(*first.domain(), back);
        }
      } catch (const Error& e) {
        return std::string("round trip failed: ") + e.what();
      }
    }
    return {};
  };
  if (auto w = round_trip(f, g, 11); !w.empty()) return w;
  if (auto w = round_trip(g, f, 12); !w.empty()) return w;
  return {};
}

}  // namespace

InterconnectionCheck is_interconnection(const SSubMorphism& f, const CheckOptions& opts) {
  if (!f.st_inverse) {
    throw Error("interconnection check needs a candidate inverse for the state map");
  }
  InterconnectionCheck out;
  out.witness = check_inverse_pair(f.f_st, *f.st_inverse, opts);
  out.ok = out.witness.empty();
  return out;
}

Interconnection Interconnection::verify(SSubMorphism f, const CheckOptions& opts) {
  const auto chk = is_interconnection(f, opts);
  if (!chk.ok) throw Error("not an interconnection: " + chk.witness);
  const auto square = check_ssub_morphism(f, opts);
  if (!square.ok()) throw Error("not a substrate morphism: " + square.violations.front());
  return Interconnection(std::move(f));
}

PhaseSpaceMorphism invert_iso(const PhaseSpaceMorphism& f, const PhaseSpaceMorphism& candidate,
                              const CheckOptions& opts) {
  if (auto w = check_inverse_pair(f, candidate, opts); !w.empty()) {
    throw Error("inverse rejected: " + w);
  }
  const auto fwd = check_morphism(f, opts);
  if (!fwd.pass()) throw Error("relations not preserved: " + fwd.failures.front());
  const auto bwd = check_morphism(candidate, opts);
  if (!bwd.pass()) throw Error("relations not reflected: " + bwd.failures.front());
  return candidate;
}

}  // namespace hybrid
