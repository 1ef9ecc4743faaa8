#include "hybrid/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hybrid {

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::diagonal:
      return "diagonal";
    case RelationKind::finite_list:
      return "finite-list";
    case RelationKind::predicate:
      return "predicate";
  }
  return "?";
}

namespace {

bool close(const Vector& a, const Vector& b, double tol) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(std::abs(a[i] - b[i]) <= tol)) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- JumpRelation

JumpRelation JumpRelation::diagonal(BoxSpace box) {
  JumpRelation r;
  r.kind_ = RelationKind::diagonal;
  r.box_ = std::move(box);
  r.membership_ = [](const Vector& x, const Vector& y, double tol) { return close(x, y, tol); };
  r.sampler_ = [box = r.box_](std::size_t count, std::uint64_t seed) {
    std::vector<PointPair> out;
    for (auto& x : sample_box(box, count, seed)) out.emplace_back(x, x);
    return out;
  };
  return r;
}

JumpRelation JumpRelation::finite(std::vector<PointPair> pairs) {
  JumpRelation r;
  r.kind_ = RelationKind::finite_list;
  r.pairs_ = std::move(pairs);
  r.membership_ = [pairs = r.pairs_](const Vector& x, const Vector& y, double tol) {
    return std::any_of(pairs.begin(), pairs.end(), [&](const PointPair& p) {
      return close(p.first, x, tol) && close(p.second, y, tol);
    });
  };
  r.sampler_ = [pairs = r.pairs_](std::size_t, std::uint64_t) { return pairs; };
  return r;
}

JumpRelation JumpRelation::predicate(Membership membership, PairSampler sampler) {
  JumpRelation r;
  r.kind_ = RelationKind::predicate;
  r.membership_ = std::move(membership);
  r.sampler_ = std::move(sampler);
  return r;
}

JumpRelation JumpRelation::product(const JumpRelation& a, const JumpRelation& b,
                                   std::size_t a_source_dim, std::size_t a_target_dim) {
  if (a.kind_ == RelationKind::diagonal && b.kind_ == RelationKind::diagonal) {
    return diagonal(a.box_.times(b.box_));
  }
  if (a.kind_ == RelationKind::finite_list && b.kind_ == RelationKind::finite_list) {
    std::vector<PointPair> pairs;
    for (const auto& [x, x2] : a.pairs_) {
      for (const auto& [y, y2] : b.pairs_) pairs.emplace_back(concat(x, y), concat(x2, y2));
    }
    return finite(std::move(pairs));
  }

  const auto as = static_cast<Eigen::Index>(a_source_dim);
  const auto at = static_cast<Eigen::Index>(a_target_dim);
  Membership m = [a, b, as, at](const Vector& x, const Vector& y, double tol) {
    if (x.size() < as || y.size() < at) return false;
    return a.contains(x.head(as), y.head(at), tol) &&
           b.contains(x.tail(x.size() - as), y.tail(y.size() - at), tol);
  };
  PairSampler s;
  if (a.sampleable() && b.sampleable()) {
    s = [a, b](std::size_t count, std::uint64_t seed) {
      const auto pa = a.sample(count, mix_seed(seed, 1));
      const auto pb = b.sample(count, mix_seed(seed, 2));
      std::vector<PointPair> out;
      if (pa.empty() || pb.empty()) return out;
      const std::size_t n = std::max(pa.size(), pb.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto& u = pa[i % pa.size()];
        const auto& v = pb[i % pb.size()];
        out.emplace_back(concat(u.first, v.first), concat(u.second, v.second));
      }
      return out;
    };
  }
  return predicate(std::move(m), std::move(s));
}

bool JumpRelation::contains(const Vector& before, const Vector& after, double tol) const {
  return membership_ && membership_(before, after, tol);
}

std::vector<PointPair> JumpRelation::sample(std::size_t count, std::uint64_t seed) const {
  if (!sampleable()) throw Error("relation has no sampler");
  return sampler_(count, seed);
}

// ----------------------------------------------------------------- SourceGraph

bool SourceGraph::is_unit(EdgeId e) const {
  const auto& ed = edges_.at(e.index);
  if (ed.src.index >= units_.size()) return false;
  return units_[ed.src.index] == e;
}

std::optional<NodeId> SourceGraph::find_node(std::string_view name) const {
  for (std::size_t i = 0; i < node_names_.size(); ++i) {
    if (node_names_[i] == name) return NodeId{i};
  }
  return std::nullopt;
}

std::optional<EdgeId> SourceGraph::find_edge(std::string_view name) const {
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].name == name) return EdgeId{i};
  }
  return std::nullopt;
}

// ------------------------------------------------------------- HybridPhaseSpace

HybridPhaseSpace::Builder::Builder(std::string name) : hps_(std::make_shared<HybridPhaseSpace>()) {
  hps_->name_ = std::move(name);
}

NodeId HybridPhaseSpace::Builder::add_node(std::string name, BoxSpace box) {
  const NodeId n = add_node_without_unit(std::move(name), box);
  add_unit_edge(n, JumpRelation::diagonal(std::move(box)));
  return n;
}

NodeId HybridPhaseSpace::Builder::add_node_without_unit(std::string name, BoxSpace box) {
  auto& g = hps_->graph_;
  g.node_names_.push_back(std::move(name));
  g.units_.emplace_back();
  hps_->spaces_.push_back(std::move(box));
  return NodeId{g.node_names_.size() - 1};
}

EdgeId HybridPhaseSpace::Builder::add_edge(std::string name, NodeId src, NodeId tgt,
                                           JumpRelation relation) {
  auto& g = hps_->graph_;
  g.edges_.push_back(Edge{std::move(name), src, tgt});
  hps_->relations_.push_back(std::move(relation));
  return EdgeId{g.edges_.size() - 1};
}

EdgeId HybridPhaseSpace::Builder::add_unit_edge(NodeId n, JumpRelation relation) {
  std::string name = "id_";
  if (n.index < hps_->graph_.node_names_.size()) name += hps_->graph_.node_names_[n.index];
  const EdgeId e = add_edge(std::move(name), n, n, std::move(relation));
  set_unit(n, e);
  return e;
}

void HybridPhaseSpace::Builder::set_unit(NodeId n, EdgeId e) {
  auto& g = hps_->graph_;
  if (n.index >= g.units_.size()) throw Error("set_unit: unknown node");
  if (g.units_[n.index]) g.extra_unit_marks_.push_back(n.index);
  g.units_[n.index] = e;
}

void HybridPhaseSpace::Builder::set_factors(PhaseSpacePtr left, PhaseSpacePtr right) {
  hps_->factors_ = Factors{std::move(left), std::move(right)};
}

PhaseSpacePtr HybridPhaseSpace::Builder::build() {
  if (!hps_) throw Error("builder already consumed");
  PhaseSpacePtr out = std::move(hps_);
  return out;
}

NodeId HybridPhaseSpace::node(std::string_view name) const {
  if (auto n = graph_.find_node(name)) return *n;
  throw Error("unknown node '" + std::string(name) + "' in phase space '" + name_ + "'");
}

EdgeId HybridPhaseSpace::edge(std::string_view name) const {
  if (auto e = graph_.find_edge(name)) return *e;
  throw Error("unknown edge '" + std::string(name) + "' in phase space '" + name_ + "'");
}

// ------------------------------------------------------------------ operations

ValidationReport validate(const HybridPhaseSpace& hps, std::size_t sampler_probe) {
  ValidationReport report;
  const auto& g = hps.graph();
  const std::size_t nn = g.node_count();

  std::set<std::string> seen;
  for (const auto& name : g.node_names()) {
    if (!seen.insert(name).second) report.add("duplicate node id '" + name + "'");
  }
  seen.clear();
  for (const auto& e : g.edges()) {
    if (!seen.insert(e.name).second) report.add("duplicate edge id '" + e.name + "'");
  }
  for (std::size_t idx : g.repeated_units()) {
    report.add("node '" + g.node_name(NodeId{idx}) + "' has more than one unit edge");
  }

  for (std::size_t i = 0; i < nn; ++i) {
    const NodeId n{i};
    const auto& box = hps.space(n);
    if (!box.well_formed()) report.add("node '" + g.node_name(n) + "' has a malformed box");
    const auto u = g.unit_edge(n);
    if (!u) {
      report.add("node '" + g.node_name(n) + "' has no unit edge");
      continue;
    }
    const auto& ue = g.edge(*u);
    if (ue.src != n || ue.tgt != n) {
      report.add("unit edge '" + ue.name + "' of node '" + g.node_name(n) + "' is not a self-loop");
    }
    const auto& rel = hps.relation(*u);
    if (rel.kind() != RelationKind::diagonal) {
      report.add("unit relation of node '" + g.node_name(n) + "' is not diagonal");
    } else if (!(rel.diagonal_box() == box)) {
      report.add("unit relation of node '" + g.node_name(n) + "' is the diagonal of a different box");
    }
  }

  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const EdgeId e{i};
    const auto& ed = g.edge(e);
    if (ed.src.index >= nn || ed.tgt.index >= nn) {
      report.add("edge '" + ed.name + "' references an undeclared node");
      continue;
    }
    const auto& rel = hps.relation(e);
    const auto ds = static_cast<Eigen::Index>(hps.dim(ed.src));
    const auto dt = static_cast<Eigen::Index>(hps.dim(ed.tgt));
    if (rel.kind() == RelationKind::finite_list) {
      for (const auto& [x, y] : rel.pairs()) {
        if (x.size() != ds || y.size() != dt) {
          report.add("edge '" + ed.name + "' stores a pair with mismatched dimensions");
          break;
        }
      }
    } else if (rel.kind() == RelationKind::diagonal) {
      if (ds != dt || static_cast<Eigen::Index>(rel.diagonal_box().dim()) != ds) {
        report.add("edge '" + ed.name + "' carries a diagonal between different spaces");
      }
    } else if (rel.sampleable() && sampler_probe > 0) {
      for (const auto& [x, y] : rel.sample(sampler_probe, 0x5eed)) {
        if (x.size() != ds || y.size() != dt) {
          report.add("edge '" + ed.name + "' sampler emits pairs with mismatched dimensions");
          break;
        }
        if (!rel.contains(x, y)) {
          report.add("edge '" + ed.name + "' sampler emits a non-member pair");
          break;
        }
      }
    }
  }
  return report;
}

bool contains(const HybridPhaseSpace& hps, const TaggedPoint& p, double tol) {
  if (p.node.index >= hps.node_count()) {
    throw Error("unknown node index " + std::to_string(p.node.index) + " in phase space '" +
                hps.name() + "'");
  }
  return hps.space(p.node).contains(p.coords, tol);
}

std::optional<EdgeId> lambda_lookup(const HybridPhaseSpace& hps, const TaggedPoint& x,
                                    const TaggedPoint& y, double tol) {
  const auto& g = hps.graph();
  if (x.node.index >= g.node_count() || y.node.index >= g.node_count()) return std::nullopt;
  if (x.node == y.node) {
    if (auto u = g.unit_edge(x.node); u && hps.relation(*u).contains(x.coords, y.coords, tol)) {
      return u;
    }
  }
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const EdgeId e{i};
    const auto& ed = g.edge(e);
    if (ed.src != x.node || ed.tgt != y.node || g.unit_edge(x.node) == e) continue;
    if (hps.relation(e).contains(x.coords, y.coords, tol)) return e;
  }
  return std::nullopt;
}

PhaseSpacePtr terminal() {
  HybridPhaseSpace::Builder b("terminal");
  b.add_node("*", BoxSpace::point());
  return b.build();
}

PhaseSpacePtr product_space(const PhaseSpacePtr& a, const PhaseSpacePtr& b) {
  HybridPhaseSpace::Builder out(a->name() + "*" + b->name());
  const auto& ga = a->graph();
  const auto& gb = b->graph();
  for (std::size_t s = 0; s < ga.node_count(); ++s) {
    for (std::size_t t = 0; t < gb.node_count(); ++t) {
      out.add_node_without_unit("(" + ga.node_name(NodeId{s}) + "," + gb.node_name(NodeId{t}) + ")",
                                a->space(NodeId{s}).times(b->space(NodeId{t})));
    }
  }
  const std::size_t nb = gb.node_count();
  for (std::size_t g = 0; g < ga.edge_count(); ++g) {
    const auto& ea = ga.edge(EdgeId{g});
    for (std::size_t h = 0; h < gb.edge_count(); ++h) {
      const auto& eb = gb.edge(EdgeId{h});
      out.add_edge("(" + ea.name + "," + eb.name + ")", NodeId{ea.src.index * nb + eb.src.index},
                   NodeId{ea.tgt.index * nb + eb.tgt.index},
                   JumpRelation::product(a->relation(EdgeId{g}), b->relation(EdgeId{h}),
                                         a->dim(ea.src), a->dim(ea.tgt)));
    }
  }
  const std::size_t eb_count = gb.edge_count();
  for (std::size_t s = 0; s < ga.node_count(); ++s) {
    for (std::size_t t = 0; t < nb; ++t) {
      const auto ua = ga.unit_edge(NodeId{s});
      const auto ub = gb.unit_edge(NodeId{t});
      if (ua && ub) out.set_unit(NodeId{s * nb + t}, EdgeId{ua->index * eb_count + ub->index});
    }
  }
  out.set_factors(a, b);
  return out.build();
}

bool same_structure(const HybridPhaseSpace& a, const HybridPhaseSpace& b) {
  if (&a == &b) return true;
  const auto& ga = a.graph();
  const auto& gb = b.graph();
  if (ga.node_names() != gb.node_names() || ga.edge_count() != gb.edge_count()) return false;
  for (std::size_t i = 0; i < ga.node_count(); ++i) {
    if (!(a.space(NodeId{i}) == b.space(NodeId{i}))) return false;
    if (ga.unit_edge(NodeId{i}) != gb.unit_edge(NodeId{i})) return false;
  }
  for (std::size_t i = 0; i < ga.edge_count(); ++i) {
    const auto& ea = ga.edge(EdgeId{i});
    const auto& eb = gb.edge(EdgeId{i});
    if (ea.src != eb.src || ea.tgt != eb.tgt) return false;
    if (a.relation(EdgeId{i}).kind() != b.relation(EdgeId{i}).kind()) return false;
  }
  return true;
}

std::pair<TaggedPoint, TaggedPoint> split_underlying(const HybridPhaseSpace& a,
                                                     const HybridPhaseSpace& b,
                                                     const TaggedPoint& p) {
  const std::size_t nb = b.node_count();
  if (nb == 0 || p.node.index >= a.node_count() * nb) throw Error("split: node outside product");
  const NodeId s{p.node.index / nb};
  const NodeId t{p.node.index % nb};
  const auto da = static_cast<Eigen::Index>(a.dim(s));
  const auto db = static_cast<Eigen::Index>(b.dim(t));
  if (p.coords.size() != da + db) {
    throw Error("split: point has " + std::to_string(p.coords.size()) + " coordinates, expected " +
                std::to_string(da + db));
  }
  return {TaggedPoint{s, p.coords.head(da)}, TaggedPoint{t, p.coords.tail(db)}};
}

TaggedPoint join_underlying(const HybridPhaseSpace& a, const HybridPhaseSpace& b,
                            const TaggedPoint& pa, const TaggedPoint& pb) {
  if (pa.node.index >= a.node_count() || pb.node.index >= b.node_count()) {
    throw Error("join: unknown node");
  }
  if (static_cast<std::size_t>(pa.coords.size()) != a.dim(pa.node) ||
      static_cast<std::size_t>(pb.coords.size()) != b.dim(pb.node)) {
    throw Error("join: coordinate dimension mismatch");
  }
  return TaggedPoint{NodeId{pa.node.index * b.node_count() + pb.node.index},
                     concat(pa.coords, pb.coords)};
}

// ---------------------------------------------------------------- ProductChain

ProductChain::ProductChain(std::vector<PhaseSpacePtr> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) {
    space_ = terminal();
    return;
  }
  space_ = factors_.front();
  for (std::size_t i = 1; i < factors_.size(); ++i) space_ = product_space(space_, factors_[i]);
}

std::vector<NodeId> ProductChain::split_node(NodeId n) const {
  std::vector<NodeId> parts(factors_.size());
  std::size_t rest = n.index;
  for (std::size_t i = factors_.size(); i-- > 0;) {
    const std::size_t k = factors_[i]->node_count();
    parts[i] = NodeId{rest % k};
    rest /= k;
  }
  return parts;
}

NodeId ProductChain::join_nodes(const std::vector<NodeId>& parts) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    idx = idx * factors_[i]->node_count() + parts.at(i).index;
  }
  return NodeId{idx};
}

std::vector<EdgeId> ProductChain::split_edge(EdgeId e) const {
  std::vector<EdgeId> parts(factors_.size());
  std::size_t rest = e.index;
  for (std::size_t i = factors_.size(); i-- > 0;) {
    const std::size_t k = factors_[i]->edge_count();
    parts[i] = EdgeId{rest % k};
    rest /= k;
  }
  return parts;
}

EdgeId ProductChain::join_edges(const std::vector<EdgeId>& parts) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    idx = idx * factors_[i]->edge_count() + parts.at(i).index;
  }
  return EdgeId{idx};
}

std::vector<TaggedPoint> ProductChain::split(const TaggedPoint& p) const {
  if (factors_.empty()) return {};
  const auto nodes = split_node(p.node);
  std::vector<TaggedPoint> parts;
  parts.reserve(factors_.size());
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(factors_[i]->dim(nodes[i]));
    if (offset + d > p.coords.size()) throw Error("split: too few coordinates");
    parts.push_back(TaggedPoint{nodes[i], p.coords.segment(offset, d)});
    offset += d;
  }
  if (offset != p.coords.size()) throw Error("split: too many coordinates");
  return parts;
}

TaggedPoint ProductChain::join(const std::vector<TaggedPoint>& parts) const {
  if (parts.size() != factors_.size()) throw Error("join: wrong number of parts");
  if (factors_.empty()) return TaggedPoint{NodeId{0}, Vector(0)};
  std::vector<NodeId> nodes;
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    nodes.push_back(p.node);
    total += p.coords.size();
  }
  Vector coords(total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    coords.segment(offset, p.coords.size()) = p.coords;
    offset += p.coords.size();
  }
  return TaggedPoint{join_nodes(nodes), std::move(coords)};
}

// -------------------------------------------------------------------- sampling

std::vector<TaggedPoint> sample_node(const HybridPhaseSpace& hps, NodeId n, std::size_t count,
                                     std::uint64_t seed, const SampleOptions& options) {
  std::vector<TaggedPoint> out;
  for (auto& x : sample_box(hps.space(n), count, mix_seed(seed, n.index), options)) {
    out.push_back(TaggedPoint{n, std::move(x)});
  }
  return out;
}

std::vector<TaggedPoint> sample_points(const HybridPhaseSpace& hps, std::size_t count,
                                       std::uint64_t seed, const SampleOptions& options) {
  std::vector<TaggedPoint> out;
  for (std::size_t i = 0; i < hps.node_count(); ++i) {
    auto part = sample_node(hps, NodeId{i}, count, seed, options);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

std::string to_string(const HybridPhaseSpace& hps, const TaggedPoint& p) {
  std::ostringstream os;
  os.precision(10);
  os << (p.node.index < hps.node_count() ? hps.graph().node_name(p.node)
                                         : "#" + std::to_string(p.node.index))
     << ":(";
  for (Eigen::Index i = 0; i < p.coords.size(); ++i) os << (i ? ", " : "") << p.coords[i];
  os << ")";
  return os.str();
}

}  // namespace hybrid
