#include "hybrid/systems.hpp"

#include <algorithm>
#include <cmath>

namespace hybrid {

namespace {

const std::vector<EventFunction> kNoEvents;

bool same_point(const TaggedPoint& a, const TaggedPoint& b, double tol) {
  if (a.node != b.node || a.coords.size() != b.coords.size()) return false;
  return a.coords.size() == 0 || (a.coords - b.coords).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

const std::vector<EventFunction>& DeterministicControl::events_at(NodeId n) const {
  return n.index < events.size() ? events[n.index] : kNoEvents;
}

bool DeterministicControl::closed() const {
  if (!same_structure(*ssub.total, *ssub.state)) return false;
  for (std::size_t n = 0; n < ssub.total->node_count(); ++n) {
    if (ssub.proj.map_node(NodeId{n}) != NodeId{n}) return false;
  }
  return true;
}

DeterministicControl closed_control(const PhaseSpacePtr& hps, VectorField x, JumpMap rho,
                                    std::vector<std::vector<EventFunction>> events) {
  return {HybridSSub::identity(hps), std::move(x), std::move(rho), std::move(events)};
}

ValidationReport check_control(const DeterministicControl& c, const CheckOptions& opts) {
  return check_control(c, sample_points(*c.ssub.total, opts.samples, opts.seed), opts.tol);
}

ValidationReport check_control(const DeterministicControl& c, const std::vector<TaggedPoint>& points,
                               double tol) {
  ValidationReport r;
  const auto& tot = *c.ssub.total;
  const auto& st = *c.ssub.state;
  if (!c.vector_field || !c.jump_map) {
    r.add("control is missing a vector field or a jump map");
    return r;
  }
  if (!c.events.empty() && c.events.size() != tot.node_count()) {
    r.add("event table has " + std::to_string(c.events.size()) + " entries for " +
          std::to_string(tot.node_count()) + " total nodes");
  }
  for (const auto& p : points) {
    const std::string where = to_string(tot, p);
    try {
      const TaggedPoint base = apply(c.ssub.proj, p, tol);
      const Vector v = c.vector_field(p);
      if (static_cast<std::size_t>(v.size()) != st.dim(base.node)) {
        r.add("vector field at " + where + " has dimension " + std::to_string(v.size()) +
              ", state node '" + st.graph().node_name(base.node) + "' has " +
              std::to_string(st.dim(base.node)));
        continue;
      }
      if (!v.allFinite()) r.add("vector field at " + where + " is not finite");

      const TaggedPoint j = c.jump_map(p);
      if (j.node.index >= st.node_count() ||
          static_cast<std::size_t>(j.coords.size()) != st.dim(j.node)) {
        r.add("jump at " + where + " lands on a malformed state point");
        continue;
      }
      if (!contains(st, j, tol)) {
        r.add("jump at " + where + " leaves the state space: " + to_string(st, j));
        continue;
      }
      if (!lambda_lookup(st, base, j, tol)) {
        r.add("jump " + to_string(st, base) + " -> " + to_string(st, j) + " (from " + where +
              ") is not related by any edge");
      }
      const auto& evs = c.events_at(p.node);
      if (!evs.empty() && !same_point(j, base, tol)) {
        const bool armed = std::any_of(evs.begin(), evs.end(),
                                       [&](const EventFunction& e) { return e(p.coords) <= tol; });
        if (!armed) r.add("nontrivial jump at " + where + " where no event function is <= 0");
      }
    } catch (const Error& e) {
      r.add("evaluation at " + where + " failed: " + e.what());
    }
  }
  return r;
}

RelatednessReport check_relatedness(const SSubMorphism& f, const DeterministicControl& c,
                                    const DeterministicControl& d, const CheckOptions& opts) {
  return check_relatedness(f, c, d, sample_points(*c.ssub.total, opts.samples, opts.seed),
                           opts.tol);
}

RelatednessReport check_relatedness(const SSubMorphism& f, const DeterministicControl& c,
                                    const DeterministicControl& d,
                                    const std::vector<TaggedPoint>& points, double tol) {
  RelatednessReport rep;
  rep.tol = tol;
  const auto& tot = *c.ssub.total;
  for (const auto& p : points) {
    ++rep.samples;
    const std::string where = to_string(tot, p);
    try {
      const TaggedPoint base = apply(c.ssub.proj, p, 1e-9);
      const TaggedPoint q = apply(f.f_tot, p, 1e-9);

      const Matrix jac = differential(f.f_st, base).jacobian;
      const Vector lhs = jac * c.vector_field(p);
      const Vector rhs = d.vector_field(q);
      double vf = 0.0;
      if (lhs.size() != rhs.size()) {
        vf = 1.0;
        rep.witnesses.push_back("vector field dimensions differ at " + where);
      } else {
        vf = max_abs(lhs - rhs);
      }
      if (vf > tol && rep.max_vf_residual <= tol) {
        rep.witnesses.push_back("vector fields differ by " + std::to_string(vf) + " at " + where);
      }
      rep.max_vf_residual = std::max(rep.max_vf_residual, vf);

      const TaggedPoint a = apply(f.f_st, c.jump_map(p), 1e-9);
      const TaggedPoint b = d.jump_map(q);
      if (a.node != b.node || a.coords.size() != b.coords.size()) {
        if (rep.node_mismatches == 0) {
          rep.witnesses.push_back("jumps land on different nodes at " + where + ": " +
                                  to_string(*f.codomain.state, a) + " vs " +
                                  to_string(*f.codomain.state, b));
        }
        ++rep.node_mismatches;
        continue;
      }
      const double jm = max_abs(a.coords - b.coords);
      if (jm > tol && rep.max_jump_mismatch <= tol) {
        rep.witnesses.push_back("jumps differ by " + std::to_string(jm) + " at " + where);
      }
      rep.max_jump_mismatch = std::max(rep.max_jump_mismatch, jm);
    } catch (const Error& e) {
      ++rep.node_mismatches;
      rep.witnesses.push_back("evaluation at " + where + " failed: " + e.what());
    }
  }
  return rep;
}

DeterministicControl interconnect_control(const Interconnection& i, const DeterministicControl& d) {
  const SSubMorphism& f = i.morphism();
  if (!same_structure(*f.codomain.total, *d.ssub.total) ||
      !same_structure(*f.codomain.state, *d.ssub.state)) {
    throw Error("interconnect_control: control does not live on the interconnection's codomain");
  }
  const PhaseSpaceMorphism f_tot = f.f_tot;
  const PhaseSpaceMorphism f_st = f.f_st;
  const PhaseSpaceMorphism inv = i.st_inverse();
  const PhaseSpaceMorphism proj = f.domain.proj;

  VectorField x = [d, f_tot, f_st, inv, proj](const TaggedPoint& p) {
    const TaggedPoint image = apply(f_st, apply(proj, p, 1e-9), 1e-9);
    const Matrix jinv = differential(inv, image).jacobian;
    return Vector(jinv * d.vector_field(apply(f_tot, p, 1e-9)));
  };
  JumpMap rho = [d, f_tot, inv](const TaggedPoint& p) {
    return apply(inv, d.jump_map(apply(f_tot, p, 1e-9)), 1e-9);
  };

  const auto& tot = *f.domain.total;
  std::vector<std::vector<EventFunction>> events(tot.node_count());
  for (std::size_t n = 0; n < tot.node_count(); ++n) {
    const NodeId target = f_tot.map_node(NodeId{n});
    const SmoothMap m = f_tot.map(NodeId{n});
    for (const auto& ev : d.events_at(target)) {
      events[n].push_back([ev, m](const Vector& x) { return ev(m.evaluate(x)); });
    }
  }
  return {f.domain, std::move(x), std::move(rho), std::move(events)};
}

DeterministicControl product_control(const std::vector<DeterministicControl>& parts) {
  std::vector<HybridSSub> ssubs;
  for (const auto& p : parts) ssubs.push_back(p.ssub);
  SSubProduct prod = product_ssub(ssubs);
  const ProductChain tot = prod.total;
  const ProductChain st = prod.state;

  VectorField x = [parts, tot](const TaggedPoint& z) {
    const auto pieces = tot.split(z);
    std::vector<Vector> vs;
    Eigen::Index n = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      vs.push_back(parts[i].vector_field(pieces[i]));
      n += vs.back().size();
    }
    Vector out(n);
    Eigen::Index off = 0;
    for (const auto& v : vs) {
      out.segment(off, v.size()) = v;
      off += v.size();
    }
    return out;
  };
  JumpMap rho = [parts, tot, st](const TaggedPoint& z) {
    const auto pieces = tot.split(z);
    std::vector<TaggedPoint> jumps;
    for (std::size_t i = 0; i < parts.size(); ++i) jumps.push_back(parts[i].jump_map(pieces[i]));
    return st.join(jumps);
  };

  const auto& space = *tot.space();
  std::vector<std::vector<EventFunction>> events(space.node_count());
  for (std::size_t n = 0; n < space.node_count(); ++n) {
    const auto nodes = tot.split_node(NodeId{n});
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto dim = static_cast<Eigen::Index>(tot.factors()[i]->dim(nodes[i]));
      for (const auto& ev : parts[i].events_at(nodes[i])) {
        events[n].push_back(
            [ev, offset, dim](const Vector& z) { return ev(z.segment(offset, dim)); });
      }
      offset += dim;
    }
  }
  return {prod.ssub, std::move(x), std::move(rho), std::move(events)};
}

IdempotencyReport check_idempotent(const DeterministicControl& c, const CheckOptions& opts) {
  return check_idempotent(c, sample_points(*c.ssub.total, opts.samples, opts.seed), opts.tol);
}

IdempotencyReport check_idempotent(const DeterministicControl& c,
                                   const std::vector<TaggedPoint>& points, double tol) {
  if (!c.closed()) throw Error("idempotency is only defined for closed systems");
  IdempotencyReport rep;
  const auto& hps = *c.ssub.state;
  for (const auto& p : points) {
    ++rep.samples;
    const TaggedPoint once = c.jump_map(p);
    const TaggedPoint twice = c.jump_map(once);
    if (!same_point(once, twice, tol)) {
      rep.witnesses.push_back("rho(" + to_string(hps, p) + ") = " + to_string(hps, once) +
                              " but rho of that is " + to_string(hps, twice));
    }
  }
  return rep;
}

}  // namespace hybrid
