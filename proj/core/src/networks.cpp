#include "hybrid/networks.hpp"

#include <algorithm>
#include <cmath>

namespace hybrid {

namespace {

bool close(const TaggedPoint& a, const TaggedPoint& b, double tol) {
  if (a.node != b.node || a.coords.size() != b.coords.size()) return false;
  return a.coords.size() == 0 || (a.coords - b.coords).cwiseAbs().maxCoeff() <= tol;
}

bool same_ssub(const HybridSSub& a, const HybridSSub& b) {
  return same_structure(*a.total, *b.total) && same_structure(*a.state, *b.state);
}

}  // namespace

std::size_t SystemList::index(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error("unknown list label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

void SystemList::add(std::string label, HybridSSub entry) {
  if (std::find(labels.begin(), labels.end(), label) != labels.end()) {
    throw Error("duplicate list label '" + label + "'");
  }
  labels.push_back(std::move(label));
  entries.push_back(std::move(entry));
}

ValidationReport validate(const ListMorphism& lm) {
  ValidationReport r;
  const std::size_t nx = lm.source.size();
  if (lm.label_map.size() != nx || lm.components.size() != nx) {
    r.add("list morphism needs one label image and one component per source label");
    return r;
  }
  for (std::size_t x = 0; x < nx; ++x) {
    const std::string& label = lm.source.labels[x];
    const std::size_t y = lm.label_map[x];
    if (y >= lm.target.size()) {
      r.add("label '" + label + "' maps outside the target list");
      continue;
    }
    const auto& c = lm.components[x];
    if (!same_ssub(c.domain, lm.target.entries[y])) {
      r.add("component for '" + label + "' does not start at entry '" + lm.target.labels[y] + "'");
    }
    if (!same_ssub(c.codomain, lm.source.entries[x])) {
      r.add("component for '" + label + "' does not end at entry '" + label + "'");
    }
  }
  return r;
}

SSubProduct pi_product(const SystemList& list) { return product_ssub(list.entries); }

SSubMorphism pi_morphism(const ListMorphism& lm) {
  const auto report = validate(lm);
  if (!report.ok()) throw Error("invalid list morphism: " + report.violations.front());
  const SSubProduct dom = pi_product(lm.target);
  const SSubProduct cod = pi_product(lm.source);
  std::vector<PhaseSpaceMorphism> tots;
  std::vector<PhaseSpaceMorphism> sts;
  for (std::size_t x = 0; x < lm.source.size(); ++x) {
    const std::size_t y = lm.label_map[x];
    tots.push_back(compose(lm.components[x].f_tot, PhaseSpaceMorphism::projection(dom.total, y)));
    sts.push_back(compose(lm.components[x].f_st, PhaseSpaceMorphism::projection(dom.state, y)));
  }
  return {dom.ssub, cod.ssub, PhaseSpaceMorphism::pairing(dom.total.space(), cod.total, tots),
          PhaseSpaceMorphism::pairing(dom.state.space(), cod.state, sts), std::nullopt};
}

Network make_network(SystemList list, SSubMorphism iota, const CheckOptions& opts) {
  const SSubProduct prod = pi_product(list);
  if (!same_ssub(iota.codomain, prod.ssub)) {
    throw Error("interconnection does not land in the product of the list");
  }
  HybridSSub bound = iota.domain;
  return {std::move(list), std::move(bound), Interconnection::verify(std::move(iota), opts)};
}

ValidationReport check_network_morphism(const NetworkMorphism& nm, const CheckOptions& opts) {
  ValidationReport r = validate(nm.lm);
  if (!r.ok()) return r;
  for (std::size_t x = 0; x < nm.lm.components.size(); ++x) {
    r.merge(check_ssub_morphism(nm.lm.components[x], opts),
            "component '" + nm.lm.source.labels[x] + "': ");
  }
  if (!same_ssub(nm.z.domain, nm.target.bound) || !same_ssub(nm.z.codomain, nm.source.bound)) {
    r.add("bound map does not run from the target bound to the source bound");
    return r;
  }
  r.merge(check_ssub_morphism(nm.z, opts), "bound map: ");

  const SSubMorphism pi = pi_morphism(nm.lm);
  const auto& iota_x = nm.source.iota.morphism();
  const auto& iota_y = nm.target.iota.morphism();
  auto square = [&](const PhaseSpaceMorphism& ix, const PhaseSpaceMorphism& z,
                    const PhaseSpaceMorphism& p, const PhaseSpaceMorphism& iy,
                    const std::string& which) {
    for (const auto& q : sample_points(*z.domain(), opts.samples, mix_seed(opts.seed, 31))) {
      try {
        const TaggedPoint lhs = apply(ix, apply(z, q, opts.tol), opts.tol);
        const TaggedPoint rhs = apply(p, apply(iy, q, opts.tol), opts.tol);
        if (!close(lhs, rhs, opts.tol)) {
          r.add(which + " compatibility square fails at " + to_string(*z.domain(), q) + ": " +
                to_string(*ix.codomain(), lhs) + " vs " + to_string(*ix.codomain(), rhs));
          return;
        }
      } catch (const Error& e) {
        r.add(which + " compatibility square could not be evaluated: " + e.what());
        return;
      }
    }
  };
  square(iota_x.f_tot, nm.z.f_tot, pi.f_tot, iota_y.f_tot, "total");
  square(iota_x.f_st, nm.z.f_st, pi.f_st, iota_y.f_st, "state");
  return r;
}

std::pair<DeterministicControl, DeterministicControl> interconnected_pair(
    const NetworkMorphism& nm, const std::vector<DeterministicControl>& w,
    const std::vector<DeterministicControl>& v) {
  if (w.size() != nm.lm.target.size() || v.size() != nm.lm.source.size()) {
    throw Error("need one control per list label");
  }
  return {interconnect_control(nm.target.iota, product_control(w)),
          interconnect_control(nm.source.iota, product_control(v))};
}

TheoremReport verify_main_theorem(const NetworkMorphism& nm, const std::vector<DeterministicControl>& w,
                                  const std::vector<DeterministicControl>& v,
                                  const CheckOptions& opts) {
  if (w.size() != nm.lm.target.size() || v.size() != nm.lm.source.size()) {
    throw Error("need one control per list label");
  }
  auto require_valid = [&](const DeterministicControl& c, const std::string& label) {
    const auto rep = check_control(c, opts);
    if (!rep.ok()) throw Error("control for '" + label + "' is invalid: " + rep.violations.front());
  };
  for (std::size_t y = 0; y < w.size(); ++y) require_valid(w[y], nm.lm.target.labels[y]);
  for (std::size_t x = 0; x < v.size(); ++x) require_valid(v[x], nm.lm.source.labels[x]);

  TheoremReport rep;
  rep.labels = nm.lm.source.labels;
  rep.hypothesis_holds = true;
  for (std::size_t x = 0; x < v.size(); ++x) {
    rep.hypothesis.push_back(
        check_relatedness(nm.lm.components[x], w[nm.lm.label_map[x]], v[x], opts));
    rep.hypothesis_holds = rep.hypothesis_holds && rep.hypothesis.back().pass();
  }

  const SSubMorphism pi = pi_morphism(nm.lm);
  const DeterministicControl pw = product_control(w);
  const DeterministicControl pv = product_control(v);
  std::vector<TaggedPoint> images;
  const auto& iota_y = nm.target.iota.morphism().f_tot;
  for (const auto& q : sample_points(*nm.target.bound.total, opts.samples, opts.seed)) {
    images.push_back(apply(iota_y, q, opts.tol));
  }
  rep.product_stage = check_relatedness(pi, pw, pv, images, opts.tol);

  if (rep.hypothesis_holds) {
    const auto [big_w, big_v] = interconnected_pair(nm, w, v);
    rep.conclusion = check_relatedness(nm.z, big_w, big_v, opts);
  }
  return rep;
}

InvarianceResult invariance_demo(const NetworkMorphism& nm, const std::vector<DeterministicControl>& w,
                                 const std::vector<DeterministicControl>& v, const TaggedPoint& x0,
                                 const IntegratorOptions& opts, double jump_guard) {
  const auto [big_w, big_v] = interconnected_pair(nm, w, v);
  if (!big_w.closed() || !big_v.closed()) throw Error("invariance demo needs closed bound systems");
  InvarianceResult res;
  res.w_run = execute(big_w, x0, opts);
  res.v_run = execute(big_v, apply(nm.z.f_st, x0), opts);
  res.pushed = pushforward_execution(nm.z.f_st, res.w_run);
  res.switches = res.v_run.jumps.size();

  std::vector<double> jump_times;
  for (const auto* ex : {&res.v_run, &res.pushed}) {
    for (const auto& j : ex->jumps) jump_times.push_back(j.t);
  }
  auto near_jump = [&](double t) {
    return std::any_of(jump_times.begin(), jump_times.end(),
                       [&](double s) { return std::abs(s - t) <= jump_guard; });
  };
  auto compare = [&](const Execution& a, const Execution& b) {
    for (const auto& arc : a.arcs) {
      for (const auto& s : arc.samples) {
        if (near_jump(s.t)) continue;
        const TaggedPoint other = state_at(b, s.t);
        if (other.node != arc.node) {
          ++res.node_mismatches;
          continue;
        }
        res.sup_deviation = std::max(res.sup_deviation, max_abs(other.coords - s.coords));
      }
    }
  };
  compare(res.v_run, res.pushed);
  compare(res.pushed, res.v_run);
  return res;
}

}  // namespace hybrid
