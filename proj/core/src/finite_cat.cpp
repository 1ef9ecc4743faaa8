#include "hybrid/finite_cat.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "hybrid/types.hpp"

namespace hybrid::finite {

namespace {

// mt19937_64 output is fully specified; distributions are not, so draw by modulo.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
  }
  FiniteMap map(std::size_t dom, std::size_t cod) {
    FiniteMap f{dom, cod, std::vector<std::size_t>(dom)};
    for (auto& v : f.table) v = below(cod);
    return f;
  }

 private:
  std::mt19937_64 gen_;
};

FiniteMap product_map(const FiniteProduct& dom, const FiniteProduct& cod,
                      const std::vector<FiniteMap>& parts) {
  FiniteMap out{dom.size(), cod.size(), std::vector<std::size_t>(dom.size())};
  for (std::size_t t = 0; t < dom.size(); ++t) {
    auto coords = dom.split(t);
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = parts[i](coords[i]);
    out.table[t] = cod.join(coords);
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------- sets and maps

std::size_t FiniteSet::index(const std::string& atom) const {
  const auto it = std::find(elements.begin(), elements.end(), atom);
  if (it == elements.end()) throw Error("atom '" + atom + "' is not in the set");
  return static_cast<std::size_t>(it - elements.begin());
}

FiniteSet FiniteSet::range(std::size_t n) {
  FiniteSet s;
  for (std::size_t i = 0; i < n; ++i) s.elements.push_back(std::to_string(i));
  return s;
}

bool FiniteMap::well_formed() const {
  return table.size() == dom &&
         std::all_of(table.begin(), table.end(), [&](std::size_t v) { return v < cod; });
}

bool FiniteMap::injective() const {
  std::vector<bool> hit(cod, false);
  for (auto v : table) {
    if (v >= cod || hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

bool FiniteMap::surjective() const {
  std::vector<bool> hit(cod, false);
  for (auto v : table) {
    if (v < cod) hit[v] = true;
  }
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

FiniteMap FiniteMap::identity(std::size_t n) {
  FiniteMap f{n, n, std::vector<std::size_t>(n)};
  std::iota(f.table.begin(), f.table.end(), 0);
  return f;
}

FiniteMap compose(const FiniteMap& g, const FiniteMap& f) {
  if (f.cod != g.dom) throw Error("finite compose: maps do not chain");
  FiniteMap out{f.dom, g.cod, std::vector<std::size_t>(f.dom)};
  for (std::size_t x = 0; x < f.dom; ++x) out.table[x] = g(f(x));
  return out;
}

FiniteMap inverse(const FiniteMap& f) {
  if (!f.bijective()) throw Error("finite inverse: map is not a bijection");
  FiniteMap out{f.cod, f.dom, std::vector<std::size_t>(f.cod)};
  for (std::size_t x = 0; x < f.dom; ++x) out.table[f(x)] = x;
  return out;
}

FiniteProduct::FiniteProduct(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  for (auto s : sizes_) size_ *= s;
}

std::size_t FiniteProduct::join(const std::vector<std::size_t>& coords) const {
  if (coords.size() != sizes_.size()) throw Error("finite product: wrong tuple length");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (coords[i] >= sizes_[i]) throw Error("finite product: coordinate out of range");
    idx = idx * sizes_[i] + coords[i];
  }
  return idx;
}

std::vector<std::size_t> FiniteProduct::split(std::size_t index) const {
  std::vector<std::size_t> out(sizes_.size());
  for (std::size_t i = sizes_.size(); i-- > 0;) {
    out[i] = index % sizes_[i];
    index /= sizes_[i];
  }
  return out;
}

FiniteMap FiniteProduct::projection(std::size_t i) const {
  FiniteMap p{size_, sizes_.at(i), std::vector<std::size_t>(size_)};
  for (std::size_t t = 0; t < size_; ++t) p.table[t] = split(t)[i];
  return p;
}

FiniteCoproduct::FiniteCoproduct(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  for (auto s : sizes_) {
    offsets_.push_back(size_);
    size_ += s;
  }
}

std::size_t FiniteCoproduct::inject(std::size_t k, std::size_t x) const {
  if (k >= sizes_.size() || x >= sizes_[k]) throw Error("finite coproduct: bad injection");
  return offsets_[k] + x;
}

FiniteMap FiniteCoproduct::injection(std::size_t k) const {
  FiniteMap i{sizes_.at(k), size_, std::vector<std::size_t>(sizes_[k])};
  for (std::size_t x = 0; x < sizes_[k]; ++x) i.table[x] = offsets_[k] + x;
  return i;
}

std::size_t FiniteCoproduct::source(std::size_t e) const {
  if (e >= size_) throw Error("finite coproduct: element out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), e);
  std::size_t k = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  // Empty summands share an offset with their successor; skip them.
  while (sizes_[k] == 0) --k;
  return k;
}

std::size_t FiniteCoproduct::value(std::size_t e) const { return e - offsets_[source(e)]; }

// --------------------------------------------------------------------- omega

OmegaTable omega(const OmegaShape& shape) {
  const auto& c = shape.c;
  const std::size_t nj = c.size();
  std::vector<std::size_t> k_sizes;
  for (const auto& row : c) k_sizes.push_back(row.size());
  const FiniteProduct tags(k_sizes);

  // Domain: coproduct over tag tuples of the product of the selected sets.
  std::vector<FiniteProduct> summands;
  std::vector<std::size_t> summand_sizes;
  for (std::size_t s = 0; s < tags.size(); ++s) {
    const auto k = tags.split(s);
    std::vector<std::size_t> sizes;
    for (std::size_t j = 0; j < nj; ++j) sizes.push_back(c[j][k[j]]);
    summands.emplace_back(sizes);
    summand_sizes.push_back(summands.back().size());
  }
  const FiniteCoproduct domain(summand_sizes);

  // Codomain: product over j of the coproduct over k.
  std::vector<FiniteCoproduct> columns;
  std::vector<std::size_t> column_sizes;
  for (std::size_t j = 0; j < nj; ++j) {
    columns.emplace_back(c[j]);
    column_sizes.push_back(columns.back().size());
  }
  const FiniteProduct codomain(column_sizes);

  OmegaTable out;
  out.domain_size = domain.size();
  out.codomain_size = codomain.size();
  out.omega = {domain.size(), codomain.size(), std::vector<std::size_t>(domain.size())};
  // On summand k: the j'-th component is the k_{j'}-th injection after the j'-th projection.
  for (std::size_t s = 0; s < tags.size(); ++s) {
    const auto k = tags.split(s);
    std::vector<FiniteMap> component;
    for (std::size_t j = 0; j < nj; ++j) {
      component.push_back(compose(columns[j].injection(k[j]), summands[s].projection(j)));
    }
    for (std::size_t e = 0; e < summands[s].size(); ++e) {
      std::vector<std::size_t> coords(nj);
      for (std::size_t j = 0; j < nj; ++j) coords[j] = component[j](e);
      out.omega.table[domain.inject(s, e)] = codomain.join(coords);
    }
  }

  out.aleph = {codomain.size(), domain.size(), std::vector<std::size_t>(codomain.size())};
  for (std::size_t p = 0; p < codomain.size(); ++p) {
    const auto parts = codomain.split(p);
    std::vector<std::size_t> k(nj);
    std::vector<std::size_t> vals(nj);
    for (std::size_t j = 0; j < nj; ++j) {
      k[j] = columns[j].source(parts[j]);
      vals[j] = columns[j].value(parts[j]);
    }
    const std::size_t s = tags.join(k);
    out.aleph.table[p] = domain.inject(s, summands[s].join(vals));
  }

  out.aleph_after_omega_is_id = compose(out.aleph, out.omega) == FiniteMap::identity(domain.size());
  out.omega_after_aleph_is_id =
      compose(out.omega, out.aleph) == FiniteMap::identity(codomain.size());
  return out;
}

OmegaShape random_omega_shape(std::uint64_t seed, std::size_t max_total) {
  Rng rng(seed);
  while (true) {
    OmegaShape s;
    const std::size_t nj = rng.between(1, 3);
    for (std::size_t j = 0; j < nj; ++j) {
      std::vector<std::size_t> row(rng.between(1, 3));
      for (auto& v : row) v = rng.between(0, 3);
      s.c.push_back(row);
    }
    std::size_t total = 1;
    for (const auto& row : s.c) total *= std::accumulate(row.begin(), row.end(), std::size_t{0});
    if (total <= max_total) return s;
  }
}

// ----------------------------------------------------------------- relations

FiniteRelation FiniteRelation::identity(std::size_t n) {
  FiniteRelation r{n, n, {}};
  for (std::size_t i = 0; i < n; ++i) r.pairs.emplace(i, i);
  return r;
}

FiniteRelation FiniteRelation::graph(const FiniteMap& f) {
  FiniteRelation r{f.dom, f.cod, {}};
  for (std::size_t x = 0; x < f.dom; ++x) r.pairs.emplace(x, f(x));
  return r;
}

bool FiniteRelation::subset_of(const FiniteRelation& other) const {
  return std::includes(other.pairs.begin(), other.pairs.end(), pairs.begin(), pairs.end());
}

FiniteRelation relation_compose(const FiniteRelation& s, const FiniteRelation& r) {
  if (r.cod != s.dom) throw Error("relation compose: relations do not chain");
  FiniteRelation out{r.dom, s.cod, {}};
  for (const auto& [x, y] : r.pairs) {
    for (auto it = s.pairs.lower_bound({y, 0}); it != s.pairs.end() && it->first == y; ++it) {
      out.pairs.emplace(x, it->second);
    }
  }
  return out;
}

// ------------------------------------------------------------- open systems

bool FiniteSSubMorphism::commutes() const {
  if (tot.dom != proj_dom.dom || tot.cod != proj_cod.dom || st.dom != proj_dom.cod ||
      st.cod != proj_cod.cod) {
    return false;
  }
  return compose(proj_cod, tot) == compose(st, proj_dom);
}

FiniteSSubMorphism compose(const FiniteSSubMorphism& g, const FiniteSSubMorphism& f) {
  return {f.proj_dom, g.proj_cod, compose(g.tot, f.tot), compose(g.st, f.st)};
}

FiniteSSubMorphism identity_morphism(const FiniteMap& proj) {
  return {proj, proj, FiniteMap::identity(proj.dom), FiniteMap::identity(proj.cod)};
}

bool related(const FiniteSSubMorphism& m, const FiniteMap& f, const FiniteMap& g) {
  return compose(m.st, f) == compose(g, m.tot);
}

FiniteMap gamma(const FiniteSSubMorphism& interconnection, const FiniteMap& g) {
  return compose(inverse(interconnection.st), compose(g, interconnection.tot));
}

std::vector<FiniteMap> all_maps(std::size_t dom, std::size_t cod) {
  std::vector<FiniteMap> out;
  if (cod == 0) {
    if (dom == 0) out.push_back({0, 0, {}});
    return out;
  }
  const FiniteProduct space(std::vector<std::size_t>(dom, cod));
  for (std::size_t i = 0; i < space.size(); ++i) out.push_back({dom, cod, space.split(i)});
  return out;
}

FiniteRelation gamma_relation(const FiniteSSubMorphism& m) {
  const auto dom_maps = all_maps(m.proj_dom.dom, m.proj_dom.cod);
  const auto cod_maps = all_maps(m.proj_cod.dom, m.proj_cod.cod);
  FiniteRelation r{dom_maps.size(), cod_maps.size(), {}};
  for (std::size_t i = 0; i < dom_maps.size(); ++i) {
    const FiniteMap pushed = compose(m.st, dom_maps[i]);
    for (std::size_t k = 0; k < cod_maps.size(); ++k) {
      if (pushed == compose(cod_maps[k], m.tot)) r.pairs.emplace(i, k);
    }
  }
  return r;
}

namespace {

std::vector<FiniteMap> injections(std::size_t dom, std::size_t cod) {
  std::vector<FiniteMap> out;
  for (auto& f : all_maps(dom, cod)) {
    if (f.injective()) out.push_back(std::move(f));
  }
  return out;
}

FiniteSSubMorphism closed_morphism(const FiniteMap& f) {
  return {FiniteMap::identity(f.dom), FiniteMap::identity(f.cod), f, f};
}

}  // namespace

bool certify(const LaxWitness& w) {
  if (!(w.a < w.b && w.b < w.c)) return false;
  if (w.f.dom != w.a || w.f.cod != w.b || w.g.dom != w.b || w.g.cod != w.c) return false;
  if (!w.f.well_formed() || !w.g.well_formed() || !w.x.well_formed() || !w.z.well_formed()) {
    return false;
  }
  if (w.x.dom != w.a || w.x.cod != w.a || w.z.dom != w.c || w.z.cod != w.c) return false;
  const FiniteSSubMorphism gf = closed_morphism(compose(w.g, w.f));
  if (!related(gf, w.x, w.z)) return false;
  const FiniteSSubMorphism f = closed_morphism(w.f);
  const FiniteSSubMorphism g = closed_morphism(w.g);
  for (const auto& y : all_maps(w.b, w.b)) {
    if (related(f, w.x, y) && related(g, y, w.z)) return false;
  }
  return true;
}

std::optional<LaxWitness> find_lax_strictness_witness(std::size_t max_size) {
  for (std::size_t c = 1; c <= max_size; ++c) {
    for (std::size_t b = 1; b < c; ++b) {
      for (std::size_t a = 1; a < b; ++a) {
        for (const auto& f : injections(a, b)) {
          for (const auto& g : injections(b, c)) {
            const auto mf = closed_morphism(f);
            const auto mg = closed_morphism(g);
            const auto mgf = closed_morphism(compose(g, f));
            const FiniteRelation lax = relation_compose(gamma_relation(mg), gamma_relation(mf));
            const FiniteRelation full = gamma_relation(mgf);
            for (const auto& pr : full.pairs) {
              if (lax.pairs.count(pr)) continue;
              LaxWitness w{a, b, c, f, g, all_maps(a, a)[pr.first], all_maps(c, c)[pr.second], false};
              w.certified = certify(w);
              return w;
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------------ networks

FiniteSSubProduct product(const std::vector<FiniteMap>& projs) {
  std::vector<std::size_t> tot;
  std::vector<std::size_t> st;
  for (const auto& p : projs) {
    tot.push_back(p.dom);
    st.push_back(p.cod);
  }
  FiniteProduct t(tot);
  FiniteProduct s(st);
  FiniteMap proj = product_map(t, s, projs);
  return {std::move(t), std::move(s), std::move(proj)};
}

FiniteMap product_dynamics(const FiniteSSubProduct& p, const std::vector<FiniteMap>& dyn) {
  return product_map(p.total, p.state, dyn);
}

FiniteSSubMorphism pi_morphism(const DiscreteInstance& inst) {
  const auto y = product(inst.y_entries);
  const auto x = product(inst.x_entries);
  FiniteSSubMorphism m{y.proj, x.proj, {y.total.size(), x.total.size(), {}},
                       {y.state.size(), x.state.size(), {}}};
  for (std::size_t t = 0; t < y.total.size(); ++t) {
    const auto parts = y.total.split(t);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < inst.x_entries.size(); ++i) {
      out.push_back(inst.components[i].tot(parts[inst.label_map[i]]));
    }
    m.tot.table.push_back(x.total.join(out));
  }
  for (std::size_t s = 0; s < y.state.size(); ++s) {
    const auto parts = y.state.split(s);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < inst.x_entries.size(); ++i) {
      out.push_back(inst.components[i].st(parts[inst.label_map[i]]));
    }
    m.st.table.push_back(x.state.join(out));
  }
  return m;
}

DiscreteInstance random_discrete_instance(std::uint64_t seed, const InstanceOptions& opts) {
  if (opts.max_state == 0 || opts.max_input == 0 || opts.max_y_labels == 0 ||
      opts.max_x_labels == 0) {
    throw Error("instance size bounds must be positive");
  }
  if (opts.inject_defect && opts.max_state < 2) throw Error("a defect needs at least two states");
  Rng rng(seed);
  DiscreteInstance inst;
  const std::size_t min_state = std::min<std::size_t>(2, opts.max_state);
  const std::size_t ny = rng.between(1, opts.max_y_labels);
  const std::size_t nx = rng.between(ny, std::max(ny, opts.max_x_labels));

  // Entries are state x input with proj = state.
  auto entry = [&](std::size_t states, std::size_t inputs) {
    FiniteMap p{states * inputs, states, {}};
    for (std::size_t t = 0; t < states * inputs; ++t) p.table.push_back(t / inputs);
    return p;
  };
  auto inputs_of = [](const FiniteMap& p) { return p.dom / p.cod; };

  for (std::size_t y = 0; y < ny; ++y) {
    inst.y_entries.push_back(entry(rng.between(min_state, opts.max_state), rng.between(1, opts.max_input)));
    inst.w.push_back(rng.map(inst.y_entries.back().dom, inst.y_entries.back().cod));
  }

  // Surjective label map: the first ny labels hit every y.
  const auto perm = rng.permutation(ny);
  for (std::size_t x = 0; x < nx; ++x) inst.label_map.push_back(x < ny ? perm[x] : rng.below(ny));

  for (std::size_t x = 0; x < nx; ++x) {
    const FiniteMap& src = inst.y_entries[inst.label_map[x]];
    const FiniteMap& w = inst.w[inst.label_map[x]];
    const std::size_t su = inputs_of(src);
    bool done = false;
    for (int attempt = 0; attempt < 50 && !done; ++attempt) {
      const bool bijective = attempt >= 25 || rng.below(2) == 0;
      const std::size_t states = bijective ? src.cod : rng.between(min_state, opts.max_state);
      const std::size_t inputs = bijective ? su : rng.between(1, opts.max_input);
      const FiniteMap dst = entry(states, inputs);
      FiniteMap st{src.cod, states, {}};
      FiniteMap tot{src.dom, dst.dom, {}};
      if (bijective) {
        st.table = rng.permutation(states);
        std::vector<std::vector<std::size_t>> in_perm;
        for (std::size_t s = 0; s < src.cod; ++s) in_perm.push_back(rng.permutation(su));
        for (std::size_t t = 0; t < src.dom; ++t) {
          tot.table.push_back(st(t / su) * inputs + in_perm[t / su][t % su]);
        }
      } else {
        st = rng.map(src.cod, states);
        for (std::size_t t = 0; t < src.dom; ++t) {
          tot.table.push_back(st(t / su) * inputs + rng.below(inputs));
        }
      }
      // v on the image of tot is forced by relatedness; elsewhere it is free.
      FiniteMap v = rng.map(dst.dom, dst.cod);
      std::vector<bool> fixed(dst.dom, false);
      bool consistent = true;
      for (std::size_t t = 0; t < src.dom && consistent; ++t) {
        const std::size_t target = st(w(t));
        if (fixed[tot(t)] && v(tot(t)) != target) consistent = false;
        v.table[tot(t)] = target;
        fixed[tot(t)] = true;
      }
      if (!consistent) continue;
      inst.x_entries.push_back(dst);
      inst.components.push_back({src, dst, tot, st});
      inst.v.push_back(v);
      done = true;
    }
    if (!done) throw Error("could not build a consistent component");
  }

  const auto py = product(inst.y_entries);
  const auto px = product(inst.x_entries);
  const auto pi = pi_morphism(inst);

  // Bound Y: state in bijection with the product state, plus a free input.
  const std::size_t sy = py.state.size();
  const std::size_t vy = rng.between(1, 2);
  const FiniteMap bound_y = entry(sy, vy);
  FiniteMap iy_st{sy, sy, rng.permutation(sy)};
  FiniteMap iy_tot{bound_y.dom, py.total.size(), {}};
  for (std::size_t t = 0; t < bound_y.dom; ++t) {
    const auto states = py.state.split(iy_st(t / vy));
    std::vector<std::size_t> parts;
    for (std::size_t y = 0; y < ny; ++y) {
      const std::size_t u = inputs_of(inst.y_entries[y]);
      parts.push_back(states[y] * u + rng.below(u));
    }
    iy_tot.table.push_back(py.total.join(parts));
  }
  inst.iota_y = {bound_y, py.proj, iy_tot, iy_st};

  // Bound X: state in bijection with the product state; the input slot
  // remembers a bound-Y total point so that z is injective on totals.
  const std::size_t sx = px.state.size();
  const std::size_t vx = bound_y.dom;
  const FiniteMap bound_x = entry(sx, vx);
  FiniteMap ix_st{sx, sx, rng.permutation(sx)};
  const FiniteMap z_st = compose(inverse(ix_st), compose(pi.st, iy_st));
  FiniteMap z_tot{bound_y.dom, bound_x.dom, {}};
  for (std::size_t t = 0; t < bound_y.dom; ++t) z_tot.table.push_back(z_st(t / vy) * vx + t);
  inst.z = {bound_y, bound_x, z_tot, z_st};

  FiniteMap ix_tot{bound_x.dom, px.total.size(), {}};
  for (std::size_t r = 0; r < bound_x.dom; ++r) {
    const std::size_t s = r / vx;
    const std::size_t t = r % vx;
    if (z_st(t / vy) == s) {
      ix_tot.table.push_back(pi.tot(iy_tot(t)));
      continue;
    }
    const auto states = px.state.split(ix_st(s));
    std::vector<std::size_t> parts;
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t u = inputs_of(inst.x_entries[x]);
      parts.push_back(states[x] * u + rng.below(u));
    }
    ix_tot.table.push_back(px.total.join(parts));
  }
  inst.iota_x = {bound_x, px.proj, ix_tot, ix_st};

  if (opts.inject_defect) {
    const std::size_t x = rng.below(nx);
    auto& v = inst.v[x];
    const std::size_t t = inst.components[x].tot(rng.below(inst.components[x].tot.dom));
    v.table[t] = (v.table[t] + 1 + rng.below(v.cod - 1)) % v.cod;
  }
  return inst;
}

DiscreteVerdict discrete_network_theorem(const DiscreteInstance& inst) {
  DiscreteVerdict out;
  auto fail = [&](std::string why) {
    out.structure_issue = std::move(why);
    return out;
  };
  const std::size_t nx = inst.x_entries.size();
  if (inst.label_map.size() != nx || inst.components.size() != nx || inst.v.size() != nx ||
      inst.w.size() != inst.y_entries.size()) {
    return fail("label map, components or controls have the wrong length");
  }
  for (std::size_t x = 0; x < nx; ++x) {
    const auto& c = inst.components[x];
    if (inst.label_map[x] >= inst.y_entries.size()) return fail("label map leaves the Y list");
    if (!(c.proj_dom == inst.y_entries[inst.label_map[x]]) || !(c.proj_cod == inst.x_entries[x])) {
      return fail("component " + std::to_string(x) + " has the wrong endpoints");
    }
    if (!c.commutes()) return fail("component " + std::to_string(x) + " does not commute");
  }
  const auto py = product(inst.y_entries);
  const auto px = product(inst.x_entries);
  if (!(inst.iota_y.proj_cod == py.proj) || !(inst.iota_x.proj_cod == px.proj)) {
    return fail("an interconnection does not land in its list product");
  }
  if (!inst.iota_y.commutes() || !inst.iota_x.commutes() || !inst.z.commutes()) {
    return fail("an interconnection or the bound map does not commute");
  }
  if (!inst.iota_y.st.bijective() || !inst.iota_x.st.bijective()) {
    return fail("an interconnection state map is not a bijection");
  }
  if (!(inst.z.proj_dom == inst.iota_y.proj_dom) || !(inst.z.proj_cod == inst.iota_x.proj_dom)) {
    return fail("bound map has the wrong endpoints");
  }
  const auto pi = pi_morphism(inst);
  if (!(compose(inst.iota_x.tot, inst.z.tot) == compose(pi.tot, inst.iota_y.tot)) ||
      !(compose(inst.iota_x.st, inst.z.st) == compose(pi.st, inst.iota_y.st))) {
    return fail("network compatibility square does not commute");
  }
  out.structure_ok = true;

  out.hypothesis_holds = true;
  for (std::size_t x = 0; x < nx; ++x) {
    if (!related(inst.components[x], inst.w[inst.label_map[x]], inst.v[x])) {
      out.hypothesis_holds = false;
      out.failing_components.push_back(x);
    }
  }
  if (!out.hypothesis_holds) return out;

  const FiniteMap big_w = gamma(inst.iota_y, product_dynamics(py, inst.w));
  const FiniteMap big_v = gamma(inst.iota_x, product_dynamics(px, inst.v));
  out.checked_points = inst.z.tot.dom;
  out.conclusion_holds = related(inst.z, big_w, big_v);
  return out;
}

}  // namespace hybrid::finite
