#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hybrid::finite {

/// Ordered set of opaque atoms, identified by position.
struct FiniteSet {
  std::vector<std::string> elements;

  std::size_t size() const { return elements.size(); }
  /// Position of an atom; throws hybrid::Error when absent.
  std::size_t index(const std::string& atom) const;
  /// {"0", ..., "n-1"}.
  static FiniteSet range(std::size_t n);
};

/// Total function between {0..dom-1} and {0..cod-1}, as a table.
struct FiniteMap {
  std::size_t dom = 0;
  std::size_t cod = 0;
  std::vector<std::size_t> table;

  std::size_t operator()(std::size_t x) const { return table.at(x); }
  bool well_formed() const;
  bool injective() const;
  bool surjective() const;
  bool bijective() const { return injective() && surjective(); }
  friend bool operator==(const FiniteMap&, const FiniteMap&) = default;

  static FiniteMap identity(std::size_t n);
};

/// g after f.
FiniteMap compose(const FiniteMap& g, const FiniteMap& f);
/// Inverse of a bijection; throws otherwise.
FiniteMap inverse(const FiniteMap& f);

/// Cartesian product with mixed-radix (first factor most significant) indexing.
class FiniteProduct {
 public:
  explicit FiniteProduct(std::vector<std::size_t> sizes);
  std::size_t size() const { return size_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t join(const std::vector<std::size_t>& coords) const;
  std::vector<std::size_t> split(std::size_t index) const;
  FiniteMap projection(std::size_t i) const;

 private:
  std::vector<std::size_t> sizes_;
  std::size_t size_ = 1;
};

/// Disjoint union: summand k occupies a contiguous block.
class FiniteCoproduct {
 public:
  explicit FiniteCoproduct(std::vector<std::size_t> sizes);
  std::size_t size() const { return size_; }
  std::size_t summands() const { return sizes_.size(); }
  std::size_t inject(std::size_t k, std::size_t x) const;
  FiniteMap injection(std::size_t k) const;
  /// Tag of an element: the k with e in the image of injection k.
  std::size_t source(std::size_t e) const;
  std::size_t value(std::size_t e) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
};

/// Shape of the comparison between a coproduct of products and a product of coproducts:
/// C[j][k] is the size of C(j, k) for j in J and k in K_j.
struct OmegaShape {
  std::vector<std::vector<std::size_t>> c;
};

struct OmegaTable {
  /// Coproduct over (k_j) in prod_j K_j of prod_j C(j, k_j).
  std::size_t domain_size = 0;
  /// Product over j of the coproduct over k of C(j, k).
  std::size_t codomain_size = 0;
  FiniteMap omega;
  FiniteMap aleph;
  /// Exhaustive round-trip verdicts.
  bool aleph_after_omega_is_id = false;
  bool omega_after_aleph_is_id = false;
  bool bijective() const { return aleph_after_omega_is_id && omega_after_aleph_is_id; }
};

/// Builds omega from injection-after-projection composites, its candidate
/// inverse aleph from tag extraction, and checks both round trips exhaustively.
OmegaTable omega(const OmegaShape& shape);

/// |J| in [1, 3], |K_j| in [1, 3], |C(j,k)| in [0, 3], rejecting shapes whose
/// codomain exceeds `max_total`.
OmegaShape random_omega_shape(std::uint64_t seed, std::size_t max_total = 200);

/// Relation between {0..dom-1} and {0..cod-1}.
struct FiniteRelation {
  std::size_t dom = 0;
  std::size_t cod = 0;
  std::set<std::pair<std::size_t, std::size_t>> pairs;

  static FiniteRelation identity(std::size_t n);
  static FiniteRelation graph(const FiniteMap& f);
  bool subset_of(const FiniteRelation& other) const;
  friend bool operator==(const FiniteRelation&, const FiniteRelation&) = default;
};

/// S after R: pairs (x, z) with some y such that (x, y) in R and (y, z) in S.
FiniteRelation relation_compose(const FiniteRelation& s, const FiniteRelation& r);

/// Discrete-time open system: substrate proj: total -> state and dynamics total -> state.
struct FiniteOpenSystem {
  FiniteMap proj;
  FiniteMap dynamics;
};

/// Morphism of substrates: proj' . tot = st . proj.
struct FiniteSSubMorphism {
  FiniteMap proj_dom;
  FiniteMap proj_cod;
  FiniteMap tot;
  FiniteMap st;

  bool commutes() const;
};

FiniteSSubMorphism compose(const FiniteSSubMorphism& g, const FiniteSSubMorphism& f);
FiniteSSubMorphism identity_morphism(const FiniteMap& proj);

/// st . f == g . tot.
bool related(const FiniteSSubMorphism& m, const FiniteMap& f, const FiniteMap& g);

/// Pullback of dynamics along an interconnection: st^-1 . g . tot.
FiniteMap gamma(const FiniteSSubMorphism& interconnection, const FiniteMap& g);

/// All dynamics total -> state compatible with nothing but their sizes.
std::vector<FiniteMap> all_maps(std::size_t dom, std::size_t cod);

/// Related pairs (f, g) for m, as indices into all_maps of the two substrates.
FiniteRelation gamma_relation(const FiniteSSubMorphism& m);

struct LaxWitness {
  /// Inclusion sizes |A| < |B| < |C| of the closed systems.
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
  FiniteMap f;  // A -> B
  FiniteMap g;  // B -> C
  FiniteMap x;  // dynamics on A
  FiniteMap z;  // dynamics on C
  /// Re-verified: (x, z) related under g.f, and no y on B is related to both.
  bool certified = false;
};

/// Searches closed systems on sets of size <= max_size and injective maps
/// between them for a pair related under g.f with no interpolating dynamics.
std::optional<LaxWitness> find_lax_strictness_witness(std::size_t max_size = 3);

/// Re-checks a witness from scratch by enumeration.
bool certify(const LaxWitness& w);

/// Product of finite substrates with mixed-radix tuples.
struct FiniteSSubProduct {
  FiniteProduct total;
  FiniteProduct state;
  FiniteMap proj;
};

FiniteSSubProduct product(const std::vector<FiniteMap>& projs);
FiniteMap product_dynamics(const FiniteSSubProduct& p, const std::vector<FiniteMap>& dyn);

/// Discrete network theorem instance: Y-entries, X-entries, list morphism,
/// two networks, bound map z, and controls w (on Y) and v (on X).
struct DiscreteInstance {
  std::vector<FiniteMap> y_entries;
  std::vector<FiniteMap> x_entries;
  std::vector<std::size_t> label_map;
  /// Component x runs from y_entries[label_map[x]] to x_entries[x].
  std::vector<FiniteSSubMorphism> components;
  FiniteSSubMorphism iota_y;  // bound_Y -> product of Y entries
  FiniteSSubMorphism iota_x;  // bound_X -> product of X entries
  FiniteSSubMorphism z;       // bound_Y -> bound_X
  std::vector<FiniteMap> w;
  std::vector<FiniteMap> v;
};

struct InstanceOptions {
  std::size_t max_state = 3;
  std::size_t max_input = 2;
  std::size_t max_y_labels = 2;
  std::size_t max_x_labels = 3;
  /// Break one component relation after construction.
  bool inject_defect = false;
};

DiscreteInstance random_discrete_instance(std::uint64_t seed, const InstanceOptions& opts = {});

struct DiscreteVerdict {
  bool structure_ok = false;
  std::string structure_issue;
  bool hypothesis_holds = false;
  std::vector<std::size_t> failing_components;
  /// Set only when the hypothesis holds.
  std::optional<bool> conclusion_holds;
  std::size_t checked_points = 0;
};

/// Exact evaluation of the network theorem on one instance.
DiscreteVerdict discrete_network_theorem(const DiscreteInstance& inst);

/// The list-product map Pi(phi, Phi): product of Y totals -> product of X totals (and states).
FiniteSSubMorphism pi_morphism(const DiscreteInstance& inst);

}  // namespace hybrid::finite
