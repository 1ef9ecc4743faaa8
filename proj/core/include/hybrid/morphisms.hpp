#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hybrid/phase_space.hpp"

namespace hybrid {

/// Smooth map between coordinate spaces of one node and its image node.
struct SmoothMap {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<Vector(const Vector&)> evaluate;
  /// Analytic Jacobian (out_dim x in_dim). Finite differences are used when empty.
  std::function<Matrix(const Vector&)> jacobian;
  double fd_step = 1e-5;

  Vector operator()(const Vector& x) const { return evaluate(x); }

  static SmoothMap identity(std::size_t dim);
  /// x -> A x + b, with analytic Jacobian A.
  static SmoothMap affine(Matrix a, Vector b);
  /// Picks coordinates `indices` of an `in_dim` vector.
  static SmoothMap select(std::size_t in_dim, std::vector<std::size_t> indices);
  static SmoothMap constant(std::size_t in_dim, Vector value);
};

/// g after f; Jacobians chain when both are analytic.
SmoothMap compose(const SmoothMap& g, const SmoothMap& f);

/// Functor between source graphs, as lookup tables.
struct NodeMap {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;
};

/// Morphism of hybrid phase spaces: node functor plus one smooth map per node.
class PhaseSpaceMorphism {
 public:
  PhaseSpaceMorphism(PhaseSpacePtr domain, PhaseSpacePtr codomain, NodeMap nodes,
                     std::vector<SmoothMap> maps);

  static PhaseSpaceMorphism identity(const PhaseSpacePtr& hps);
  /// The i-th projection out of an iterated product.
  static PhaseSpaceMorphism projection(const ProductChain& chain, std::size_t i);
  /// The unique map into `codomain` whose i-th projection is `components[i]`.
  static PhaseSpaceMorphism pairing(const PhaseSpacePtr& domain, const ProductChain& codomain,
                                    const std::vector<PhaseSpaceMorphism>& components);
  /// Componentwise map between two iterated products.
  static PhaseSpaceMorphism product(const ProductChain& domain, const ProductChain& codomain,
                                    const std::vector<PhaseSpaceMorphism>& factors);

  const PhaseSpacePtr& domain() const { return domain_; }
  const PhaseSpacePtr& codomain() const { return codomain_; }
  const NodeMap& node_map() const { return nodes_; }
  NodeId map_node(NodeId n) const { return nodes_.nodes.at(n.index); }
  EdgeId map_edge(EdgeId e) const { return nodes_.edges.at(e.index); }
  const SmoothMap& map(NodeId n) const { return maps_.at(n.index); }

 private:
  PhaseSpacePtr domain_;
  PhaseSpacePtr codomain_;
  NodeMap nodes_;
  std::vector<SmoothMap> maps_;
};

/// Table and dimension consistency of a morphism (src/tgt and unit preservation).
ValidationReport validate(const PhaseSpaceMorphism& f);

/// Underlying map. Throws Error naming the offending coordinate when `p`
/// (or its image) lies outside the box by more than `tol`.
TaggedPoint apply(const PhaseSpaceMorphism& f, const TaggedPoint& p, double tol = 1e-9);

struct Differential {
  Matrix jacobian;
  bool analytic = false;
  /// Set when a central difference would have left the box.
  bool one_sided = false;
};

Differential differential(const PhaseSpaceMorphism& f, const TaggedPoint& p);
Differential differential(const SmoothMap& m, const BoxSpace& box, const Vector& x);

/// g after f. Throws if codomain(f) and domain(g) differ structurally.
PhaseSpaceMorphism compose(const PhaseSpaceMorphism& g, const PhaseSpaceMorphism& f);

struct CheckOptions {
  std::size_t samples = 64;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

struct MorphismReport {
  std::size_t checked_pairs = 0;
  std::vector<std::string> failures;
  /// Predicate relations without a sampler; reported, not failed.
  std::vector<std::string> unsampleable;
  bool pass() const { return failures.empty(); }
};

/// Samples every domain relation and checks the image pairs lie in the
/// image edge's relation; also checks box containment of node images.
MorphismReport check_morphism(const PhaseSpaceMorphism& f, const CheckOptions& opts = {});

/// Open-system substrate: a morphism total -> state.
struct HybridSSub {
  PhaseSpacePtr total;
  PhaseSpacePtr state;
  PhaseSpaceMorphism proj;
  bool asserted_surjective = true;

  explicit HybridSSub(PhaseSpaceMorphism p, bool surjective = true)
      : total(p.domain()), state(p.codomain()), proj(std::move(p)),
        asserted_surjective(surjective) {}

  static HybridSSub identity(const PhaseSpacePtr& hps);
};

struct SubmersionReport {
  bool node_surjective = false;
  std::vector<std::string> missed_nodes;
  double min_singular_value = 0.0;
  std::vector<std::string> rank_failures;
  bool asserted_surjective = false;
  bool pass() const { return node_surjective && rank_failures.empty(); }
};

SubmersionReport check_submersion(const HybridSSub& s, std::size_t samples_per_node = 32,
                                  double rank_tol = 1e-9, std::uint64_t seed = 1);

/// Product of open-system substrates: total and state are iterated products.
struct SSubProduct {
  ProductChain total;
  ProductChain state;
  HybridSSub ssub;
};

SSubProduct product_ssub(const std::vector<HybridSSub>& parts);

/// Commuting square between two substrates.
struct SSubMorphism {
  HybridSSub domain;
  HybridSSub codomain;
  PhaseSpaceMorphism f_tot;
  PhaseSpaceMorphism f_st;
  /// Candidate inverse of f_st, required to certify an interconnection.
  std::optional<PhaseSpaceMorphism> st_inverse;
};

SSubMorphism identity_ssub_morphism(const HybridSSub& s);

/// Checks p_b . f_tot = f_st . p_a on samples of the domain total space,
/// plus check_morphism on both components.
ValidationReport check_ssub_morphism(const SSubMorphism& f, const CheckOptions& opts = {});

/// g after f, both components; inverses compose when both are present.
SSubMorphism compose(const SSubMorphism& g, const SSubMorphism& f);

/// Componentwise product of substrate morphisms between product substrates.
SSubMorphism product_morphism(const std::vector<SSubMorphism>& parts);

struct InterconnectionCheck {
  bool ok = false;
  std::string witness;
};

/// True iff f_st has a bijective node map and st_inverse is a two-sided
/// inverse on samples. Throws if no inverse candidate was supplied.
InterconnectionCheck is_interconnection(const SSubMorphism& f, const CheckOptions& opts = {});

/// An SSubMorphism whose state map has passed is_interconnection.
class Interconnection {
 public:
  /// Throws Error with the witness when verification fails.
  static Interconnection verify(SSubMorphism f, const CheckOptions& opts = {});

  const SSubMorphism& morphism() const { return f_; }
  const PhaseSpaceMorphism& st_inverse() const { return *f_.st_inverse; }

 private:
  explicit Interconnection(SSubMorphism f) : f_(std::move(f)) {}
  SSubMorphism f_;
};

/// Verifies `candidate` as the inverse of `f` (node bijection, round trips,
/// relation equality both ways) and returns it. Throws on failure.
PhaseSpaceMorphism invert_iso(const PhaseSpaceMorphism& f, const PhaseSpaceMorphism& candidate,
                              const CheckOptions& opts = {});

}  // namespace hybrid
