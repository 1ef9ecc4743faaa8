#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hybrid/box.hpp"
#include "hybrid/sampling.hpp"
#include "hybrid/types.hpp"
#include "hybrid/validation.hpp"

namespace hybrid {

using PointPair = std::pair<Vector, Vector>;

/// Membership test for a jump relation. `tol` relaxes every comparison:
/// strict and non-strict inequalities pass with margin >= -tol, equalities
/// pass when |lhs - rhs| <= tol. With tol == 0 membership is exact.
using Membership = std::function<bool(const Vector& before, const Vector& after, double tol)>;

/// Emits member pairs; must be deterministic in (count, seed).
using PairSampler = std::function<std::vector<PointPair>(std::size_t count, std::uint64_t seed)>;

enum class RelationKind { diagonal, finite_list, predicate };

std::string_view to_string(RelationKind kind);

/// Admissible (before, after) pairs along one edge.
class JumpRelation {
 public:
  /// The diagonal of `box`; sampled by pairing box samples with themselves.
  static JumpRelation diagonal(BoxSpace box);
  static JumpRelation finite(std::vector<PointPair> pairs);
  static JumpRelation predicate(Membership membership, PairSampler sampler = {});

  /// Relation on a product edge: ((x,y),(x',y')) is a member iff
  /// (x,x') is in `a` and (y,y') is in `b`.
  static JumpRelation product(const JumpRelation& a, const JumpRelation& b,
                              std::size_t a_source_dim, std::size_t a_target_dim);

  RelationKind kind() const { return kind_; }
  bool contains(const Vector& before, const Vector& after, double tol = 0.0) const;
  bool sampleable() const { return kind_ != RelationKind::predicate || static_cast<bool>(sampler_); }

  /// Member pairs: all stored pairs for finite relations, `count` pairs otherwise.
  std::vector<PointPair> sample(std::size_t count, std::uint64_t seed) const;

  const std::vector<PointPair>& pairs() const { return pairs_; }
  const BoxSpace& diagonal_box() const { return box_; }

 private:
  RelationKind kind_ = RelationKind::predicate;
  Membership membership_;
  PairSampler sampler_;
  std::vector<PointPair> pairs_;
  BoxSpace box_;
};

struct Edge {
  std::string name;
  NodeId src;
  NodeId tgt;
};

/// Directed reflexive multigraph; each node has a distinguished unit edge.
class SourceGraph {
 public:
  std::size_t node_count() const { return node_names_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::string& node_name(NodeId n) const { return node_names_.at(n.index); }
  const Edge& edge(EdgeId e) const { return edges_.at(e.index); }
  std::optional<EdgeId> unit_edge(NodeId n) const { return units_.at(n.index); }
  bool is_unit(EdgeId e) const;

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<EdgeId> find_edge(std::string_view name) const;

  const std::vector<std::string>& node_names() const { return node_names_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Nodes that were given a unit edge more than once.
  const std::vector<std::size_t>& repeated_units() const { return extra_unit_marks_; }

 private:
  friend class HybridPhaseSpace;
  std::vector<std::string> node_names_;
  std::vector<Edge> edges_;
  std::vector<std::optional<EdgeId>> units_;
  std::vector<std::size_t> extra_unit_marks_;
};

class HybridPhaseSpace;
using PhaseSpacePtr = std::shared_ptr<const HybridPhaseSpace>;

/// Point of the underlying space: a node tag plus coordinates in that node's box.
struct TaggedPoint {
  NodeId node;
  Vector coords;

  friend bool operator==(const TaggedPoint& a, const TaggedPoint& b) {
    return a.node == b.node && a.coords.size() == b.coords.size() && a.coords == b.coords;
  }
};

/// A graph whose nodes carry boxes and whose edges carry jump relations.
/// Immutable once built; shared through PhaseSpacePtr.
class HybridPhaseSpace {
 public:
  class Builder {
   public:
    explicit Builder(std::string name);

    /// Adds a node and its unit edge carrying the diagonal relation.
    NodeId add_node(std::string name, BoxSpace box);
    NodeId add_node_without_unit(std::string name, BoxSpace box);
    EdgeId add_edge(std::string name, NodeId src, NodeId tgt, JumpRelation relation);
    /// Adds a self-edge on `n` and marks it as the unit of `n`.
    EdgeId add_unit_edge(NodeId n, JumpRelation relation);
    void set_unit(NodeId n, EdgeId e);
    void set_factors(PhaseSpacePtr left, PhaseSpacePtr right);

    PhaseSpacePtr build();

   private:
    std::shared_ptr<HybridPhaseSpace> hps_;
  };

  struct Factors {
    PhaseSpacePtr left;
    PhaseSpacePtr right;
  };

  const std::string& name() const { return name_; }
  const SourceGraph& graph() const { return graph_; }
  std::size_t node_count() const { return graph_.node_count(); }
  std::size_t edge_count() const { return graph_.edge_count(); }
  const BoxSpace& space(NodeId n) const { return spaces_.at(n.index); }
  const JumpRelation& relation(EdgeId e) const { return relations_.at(e.index); }
  std::size_t dim(NodeId n) const { return space(n).dim(); }

  /// Node lookup by name; throws Error if absent.
  NodeId node(std::string_view name) const;
  EdgeId edge(std::string_view name) const;

  /// Set when this space was produced by product_space.
  const std::optional<Factors>& factors() const { return factors_; }

 private:
  std::string name_;
  SourceGraph graph_;
  std::vector<BoxSpace> spaces_;
  std::vector<JumpRelation> relations_;
  std::optional<Factors> factors_;
};

/// Reports every violated structural invariant; never throws.
ValidationReport validate(const HybridPhaseSpace& hps, std::size_t sampler_probe = 8);

/// True iff the coordinates lie in the node's box. Throws on unknown node.
bool contains(const HybridPhaseSpace& hps, const TaggedPoint& p, double tol = 0.0);

/// Some edge whose relation holds (x, y): unit edge first, then declaration order.
std::optional<EdgeId> lambda_lookup(const HybridPhaseSpace& hps, const TaggedPoint& x,
                                    const TaggedPoint& y, double tol = 0.0);

/// One node with a zero-dimensional box and its unit edge.
PhaseSpacePtr terminal();

/// Categorical product. Node (s,t) has index s*|nodes(b)|+t, edge (g,h)
/// has index g*|edges(b)|+h, coordinates are concatenated.
PhaseSpacePtr product_space(const PhaseSpacePtr& a, const PhaseSpacePtr& b);

/// Structural equality: same graph, boxes and relation kinds.
bool same_structure(const HybridPhaseSpace& a, const HybridPhaseSpace& b);

std::pair<TaggedPoint, TaggedPoint> split_underlying(const HybridPhaseSpace& a,
                                                     const HybridPhaseSpace& b,
                                                     const TaggedPoint& p);
TaggedPoint join_underlying(const HybridPhaseSpace& a, const HybridPhaseSpace& b,
                            const TaggedPoint& pa, const TaggedPoint& pb);

/// Left-nested iterated product ((f0 x f1) x f2) x ... with n-ary split/join.
/// An empty chain is the terminal space; a single factor is the factor itself.
class ProductChain {
 public:
  explicit ProductChain(std::vector<PhaseSpacePtr> factors);

  const PhaseSpacePtr& space() const { return space_; }
  const std::vector<PhaseSpacePtr>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  std::vector<NodeId> split_node(NodeId n) const;
  NodeId join_nodes(const std::vector<NodeId>& parts) const;
  std::vector<EdgeId> split_edge(EdgeId e) const;
  EdgeId join_edges(const std::vector<EdgeId>& parts) const;
  std::vector<TaggedPoint> split(const TaggedPoint& p) const;
  TaggedPoint join(const std::vector<TaggedPoint>& parts) const;

 private:
  std::vector<PhaseSpacePtr> factors_;
  PhaseSpacePtr space_;
};

/// Samples of one node's box, tagged with the node.
std::vector<TaggedPoint> sample_node(const HybridPhaseSpace& hps, NodeId n, std::size_t count,
                                     std::uint64_t seed, const SampleOptions& options = {});

/// Samples of every node, `count` per node (one for zero-dimensional nodes).
std::vector<TaggedPoint> sample_points(const HybridPhaseSpace& hps, std::size_t count,
                                       std::uint64_t seed, const SampleOptions& options = {});

std::string to_string(const HybridPhaseSpace& hps, const TaggedPoint& p);

}  // namespace hybrid
