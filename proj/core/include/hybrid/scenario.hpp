#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hybrid/expr.hpp"
#include "hybrid/networks.hpp"
#include "hybrid/stability.hpp"

/// Scenario files: an indented, line-oriented description of phase spaces,
/// morphisms, controls, networks and the analyses to run on them.
///
/// Top-level lines start in column 1 and open a declaration; indented lines
/// belong to the declaration above. `#` starts a comment. Every name must be
/// declared before use and names are unique across declaration kinds.
///
///   scenario NAME
///   param NAME = EXPR
///   space NAME                       body: node, edge, pair lines
///   space NAME = product(SPACE, ...)
///   morphism NAME = TERM
///   morphism NAME : SPACE -> SPACE   body: node, edge lines
///   ssub NAME = TERM
///   control NAME on TERM             body: flow, jump, event lines
///   network NAME                     body: entry, bound, tot, st, inverse lines
///   netmorph NAME : NETWORK -> NETWORK   body: component, z lines
///   flowsys NAME : BOX = TUPLE
///   map NAME : N -> M = TUPLE
///   simulate NAME : CONTROL from NODE TUPLE
///   theorem NAME : NETMORPH w (CONTROL, ...) v (CONTROL, ...)
///   invariance NAME : NETMORPH w (...) v (...) from NODE TUPLE
///   stability NAME : FLOWSYS at TUPLE eps TUPLE
///   transport NAME : MAP from FLOWSYS to FLOWSYS at TUPLE eps TUPLE grid LO HI COUNT
///
/// Analyses accept indented `KEY VALUE` option lines (horizon, step,
/// max-jumps, min-dwell, samples, tol, seed). The README has the full grammar.
namespace hybrid::scn {

using expr::Expression;
using expr::Position;

struct IntervalDecl {
  Expression lower;
  Expression upper;
  bool lower_closed = false;
  bool upper_closed = false;
  friend bool operator==(const IntervalDecl&, const IntervalDecl&) = default;
};

struct NodeDecl {
  std::string name;
  std::vector<IntervalDecl> box;
  Position pos;
  friend bool operator==(const NodeDecl& a, const NodeDecl& b) { return a.name == b.name && a.box == b.box; }
};

enum class RelationKind { diagonal, finite, predicate };

struct EdgeDecl {
  std::string name;
  std::string src;
  std::string tgt;
  RelationKind kind = RelationKind::diagonal;
  Expression predicate;
  Position pos;
  friend bool operator==(const EdgeDecl& a, const EdgeDecl& b) {
    return a.name == b.name && a.src == b.src && a.tgt == b.tgt && a.kind == b.kind &&
           a.predicate == b.predicate;
  }
};

/// Member pair of a finite relation, or a sampling witness of a predicate relation.
struct PairDecl {
  std::string edge;
  std::vector<Expression> before;
  std::vector<Expression> after;
  Position pos;
  friend bool operator==(const PairDecl& a, const PairDecl& b) {
    return a.edge == b.edge && a.before == b.before && a.after == b.after;
  }
};

struct SpaceDecl {
  std::string name;
  /// Non-empty for `space NAME = product(...)`.
  std::vector<std::string> factors;
  std::vector<NodeDecl> nodes;
  std::vector<EdgeDecl> edges;
  std::vector<PairDecl> pairs;
  Position pos;
  friend bool operator==(const SpaceDecl& a, const SpaceDecl& b) {
    return a.name == b.name && a.factors == b.factors && a.nodes == b.nodes && a.edges == b.edges &&
           a.pairs == b.pairs;
  }
};

/// Morphism-valued term:
///   NAME | id(SPACE) | proj(SPACE, I) | pair(SPACE, SPACE; TERM, ...)
///   | prod(SPACE, SPACE; TERM, ...) | compose(TERM, TERM)
/// pair and prod take their codomain (and for prod, domain) as an iterated product.
struct Term {
  enum class Kind { ref, identity, projection, pairing, product, compose };
  Kind kind = Kind::ref;
  std::string name;
  std::string domain;
  std::string codomain;
  std::size_t index = 0;
  std::vector<Term> args;
  Position pos;
  friend bool operator==(const Term& a, const Term& b) {
    return a.kind == b.kind && a.name == b.name && a.domain == b.domain && a.codomain == b.codomain &&
           a.index == b.index && a.args == b.args;
  }
};

struct NodeRow {
  std::string src;
  std::string tgt;
  std::vector<Expression> coords;
  Position pos;
  friend bool operator==(const NodeRow& a, const NodeRow& b) {
    return a.src == b.src && a.tgt == b.tgt && a.coords == b.coords;
  }
};

struct EdgeRow {
  std::string src;
  std::string tgt;
  Position pos;
  friend bool operator==(const EdgeRow& a, const EdgeRow& b) { return a.src == b.src && a.tgt == b.tgt; }
};

struct MorphismDecl {
  std::string name;
  std::optional<Term> term;
  std::string domain;
  std::string codomain;
  std::vector<NodeRow> nodes;
  std::vector<EdgeRow> edges;
  Position pos;
  friend bool operator==(const MorphismDecl& a, const MorphismDecl& b) {
    return a.name == b.name && a.term == b.term && a.domain == b.domain && a.codomain == b.codomain &&
           a.nodes == b.nodes && a.edges == b.edges;
  }
};

struct SSubDecl {
  std::string name;
  Term term;
  Position pos;
  friend bool operator==(const SSubDecl& a, const SSubDecl& b) { return a.name == b.name && a.term == b.term; }
};

struct FlowRow {
  std::string node;
  std::vector<Expression> field;
  Position pos;
  friend bool operator==(const FlowRow& a, const FlowRow& b) { return a.node == b.node && a.field == b.field; }
};

/// `jump NODE [when GUARD] -> TARGET : TUPLE`. TARGET is a state node name or
/// `[EXPR]`, an expression for the state node index.
struct JumpRow {
  std::string node;
  Expression guard;
  std::string target;
  Expression target_index;
  std::vector<Expression> coords;
  Position pos;
  friend bool operator==(const JumpRow& a, const JumpRow& b) {
    return a.node == b.node && a.guard == b.guard && a.target == b.target &&
           a.target_index == b.target_index && a.coords == b.coords;
  }
};

struct EventRow {
  std::string node;
  Expression value;
  Position pos;
  friend bool operator==(const EventRow& a, const EventRow& b) { return a.node == b.node && a.value == b.value; }
};

struct ControlDecl {
  std::string name;
  Term ssub;
  std::vector<FlowRow> flows;
  std::vector<JumpRow> jumps;
  std::vector<EventRow> events;
  Position pos;
  friend bool operator==(const ControlDecl& a, const ControlDecl& b) {
    return a.name == b.name && a.ssub == b.ssub && a.flows == b.flows && a.jumps == b.jumps &&
           a.events == b.events;
  }
};

struct EntryDecl {
  std::string label;
  Term ssub;
  Position pos;
  friend bool operator==(const EntryDecl& a, const EntryDecl& b) { return a.label == b.label && a.ssub == b.ssub; }
};

struct NetworkDecl {
  std::string name;
  std::vector<EntryDecl> entries;
  Term bound;
  Term tot;
  Term st;
  Term inverse;
  Position pos;
  friend bool operator==(const NetworkDecl& a, const NetworkDecl& b) {
    return a.name == b.name && a.entries == b.entries && a.bound == b.bound && a.tot == b.tot && a.st == b.st &&
           a.inverse == b.inverse;
  }
};

struct ComponentDecl {
  std::string from;
  std::string to;
  Term tot;
  Term st;
  Position pos;
  friend bool operator==(const ComponentDecl& a, const ComponentDecl& b) {
    return a.from == b.from && a.to == b.to && a.tot == b.tot && a.st == b.st;
  }
};

struct NetMorphDecl {
  std::string name;
  std::string source;
  std::string target;
  std::vector<ComponentDecl> components;
  Term z_tot;
  Term z_st;
  Position pos;
  friend bool operator==(const NetMorphDecl& a, const NetMorphDecl& b) {
    return a.name == b.name && a.source == b.source && a.target == b.target && a.components == b.components &&
           a.z_tot == b.z_tot && a.z_st == b.z_st;
  }
};

struct FlowSysDecl {
  std::string name;
  std::vector<IntervalDecl> box;
  std::vector<Expression> field;
  Position pos;
  friend bool operator==(const FlowSysDecl& a, const FlowSysDecl& b) {
    return a.name == b.name && a.box == b.box && a.field == b.field;
  }
};

struct MapDecl {
  std::string name;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<Expression> value;
  Position pos;
  friend bool operator==(const MapDecl& a, const MapDecl& b) {
    return a.name == b.name && a.in_dim == b.in_dim && a.out_dim == b.out_dim && a.value == b.value;
  }
};

enum class AnalysisKind { simulate, theorem, invariance, stability, transport };

std::string_view to_string(AnalysisKind k);

struct AnalysisDecl {
  AnalysisKind kind = AnalysisKind::simulate;
  std::string name;
  /// Control, network morphism, flow system or map, by kind.
  std::string subject;
  std::vector<std::string> w;
  std::vector<std::string> v;
  /// Initial node for simulate and invariance.
  std::string node;
  /// Initial point; stability and transport use it as x0.
  std::vector<Expression> point;
  std::vector<Expression> eps;
  /// Transport: source and target flow systems, map grid.
  std::string from;
  std::string to;
  double grid_lo = 0.0;
  double grid_hi = 0.0;
  std::size_t grid_count = 0;
  /// Option lines in file order.
  std::vector<std::pair<std::string, double>> options;
  Position pos;

  std::optional<double> option(std::string_view key) const;

  friend bool operator==(const AnalysisDecl& a, const AnalysisDecl& b) {
    return a.kind == b.kind && a.name == b.name && a.subject == b.subject && a.w == b.w && a.v == b.v &&
           a.node == b.node && a.point == b.point && a.eps == b.eps && a.from == b.from && a.to == b.to &&
           a.grid_lo == b.grid_lo && a.grid_hi == b.grid_hi && a.grid_count == b.grid_count &&
           a.options == b.options;
  }
};

struct ParamDecl {
  std::string name;
  Expression value;
  Position pos;
  friend bool operator==(const ParamDecl& a, const ParamDecl& b) { return a.name == b.name && a.value == b.value; }
};

using Declaration = std::variant<ParamDecl, SpaceDecl, MorphismDecl, SSubDecl, ControlDecl, NetworkDecl,
                                 NetMorphDecl, FlowSysDecl, MapDecl, AnalysisDecl>;

struct Scenario {
  std::string name;
  std::vector<Declaration> decls;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Runtime objects built from a scenario, keyed by declared name.
struct Model {
  std::map<std::string, double> params;
  std::map<std::string, PhaseSpacePtr> spaces;
  /// Iterated products: product spaces and the NET.total / NET.state chains.
  std::map<std::string, ProductChain> chains;
  /// Morphisms and submersions (a submersion is its projection morphism).
  std::map<std::string, PhaseSpaceMorphism> morphisms;
  std::map<std::string, HybridSSub> ssubs;
  std::map<std::string, DeterministicControl> controls;
  std::map<std::string, Network> networks;
  std::map<std::string, NetworkMorphism> netmorphs;
  std::map<std::string, FlowSystem> flows;
  std::map<std::string, SmoothMap> maps;
  /// Names per kind in declaration order.
  std::vector<std::string> morphism_order;
  std::vector<std::string> ssub_order;
  std::vector<std::string> control_order;
  std::vector<std::string> network_order;
  std::vector<std::string> netmorph_order;
};

struct Loaded {
  Scenario scenario;
  Model model;
};

/// Parameter values that replace the declared ones, by name.
using Overrides = std::map<std::string, double>;

/// Parses and checks a scenario; throws expr::DiagnosticError listing every
/// syntax, type and reference error with its line and column.
Loaded load_scenario(std::string_view text, const Overrides& overrides = {});
Scenario parse_scenario(std::string_view text);

/// Canonical text; parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& s);

}  // namespace hybrid::scn
