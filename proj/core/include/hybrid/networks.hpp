#pragma once

#include <map>
#include <string>
#include <vector>

#include "hybrid/execution.hpp"
#include "hybrid/systems.hpp"

namespace hybrid {

/// Labelled open-system substrates, in declaration order.
struct SystemList {
  std::vector<std::string> labels;
  std::vector<HybridSSub> entries;

  std::size_t size() const { return labels.size(); }
  /// Position of a label; throws Error when absent.
  std::size_t index(const std::string& label) const;
  void add(std::string label, HybridSSub entry);
};

/// Morphism of lists from `source` (labels X) to `target` (labels Y):
/// a label map phi: X -> Y and, per x, components[x]: target[phi(x)] -> source[x].
struct ListMorphism {
  SystemList source;
  SystemList target;
  std::vector<std::size_t> label_map;
  std::vector<SSubMorphism> components;
};

ValidationReport validate(const ListMorphism& lm);

/// Iterated product of the list entries; the empty list gives the terminal substrate.
SSubProduct pi_product(const SystemList& list);

/// The substrate morphism Pi(target) -> Pi(source) whose x-th projection is
/// components[x] after the projection onto target entry phi(x).
SSubMorphism pi_morphism(const ListMorphism& lm);

/// List plus a verified interconnection of the bound substrate into the list's product.
struct Network {
  SystemList list;
  HybridSSub bound;
  Interconnection iota;
};

/// Checks the interconnection's codomain against pi_product(list) and verifies it.
Network make_network(SystemList list, SSubMorphism iota, const CheckOptions& opts = {});

/// Morphism from network `source` (labels X) to `target` (labels Y). The
/// bound map z runs from target.bound to source.bound.
struct NetworkMorphism {
  Network source;
  Network target;
  ListMorphism lm;
  SSubMorphism z;
};

/// Componentwise substrate-morphism checks plus iota_X . z = Pi(phi, Phi) . iota_Y.
ValidationReport check_network_morphism(const NetworkMorphism& nm, const CheckOptions& opts = {});

struct TheoremReport {
  std::vector<std::string> labels;
  std::vector<RelatednessReport> hypothesis;
  bool hypothesis_holds = false;
  /// Pi(phi, Phi)-relatedness of the two product controls on iota_Y images.
  std::optional<RelatednessReport> product_stage;
  /// z-relatedness of the two interconnected controls; absent when the hypothesis fails.
  std::optional<RelatednessReport> conclusion;

  bool pass() const { return hypothesis_holds && conclusion && conclusion->pass(); }
};

/// w holds one control per target (Y) label, v one per source (X) label.
TheoremReport verify_main_theorem(const NetworkMorphism& nm, const std::vector<DeterministicControl>& w,
                                  const std::vector<DeterministicControl>& v,
                                  const CheckOptions& opts = {});

/// Interconnected closed controls W (on target.bound) and V (on source.bound).
std::pair<DeterministicControl, DeterministicControl> interconnected_pair(
    const NetworkMorphism& nm, const std::vector<DeterministicControl>& w,
    const std::vector<DeterministicControl>& v);

struct InvarianceResult {
  Execution w_run;
  Execution v_run;
  Execution pushed;
  /// Max coordinate distance between V's run and z applied to W's run.
  double sup_deviation = 0.0;
  /// Comparison instants where the two runs sat on different nodes.
  std::size_t node_mismatches = 0;
  std::size_t switches = 0;

  bool within(double tol) const { return node_mismatches == 0 && sup_deviation <= tol; }
};

/// Runs W from x0 and V from z(x0), then compares V with z applied to W.
/// Instants closer than `jump_guard` to a jump of either run are skipped.
InvarianceResult invariance_demo(const NetworkMorphism& nm, const std::vector<DeterministicControl>& w,
                                 const std::vector<DeterministicControl>& v, const TaggedPoint& x0,
                                 const IntegratorOptions& opts = {}, double jump_guard = 1e-6);

}  // namespace hybrid
