#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hybrid/morphisms.hpp"

namespace hybrid {

/// Tangent vector at the state point under p, in that state node's coordinates.
using VectorField = std::function<Vector(const TaggedPoint& total_point)>;
/// Jump target in the state space.
using JumpMap = std::function<TaggedPoint(const TaggedPoint& total_point)>;
/// Jump candidates are points where some event function is <= 0.
using EventFunction = std::function<double(const Vector& coords)>;

/// Control (X, rho) on an open-system substrate, plus per-total-node event functions.
struct DeterministicControl {
  HybridSSub ssub;
  VectorField vector_field;
  JumpMap jump_map;
  std::vector<std::vector<EventFunction>> events;

  /// Events of a total node; empty when none were declared.
  const std::vector<EventFunction>& events_at(NodeId n) const;
  /// True when the substrate is the identity of one space.
  bool closed() const;
};

/// Closed system on `hps` (the substrate is the identity).
DeterministicControl closed_control(const PhaseSpacePtr& hps, VectorField x, JumpMap rho,
                                    std::vector<std::vector<EventFunction>> events = {});

/// Dimension checks, relation compatibility of rho (every (p, rho(p)) is
/// related by some edge) and event consistency on sampled total points.
ValidationReport check_control(const DeterministicControl& c, const CheckOptions& opts = {});
ValidationReport check_control(const DeterministicControl& c, const std::vector<TaggedPoint>& points,
                               double tol);

struct RelatednessReport {
  std::size_t samples = 0;
  double max_vf_residual = 0.0;
  double max_jump_mismatch = 0.0;
  std::size_t node_mismatches = 0;
  double tol = 0.0;
  std::vector<std::string> witnesses;

  bool pass() const {
    return node_mismatches == 0 && max_vf_residual <= tol && max_jump_mismatch <= tol;
  }
};

/// Residuals of D f_st . X = Y . f_tot and f_st . rho = sigma . f_tot.
RelatednessReport check_relatedness(const SSubMorphism& f, const DeterministicControl& c,
                                    const DeterministicControl& d, const CheckOptions& opts = {});
RelatednessReport check_relatedness(const SSubMorphism& f, const DeterministicControl& c,
                                    const DeterministicControl& d,
                                    const std::vector<TaggedPoint>& points, double tol);

/// Pulls a control on the codomain substrate back along an interconnection.
DeterministicControl interconnect_control(const Interconnection& i, const DeterministicControl& d);

/// Control on the product substrate; vector fields concatenate, jumps pair up,
/// event sets are unioned.
DeterministicControl product_control(const std::vector<DeterministicControl>& parts);

struct IdempotencyReport {
  std::size_t samples = 0;
  std::vector<std::string> witnesses;
  bool idempotent() const { return witnesses.empty(); }
};

/// rho(rho(x)) == rho(x) on samples. Throws for open systems.
IdempotencyReport check_idempotent(const DeterministicControl& c, const CheckOptions& opts = {});
IdempotencyReport check_idempotent(const DeterministicControl& c,
                                   const std::vector<TaggedPoint>& points, double tol);

}  // namespace hybrid
