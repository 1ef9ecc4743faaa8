#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybrid/systems.hpp"

namespace hybrid {

/// Strictly increasing transition times; the last entry may be +inf.
struct TimePartition {
  std::vector<double> times;

  /// Throws Error unless times are strictly increasing with a finite first entry.
  void validate() const;
};

struct ArcSample {
  double t = 0.0;
  Vector coords;
};

/// Flow segment on a single node.
struct Arc {
  NodeId node;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<ArcSample> samples;
};

struct JumpRecord {
  double t = 0.0;
  TaggedPoint from;
  TaggedPoint to;
  EdgeId edge;
};

enum class StopReason { horizon, max_jumps, zeno, domain_exit };
std::string_view to_string(StopReason r);

/// Alternating arcs and jumps: jump k joins the end of arc k to the start of arc k+1.
struct Execution {
  TimePartition partition;
  std::vector<Arc> arcs;
  std::vector<JumpRecord> jumps;
  /// Applied before the first arc when the initial point is not a fixed point of rho.
  std::optional<JumpRecord> initial_jump;
  /// Estimated accumulation time when Zeno behaviour stopped the run.
  std::optional<double> zeno;
  StopReason reason = StopReason::horizon;
};

struct IntegratorOptions {
  double step = 1e-3;
  double event_refine_tol = 1e-9;
  std::size_t max_jumps = 1000;
  double min_dwell = 1e-6;
  double horizon = 10.0;
  double t0 = 0.0;
  /// Run check_control and check_idempotent before integrating.
  bool check_preconditions = true;
  std::size_t precondition_samples = 32;

  void validate() const;
};

/// Fixed-step RK4 with box clamping and bisection event localization.
///
/// An arc ends at the first time some event function of the current node
/// is <= 0 while rho moves the point; nodes without event functions jump
/// as soon as rho moves the point. If the flow leaves the node's box
/// without such an event, the run stops with StopReason::domain_exit.
Execution execute(const DeterministicControl& c, const TaggedPoint& x0,
                  const IntegratorOptions& opts = {});

/// Closed system on a time partition: one node per interval, unit clock
/// speed, jumps only at right endpoints.
DeterministicControl universal_system(const TimePartition& partition);

/// Midpoint ODE residuals per arc, rho consistency and relation membership per jump.
ValidationReport verify_execution(const Execution& e, const DeterministicControl& c, double tol);

/// Applies a phase-space morphism to every sample and jump record.
Execution pushforward_execution(const PhaseSpaceMorphism& f, const Execution& e);

/// State at time t by linear interpolation inside the arc containing t
/// (the post-jump arc wins at a jump instant).
TaggedPoint state_at(const Execution& e, double t);

/// One row per arc sample: arc_index,node,t,coord_0,... Node names come
/// from `state`; rows on lower-dimensional nodes leave trailing fields empty.
std::string trajectory_csv(const Execution& e, const HybridPhaseSpace& state);

/// One row per jump, the initial jump first:
/// t,from_node,from_0,...,to_node,to_0,...,edge.
std::string jumps_csv(const Execution& e, const HybridPhaseSpace& state);

}  // namespace hybrid
