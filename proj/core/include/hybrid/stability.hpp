#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hybrid/morphisms.hpp"

namespace hybrid {

struct TrajectorySample {
  double t = 0.0;
  Vector coords;
};

/// Solution map of a flow, sampled at strictly increasing times from 0.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  double horizon = 0.0;
};

/// Continuous-time system x' = field(x) on a single box.
struct FlowSystem {
  std::string name;
  BoxSpace box;
  std::function<Vector(const Vector&)> field;
};

struct FlowOptions {
  double step = 1e-2;
  double horizon = 10.0;
  /// Coordinates beyond this magnitude count as escape.
  double escape_bound = 1e12;
};

/// Fixed-step RK4, one sample per step. Throws Error when the solution
/// blows up or leaves the box.
Trajectory solve(const FlowSystem& sys, const Vector& x0, const FlowOptions& opts = {});

/// sup_t |a(t) - b(t)| over the common horizon. Sample grids that differ
/// are merged and both sides interpolated linearly. Throws on empty input.
double sup_metric(const Trajectory& a, const Trajectory& b);

struct SystemMapReport {
  std::size_t points = 0;
  double max_residual = 0.0;
  Vector worst_point;
  double tol = 0.0;
  bool pass() const { return max_residual <= tol; }
};

/// max |Df(x) X(x) - Y(f(x))| over `grid`.
SystemMapReport check_system_map(const SmoothMap& f, const FlowSystem& x, const FlowSystem& y,
                                 const std::vector<Vector>& grid, double tol);

struct StabilityOptions {
  FlowOptions flow;
  /// Initial conditions tested per radius beyond the +-e_i pairs.
  std::size_t extra_directions = 6;
  std::uint64_t seed = 1;
  /// delta is probed at eps * 2^-k for k < max_halvings, then bisected.
  std::size_t max_halvings = 48;
  std::size_t bisections = 30;
  /// Relative growth of the distance over the last tenth of the horizon
  /// above which the verdict is flagged as not horizon-robust.
  double growth_tol = 1e-6;
  /// Relative slack on the distance <= eps test; absorbs rounding in x0 + delta u.
  double eps_slack = 1e-12;
};

struct EpsilonRow {
  double epsilon = 0.0;
  std::optional<double> delta;
  /// Largest distance reached from the ring at radius delta.
  double worst_distance = 0.0;
  bool growing_at_horizon = false;
};

struct StabilityVerdict {
  Vector x0;
  double horizon = 0.0;
  std::vector<EpsilonRow> rows;
  bool stable = false;
  bool horizon_robust = true;
  std::vector<std::string> notes;
};

/// Delta search per epsilon against a ring of perturbed initial conditions.
/// Perturbations outside the box are skipped. Throws Error naming the
/// initial condition when a probe run escapes.
StabilityVerdict empirical_stability(const FlowSystem& sys, const Vector& x0,
                                     const std::vector<double>& eps_grid,
                                     const StabilityOptions& opts = {});

struct TransportOptions {
  StabilityOptions stability;
  std::vector<double> eps_grid{0.05, 0.1, 0.2};
  /// Points where f must relate the two fields.
  std::vector<Vector> map_grid;
  double map_tol = 1e-7;
  /// Half-width of the neighbourhood of x0 used for the openness spot check.
  double open_radius = 0.1;
  std::size_t open_samples = 11;
  double rank_tol = 1e-9;
};

struct TransportReport {
  SystemMapReport map;
  /// Smallest singular value of Df near x0.
  double min_singular_value = 0.0;
  Vector fx0;
  StabilityVerdict source;
  StabilityVerdict target;
};

/// Checks that f relates the fields and has full-rank Jacobian near x0,
/// then runs empirical_stability at x0 and at f(x0). Throws Error when the
/// map check or the openness spot check fails.
TransportReport stability_transport_demo(const SmoothMap& f, const FlowSystem& x, const FlowSystem& y,
                                         const Vector& x0, const TransportOptions& opts);

/// "epsilon,delta,worst_distance,growing_at_horizon" rows, %.17g numbers.
std::string delta_epsilon_csv(const StabilityVerdict& v);

}  // namespace hybrid
