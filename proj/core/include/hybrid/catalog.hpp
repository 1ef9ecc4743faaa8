#pragma once

#include <vector>

#include "hybrid/networks.hpp"
#include "hybrid/stability.hpp"

/// Built-in example systems: thermostat, bouncing ball, switched systems
/// and the networked thermostats.
namespace hybrid::catalog {

/// Nodes "0" (heater off) and "1" (heater on) over R; edges e_1_0: 0 -> 1
/// and e_0_1: 1 -> 0 both carry x = x'.
PhaseSpacePtr thermostat_space();

/// Same graph with threshold relations: e_1_0 needs x >= 1 and e_0_1 needs x <= -1.
PhaseSpacePtr thermostat_threshold_space();

/// Closed thermostat: Z(x, j) = (-1)^(1-j), rho flips j once (-1)^(1-j) x >= 1.
DeterministicControl thermostat();

/// Node "0" with box [0, inf) x R and an impact edge e: h = h' = 0, v v' < 0.
PhaseSpacePtr bouncing_ball_space();

/// (h, v)' = (v, -1); rho(0, v) = (0, -r v) for v < 0.
DeterministicControl bouncing_ball(double r);

/// Same space and jump with linear drag: (h, v)' = (v, -1 - k v).
DeterministicControl bouncing_ball_drag(double r, double k);

/// A closed system on a x b assembled from two open systems on the
/// projections a x b -> a and a x b -> b.
struct InterconnectedExample {
  PhaseSpacePtr a;
  PhaseSpacePtr b;
  ProductChain ab;
  std::vector<DeterministicControl> parts;
  Interconnection iota;
  DeterministicControl closed;
};

/// Temperature (a = R) and heater (b = points 0, 1) open systems.
InterconnectedExample thermostat_interconnect();

/// Height (a = [0, inf)) and velocity (b = R with impact edge) open systems.
InterconnectedExample bouncing_ball_interconnect(double r);

/// x' = A_j x on R^2 with two rotating modes; the switch signal picks
/// mode 1 on x0 x1 >= 0 and mode 2 elsewhere.
InterconnectedExample switched_state();

/// Same modes driven by a clock coordinate: mode 1 while floor(t) is even.
InterconnectedExample switched_time();

/// The two matrices used by the switched examples.
std::vector<Matrix> switched_modes();

/// Two rooms sharing heat through f(x, x') = gain (x' - x). The target
/// network (labels {*}) is one room closed on itself, the source network
/// (labels {1, 2}) holds both rooms, and z is the antidiagonal embedding.
struct NetworkedThermostats {
  PhaseSpacePtr c;
  /// x -> -x on c, swapping the nodes.
  PhaseSpaceMorphism flip;
  NetworkMorphism nm;
  std::vector<DeterministicControl> w;
  std::vector<DeterministicControl> v;
};

NetworkedThermostats networked_thermostats(double gain = 0.3);

/// x' = -x on (0, inf).
FlowSystem decay();
/// y' = -y^3 on R.
FlowSystem cubic_decay();
/// y' = 1 on R.
FlowSystem drift();

/// f(x) = (1 - 2 log x)^(-1/2) on (0, e^(1/2)), f' = f^3 / x. Relates decay to cubic_decay.
SmoothMap cubic_straightening();
/// f(x) = -log x, f' = -1/x. Relates decay to drift.
SmoothMap minus_log();

}  // namespace hybrid::catalog
