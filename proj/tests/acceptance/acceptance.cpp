// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
//
// Every tolerance is pinned below. Reference values come from closed forms
// or brute-force enumeration written here, not from the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "affine_network.hpp"
#include "hybrid/catalog.hpp"
#include "hybrid/commands.hpp"
#include "hybrid/execution.hpp"
#include "hybrid/finite_cat.hpp"
#include "hybrid/networks.hpp"
#include "hybrid/stability.hpp"

using namespace hybrid;

namespace {

// AC1
constexpr double kBallRestitution = 0.5;
constexpr double kBallStep = 1e-3;
constexpr double kBallEventTol = 1e-9;
constexpr double kBounceTol = 1e-5;
constexpr double kZenoTol = 1e-2;
constexpr double kBallSeconds = 5.0;
// AC2
constexpr std::size_t kThermostatGrid = 201;
// AC3
constexpr double kCouplingGain = 0.3;
constexpr std::size_t kTheoremSamples = 500;
constexpr double kHypothesisTol = 1e-9;
constexpr double kConclusionTol = 1e-8;
constexpr double kInvarianceTol = 1e-4;
constexpr double kInvarianceHorizon = 10.0;
constexpr std::size_t kMinSwitches = 2;
// AC4
constexpr std::size_t kAffineInstances = 50;
constexpr std::size_t kDefectInstances = 10;
constexpr double kAffineTol = 1e-8;
// AC5
constexpr std::size_t kOmegaInstances = 100;
constexpr std::size_t kOmegaMaxTotal = 200;
constexpr std::size_t kDiscreteInstances = 100;
// AC7
constexpr double kDrag = 2.0;
constexpr double kDragLaunch = 1.0;
constexpr std::size_t kOrderBounces = 3;
constexpr double kOrderEventTol = 1e-14;
constexpr double kMinSlope = 3.5;
// AC8
constexpr double kMapTol = 1e-7;
constexpr double kStabilityHorizon = 50.0;
const std::vector<double> kEpsGrid{0.05, 0.1, 0.2};

struct Line {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- AC1 -------------------------------------------------------------------

Line ac1() {
  Line l;
  const auto start = std::chrono::steady_clock::now();
  IntegratorOptions o;
  o.step = kBallStep;
  o.event_refine_tol = kBallEventTol;
  const Execution e = execute(catalog::bouncing_ball(kBallRestitution), {NodeId{0}, vec({0.0, 0.5})}, o);
  const double secs = seconds_since(start);
  // Launch speed 0.5 under unit gravity: flight k lasts 2 * 0.5 * r^k = r^k.
  double t_k = 0.0;
  double worst = 0.0;
  l.require(e.jumps.size() >= 4, "fewer than 4 bounces");
  for (std::size_t k = 0; k < 4 && k < e.jumps.size(); ++k) {
    t_k += std::pow(kBallRestitution, static_cast<double>(k));
    worst = std::max(worst, std::abs(e.jumps[k].t - t_k));
  }
  l.require(worst <= kBounceTol, "bounce error " + num(worst));
  l.require(e.reason == StopReason::zeno && e.zeno.has_value(), "Zeno not flagged");
  const double accumulation = 1.0 / (1.0 - kBallRestitution);
  if (e.zeno) l.require(std::abs(*e.zeno - accumulation) <= kZenoTol, "Zeno estimate " + num(*e.zeno));
  l.require(secs < kBallSeconds, "runtime " + num(secs) + " s");
  l.note("max bounce error " + num(worst) + ", Zeno at " + (e.zeno ? num(*e.zeno) : "-") + ", " + num(secs) + " s");
  return l;
}

// ---- AC2 -------------------------------------------------------------------

Line ac2() {
  Line l;
  const auto ex = catalog::thermostat_interconnect();
  const DeterministicControl closed = interconnect_control(ex.iota, product_control(ex.parts));
  double residual = 0.0;
  std::size_t node_errors = 0;
  for (std::size_t j = 0; j < 2; ++j) {
    const double sign = j == 0 ? -1.0 : 1.0;  // (-1)^(1-j)
    for (std::size_t i = 0; i < kThermostatGrid; ++i) {
      const double x = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(kThermostatGrid - 1);
      // Node (s, t) of a x b sits at s * |b| + t and a has one node.
      const TaggedPoint p{NodeId{j}, vec({x})};
      const Vector z = closed.vector_field(p);
      residual = std::max(residual, std::abs(z[0] - sign));
      const TaggedPoint q = closed.jump_map(p);
      const std::size_t expect = sign * x >= 1.0 ? 1 - j : j;
      if (q.node.index != expect) ++node_errors;
      residual = std::max(residual, std::abs(q.coords[0] - x));
    }
  }
  l.require(residual == 0.0, "residual " + num(residual));
  l.require(node_errors == 0, std::to_string(node_errors) + " wrong jump targets");
  l.note("residual " + num(residual) + " on " + std::to_string(2 * kThermostatGrid) + " points");
  return l;
}

// ---- AC3 -------------------------------------------------------------------

Line ac3() {
  Line l;
  const auto nt = catalog::networked_thermostats(kCouplingGain);
  CheckOptions o;
  o.samples = kTheoremSamples;
  o.tol = kHypothesisTol;
  const TheoremReport rep = verify_main_theorem(nt.nm, nt.w, nt.v, o);
  double hyp = 0.0;
  for (const auto& h : rep.hypothesis) {
    hyp = std::max({hyp, h.max_vf_residual, h.max_jump_mismatch});
    l.require(h.node_mismatches == 0, "hypothesis node mismatch");
  }
  l.require(rep.hypothesis_holds && hyp <= kHypothesisTol, "hypothesis residual " + num(hyp));
  double concl = INFINITY;
  if (rep.conclusion) {
    concl = std::max(rep.conclusion->max_vf_residual, rep.conclusion->max_jump_mismatch);
    l.require(rep.conclusion->node_mismatches == 0, "conclusion node mismatch");
  }
  l.require(concl <= kConclusionTol, "conclusion residual " + num(concl));

  IntegratorOptions io;
  io.horizon = kInvarianceHorizon;
  io.step = 1e-3;
  const InvarianceResult r = invariance_demo(nt.nm, nt.w, nt.v, {NodeId{1}, vec({0.2})}, io);
  // Antidiagonal of c x c: node (j, 1 - j) and x' = -x. Nodes (0,1), (1,0) are 1 and 2.
  double off = 0.0;
  std::size_t wrong_nodes = 0;
  for (const auto& arc : r.v_run.arcs) {
    if (arc.node.index != 1 && arc.node.index != 2) ++wrong_nodes;
    for (const auto& s : arc.samples) off = std::max(off, std::abs(s.coords[0] + s.coords[1]));
  }
  l.require(off <= kInvarianceTol && wrong_nodes == 0, "antidiagonal deviation " + num(off));
  l.require(r.within(kInvarianceTol), "deviation from z(W) " + num(r.sup_deviation));
  l.require(r.switches >= kMinSwitches, std::to_string(r.switches) + " switches");
  l.note("hypothesis " + num(hyp) + ", conclusion " + num(concl) + ", antidiagonal " + num(off) + ", " +
         std::to_string(r.switches) + " switches");
  return l;
}

// ---- AC4 -------------------------------------------------------------------

Line ac4() {
  Line l;
  CheckOptions o;
  o.samples = 64;
  o.tol = kAffineTol;
  double worst = 0.0;
  std::size_t failed = 0;
  for (std::uint64_t seed = 1; seed <= kAffineInstances; ++seed) {
    const auto inst = hybrid::testing::random_affine_network(seed);
    const TheoremReport rep = verify_main_theorem(inst.nm, inst.w, inst.v, o);
    if (!rep.pass()) ++failed;
    if (rep.conclusion) worst = std::max({worst, rep.conclusion->max_vf_residual, rep.conclusion->max_jump_mismatch});
  }
  std::size_t flagged = 0;
  for (std::uint64_t seed = 1; seed <= kDefectInstances; ++seed) {
    const auto defect = seed % 2 ? hybrid::testing::Defect::vector_field : hybrid::testing::Defect::jump;
    const auto inst = hybrid::testing::random_affine_network(1000 + seed, defect);
    const TheoremReport rep = verify_main_theorem(inst.nm, inst.w, inst.v, o);
    const std::size_t x = inst.nm.lm.source.index(inst.defect_label);
    if (!rep.hypothesis_holds && !rep.hypothesis[x].pass()) ++flagged;
  }
  l.require(failed == 0 && worst <= kAffineTol, std::to_string(failed) + " instances failed, worst " + num(worst));
  l.require(flagged == kDefectInstances, std::to_string(flagged) + "/" + std::to_string(kDefectInstances) +
                                             " defects flagged");
  l.note("worst conclusion residual " + num(worst) + " over " + std::to_string(kAffineInstances) + ", " +
         std::to_string(flagged) + "/" + std::to_string(kDefectInstances) + " defects flagged");
  return l;
}

// ---- AC5 -------------------------------------------------------------------

/// |coproduct over (k_j) of prod_j C(j, k_j)| by direct enumeration.
std::size_t coproduct_of_products(const finite::OmegaShape& s) {
  std::size_t total = 0;
  std::vector<std::size_t> k(s.c.size(), 0);
  while (true) {
    std::size_t prod = 1;
    for (std::size_t j = 0; j < s.c.size(); ++j) prod *= s.c[j][k[j]];
    total += prod;
    std::size_t j = 0;
    while (j < k.size() && ++k[j] == s.c[j].size()) k[j++] = 0;
    if (j == k.size()) break;
  }
  return total;
}

/// |product over j of coproduct over k of C(j, k)|.
std::size_t product_of_coproducts(const finite::OmegaShape& s) {
  std::size_t total = 1;
  for (const auto& row : s.c) {
    std::size_t sum = 0;
    for (std::size_t c : row) sum += c;
    total *= sum;
  }
  return total;
}

bool omega_ok(const finite::OmegaShape& shape) {
  const finite::OmegaTable t = finite::omega(shape);
  const std::size_t n = coproduct_of_products(shape);
  if (t.domain_size != n || t.codomain_size != product_of_coproducts(shape) || n != t.codomain_size) return false;
  // Round trips checked entrywise here, independently of the table's own flags.
  for (std::size_t i = 0; i < n; ++i) {
    if (t.aleph(t.omega(i)) != i || t.omega(t.aleph(i)) != i) return false;
  }
  return t.bijective();
}

finite::FiniteMap random_map(std::mt19937_64& g, std::size_t dom, std::size_t cod) {
  finite::FiniteMap f{dom, cod, {}};
  for (std::size_t i = 0; i < dom; ++i) f.table.push_back(g() % cod);
  return f;
}

finite::FiniteSSubMorphism random_interconnection(std::mt19937_64& g, const finite::FiniteMap& cod_proj,
                                                  std::size_t dom_total) {
  std::vector<std::size_t> perm(cod_proj.cod);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), g);
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  const finite::FiniteMap tot = random_map(g, dom_total, cod_proj.dom);
  finite::FiniteMap proj_dom{dom_total, cod_proj.cod, {}};
  for (std::size_t t = 0; t < dom_total; ++t) proj_dom.table.push_back(inv[cod_proj(tot(t))]);
  return {proj_dom, cod_proj, tot, finite::FiniteMap{perm.size(), perm.size(), perm}};
}

/// Pullback by hand: st^-1 . g . tot.
std::vector<std::size_t> pullback(const finite::FiniteSSubMorphism& m, const finite::FiniteMap& g) {
  std::vector<std::size_t> inv(m.st.cod);
  for (std::size_t i = 0; i < m.st.dom; ++i) inv[m.st(i)] = i;
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < m.tot.dom; ++t) out.push_back(inv[g(m.tot(t))]);
  return out;
}

Line ac5() {
  Line l;
  // J = {a, b}, K_a = {1, 2, 3}, K_b = {1, 2}: singleton summands, then summands of size k.
  const bool concrete = omega_ok({{{1, 1, 1}, {1, 1}}}) && omega_ok({{{1, 2, 3}, {1, 2}}});
  l.require(concrete, "concrete instance");
  std::size_t omega_failures = 0;
  for (std::uint64_t seed = 0; seed < kOmegaInstances; ++seed) {
    const auto shape = finite::random_omega_shape(seed, kOmegaMaxTotal);
    if (product_of_coproducts(shape) > kOmegaMaxTotal || !omega_ok(shape)) ++omega_failures;
  }
  l.require(omega_failures == 0, std::to_string(omega_failures) + " random omega failures");

  std::size_t counterexamples = 0;
  for (std::uint64_t seed = 0; seed < kDiscreteInstances; ++seed) {
    const auto v = finite::discrete_network_theorem(finite::random_discrete_instance(seed));
    if (!v.structure_ok || !v.hypothesis_holds || v.conclusion_holds != std::optional<bool>(true)) ++counterexamples;
  }
  l.require(counterexamples == 0, std::to_string(counterexamples) + " discrete counterexamples");

  std::mt19937_64 g(2024);
  std::size_t law_failures = 0;
  std::size_t cases = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto p3 = random_map(g, 2 + g() % 3, 1 + g() % 3);
    const auto j = random_interconnection(g, p3, 1 + g() % 4);
    const auto i = random_interconnection(g, j.proj_dom, 1 + g() % 4);
    const auto ji = finite::compose(j, i);
    for (const auto& dyn : finite::all_maps(p3.dom, p3.cod)) {
      ++cases;
      const auto lhs = finite::gamma(ji, dyn);
      const auto via_j = finite::gamma(j, dyn);
      if (lhs.table != finite::gamma(i, via_j).table) ++law_failures;
      if (via_j.table != pullback(j, dyn) || lhs.table != pullback(i, via_j)) ++law_failures;
      if (finite::gamma(finite::identity_morphism(p3), dyn).table != dyn.table) ++law_failures;
    }
  }
  l.require(law_failures == 0, std::to_string(law_failures) + " functor law failures");
  l.note(std::to_string(kOmegaInstances) + " shapes, " + std::to_string(kDiscreteInstances) +
         " discrete instances, " + std::to_string(cases) + " functor cases, all exact");
  return l;
}

// ---- AC6 -------------------------------------------------------------------

/// Closed systems on finite sets: x on A is f-related to y on B iff f . x = y . f.
bool related(const std::vector<std::size_t>& f, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
  for (std::size_t a = 0; a < f.size(); ++a) {
    if (f[x[a]] != y[f[a]]) return false;
  }
  return true;
}

Line ac6() {
  Line l;
  const auto w = finite::find_lax_strictness_witness(3);
  l.require(w.has_value(), "no witness found");
  if (!w) return l;
  l.require(w->certified && finite::certify(*w), "library certificate");
  std::vector<std::size_t> gf;
  for (std::size_t a = 0; a < w->a; ++a) gf.push_back(w->g(w->f(a)));
  const bool composite = related(gf, w->x.table, w->z.table);
  // Brute force over every y on B for an interpolating system.
  std::size_t interpolants = 0;
  std::vector<std::size_t> y(w->b, 0);
  while (true) {
    if (related(w->f.table, w->x.table, y) && related(w->g.table, y, w->z.table)) ++interpolants;
    std::size_t i = 0;
    while (i < y.size() && ++y[i] == w->b) y[i++] = 0;
    if (i == y.size()) break;
  }
  l.require(composite, "(x, z) not related under g.f");
  l.require(interpolants == 0, std::to_string(interpolants) + " interpolating systems on B");
  l.note("|A|,|B|,|C| = " + std::to_string(w->a) + "," + std::to_string(w->b) + "," + std::to_string(w->c) +
         "; (x, z) in the composite relation, no y on B");
  return l;
}

// ---- AC7 -------------------------------------------------------------------

/// Ball with linear drag: v' = -1 - k v, h' = v, from h = 0.
double drag_height(double v0, double t) {
  return (v0 + 1.0 / kDrag) * (1.0 - std::exp(-kDrag * t)) / kDrag - t / kDrag;
}
double drag_velocity(double v0, double t) { return (v0 + 1.0 / kDrag) * std::exp(-kDrag * t) - 1.0 / kDrag; }

/// Landing time after launch at v0 > 0. Newton from a point past landing;
/// h is concave and decreasing there, so the iterates decrease monotonically.
double drag_landing(double v0) {
  const double apex = std::log1p(kDrag * v0) / kDrag;
  double t = apex + 1.0;
  while (drag_height(v0, t) > 0.0) t *= 2.0;
  for (int i = 0; i < 100; ++i) {
    const double d = drag_height(v0, t) / drag_velocity(v0, t);
    t -= d;
    if (std::abs(d) < 1e-16) break;
  }
  return t;
}

Line ac7() {
  Line l;
  std::vector<double> exact;
  double t = 0.0;
  double v = kDragLaunch;
  for (std::size_t b = 0; b < kOrderBounces; ++b) {
    const double d = drag_landing(v);
    t += d;
    exact.push_back(t);
    v = -kBallRestitution * drag_velocity(v, d);
  }
  const std::vector<double> steps{1e-2, 5e-3, 2.5e-3};
  std::vector<double> errors;
  for (double h : steps) {
    IntegratorOptions o;
    o.step = h;
    o.event_refine_tol = kOrderEventTol;
    o.horizon = exact.back() + 0.25;
    o.max_jumps = kOrderBounces;
    const Execution e = execute(catalog::bouncing_ball_drag(kBallRestitution, kDrag), {NodeId{0}, vec({0.0, kDragLaunch})}, o);
    double err = 0.0;
    if (e.jumps.size() < kOrderBounces) {
      err = INFINITY;
    } else {
      for (std::size_t b = 0; b < kOrderBounces; ++b) err = std::max(err, std::abs(e.jumps[b].t - exact[b]));
    }
    errors.push_back(err);
  }
  // Least-squares slope of log error against log h.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    mx += std::log(steps[i]) / 3.0;
    my += std::log(errors[i]) / 3.0;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    sxy += (std::log(steps[i]) - mx) * (std::log(errors[i]) - my);
    sxx += (std::log(steps[i]) - mx) * (std::log(steps[i]) - mx);
  }
  const double slope = sxy / sxx;
  l.require(std::isfinite(slope) && slope >= kMinSlope, "slope " + num(slope));
  l.note("errors " + num(errors[0]) + ", " + num(errors[1]) + ", " + num(errors[2]) + "; slope " + num(slope));
  return l;
}

// ---- AC8 -------------------------------------------------------------------

Line ac8() {
  Line l;
  std::vector<Vector> grid;
  for (int i = 0; i <= 140; ++i) grid.push_back(vec({0.2 + 0.01 * i}));
  const auto decay = catalog::decay();
  const auto cubic = catalog::cubic_decay();
  const auto drift = catalog::drift();
  const auto straighten = catalog::cubic_straightening();
  const auto neglog = catalog::minus_log();
  const auto m1 = check_system_map(straighten, decay, cubic, grid, kMapTol);
  const auto m2 = check_system_map(neglog, decay, drift, grid, kMapTol);
  l.require(m1.pass() && m2.pass(), "map residuals " + num(m1.max_residual) + ", " + num(m2.max_residual));

  StabilityOptions so;
  so.flow.horizon = kStabilityHorizon;
  // All three flows are non-expanding, so the analytic sup distance from a
  // start delta away is delta itself: every reported delta must be <= eps.
  auto stable_at = [&](const FlowSystem& sys, double x0, const char* name) {
    const StabilityVerdict v = empirical_stability(sys, vec({x0}), kEpsGrid, so);
    l.require(v.stable, std::string(name) + " not stable");
    for (const auto& r : v.rows) l.require(r.delta && *r.delta <= r.epsilon, std::string(name) + " delta > eps");
  };
  stable_at(decay, 1.0, "x' = -x at 1");
  stable_at(cubic, straighten(vec({1.0}))[0], "y' = -y^3 at f(1)");
  stable_at(drift, neglog(vec({1.0}))[0], "y' = 1 at 0");
  FlowOptions fo;
  fo.horizon = kStabilityHorizon;
  const Trajectory run = solve(drift, vec({0.0}), fo);
  const double reach = std::abs(run.samples.back().coords[0]);
  l.require(reach >= kStabilityHorizon - 1e-6, "drift trajectory bounded");
  l.note("map residuals " + num(m1.max_residual) + ", " + num(m2.max_residual) + "; drift reaches " + num(reach) +
         " yet stable");
  return l;
}

// ---- AC9 -------------------------------------------------------------------

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Line ac9() {
  Line l;
  std::uint64_t digest = 14695981039346656037ULL;
  std::size_t outputs = 0;
  auto compare = [&](const cli::Outcome& a, const cli::Outcome& b, const std::string& what) {
    l.require(a.exit_code == b.exit_code && a.report == b.report, what + " report differs");
    l.require(a.artifacts.size() == b.artifacts.size(), what + " artifact count differs");
    for (std::size_t i = 0; i < a.artifacts.size() && i < b.artifacts.size(); ++i) {
      l.require(a.artifacts[i].name == b.artifacts[i].name && a.artifacts[i].content == b.artifacts[i].content,
                what + " " + a.artifacts[i].name + " differs");
      digest = fnv1a(digest, a.artifacts[i].content);
    }
    digest = fnv1a(digest, a.report);
    outputs += 1 + a.artifacts.size();
  };
  for (const auto& name : cli::demo_names()) {
    compare(cli::run("demo", name, "", {}), cli::run("demo", name, "", {}), name);
  }
  compare(cli::run("finite", "", "", {}), cli::run("finite", "", "", {}), "finite");
  const auto ball = catalog::bouncing_ball(kBallRestitution);
  const Execution e1 = execute(ball, {NodeId{0}, vec({0.0, 0.5})});
  const Execution e2 = execute(ball, {NodeId{0}, vec({0.0, 0.5})});
  const auto& hps = *ball.ssub.state;
  l.require(trajectory_csv(e1, hps) == trajectory_csv(e2, hps) && jumps_csv(e1, hps) == jumps_csv(e2, hps),
            "repeated execution differs");
  char hex[20];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(digest));
  l.note(std::to_string(outputs) + " outputs identical across two runs, digest " + hex);
  return l;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Line()> check;
  };
  const Criterion criteria[] = {
      {"AC1", "bouncing-ball bounce times and Zeno", ac1},
      {"AC2", "thermostat recovered by interconnection", ac2},
      {"AC3", "networked thermostats are z-related", ac3},
      {"AC4", "main theorem on random affine networks", ac4},
      {"AC5", "finite backend exactness", ac5},
      {"AC6", "lax strictness witness", ac6},
      {"AC7", "integrator order", ac7},
      {"AC8", "stability transport", ac8},
      {"AC9", "determinism", ac9},
  };
  bool all = true;
  for (const auto& c : criteria) {
    Line l;
    try {
      l = c.check();
    } catch (const std::exception& e) {
      l.pass = false;
      l.detail = std::string("threw: ") + e.what();
    }
    all = all && l.pass;
    std::printf("%s %s  %s: %s\n", c.id, l.pass ? "PASS" : "FAIL", c.title, l.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
