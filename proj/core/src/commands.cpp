#include "hybrid/commands.hpp"

#include <algorithm>
#include <random>
#include <utility>

#include "hybrid/execution.hpp"
#include "hybrid/finite_cat.hpp"
#include "hybrid/networks.hpp"
#include "hybrid/sampling.hpp"
#include "hybrid/stability.hpp"
#include "json.hpp"

namespace hybrid::cli {

namespace detail {
// Generated from scenarios/*.scn at configure time.
const std::vector<std::pair<std::string, std::string>>& bundled();
}  // namespace detail

namespace {

using Json = nlohmann::ordered_json;
using scn::AnalysisDecl;
using scn::AnalysisKind;

/// Bad command line or scenario contents; exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

constexpr std::size_t kMaxListed = 10;

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json strings_json(const std::vector<std::string>& items) {
  Json out = Json::array();
  for (std::size_t i = 0; i < items.size() && i < kMaxListed; ++i) out.push_back(items[i]);
  return out;
}

Json relatedness_json(const RelatednessReport& r) {
  return Json{{"samples", r.samples},
              {"max_vf_residual", r.max_vf_residual},
              {"max_jump_mismatch", r.max_jump_mismatch},
              {"node_mismatches", r.node_mismatches},
              {"tol", r.tol},
              {"pass", r.pass()},
              {"witnesses", strings_json(r.witnesses)}};
}

Json verdict_json(const StabilityVerdict& v) {
  Json rows = Json::array();
  for (const auto& r : v.rows) {
    rows.push_back(Json{{"epsilon", r.epsilon},
                        {"delta", r.delta ? Json(*r.delta) : Json(nullptr)},
                        {"worst_distance", r.worst_distance},
                        {"growing_at_horizon", r.growing_at_horizon}});
  }
  return Json{{"x0", vector_json(v.x0)},
              {"horizon", v.horizon},
              {"stable", v.stable},
              {"horizon_robust", v.horizon_robust},
              {"rows", rows},
              {"notes", v.notes}};
}

Json diagnostics_json(const std::vector<expr::Diagnostic>& ds) {
  Json out = Json::array();
  for (const auto& d : ds) out.push_back(Json{{"line", d.pos.line}, {"column", d.pos.column}, {"message", d.message}});
  return out;
}

Vector eval_point(const std::vector<expr::Expression>& pt) {
  Vector x(static_cast<Eigen::Index>(pt.size()));
  for (std::size_t i = 0; i < pt.size(); ++i) x[static_cast<Eigen::Index>(i)] = pt[i].eval(Vector());
  return x;
}

template <class T>
T pick(const std::optional<T>& flag, const AnalysisDecl* a, std::string_view key, T fallback) {
  if (flag) return *flag;
  if (a) {
    if (const auto v = a->option(key)) return static_cast<T>(*v);
  }
  return fallback;
}

IntegratorOptions integrator_options(const AnalysisDecl& a, const Flags& f) {
  IntegratorOptions o;
  o.horizon = pick(f.horizon, &a, "horizon", o.horizon);
  o.step = pick(f.step, &a, "step", o.step);
  o.max_jumps = pick(f.max_jumps, &a, "max-jumps", o.max_jumps);
  o.min_dwell = pick(f.min_dwell, &a, "min-dwell", o.min_dwell);
  o.event_refine_tol = pick<double>(std::nullopt, &a, "event-tol", o.event_refine_tol);
  try {
    o.validate();
  } catch (const Error& e) {
    throw InputError(a.name + ": " + e.what());
  }
  return o;
}

CheckOptions check_options(const AnalysisDecl* a, const Flags& f) {
  CheckOptions o;
  o.samples = pick(f.samples, a, "samples", o.samples);
  o.seed = pick(f.seed, a, "seed", o.seed);
  o.tol = pick(f.tol, a, "tol", o.tol);
  if (o.samples == 0) throw InputError("--samples must be positive");
  if (!(o.tol >= 0)) throw InputError("--tol must be non-negative");
  return o;
}

StabilityOptions stability_options(const AnalysisDecl& a, const Flags& f) {
  StabilityOptions o;
  o.flow.horizon = pick(f.horizon, &a, "horizon", o.flow.horizon);
  o.flow.step = pick(f.step, &a, "step", o.flow.step);
  o.seed = pick(f.seed, &a, "seed", o.seed);
  if (!(o.flow.horizon > 0) || !(o.flow.step > 0)) throw InputError("horizon and step must be positive");
  return o;
}

/// Accumulated results of one command.
struct Run {
  Json results = Json::array();
  bool pass = true;
  std::vector<Artifact> artifacts;
};

std::vector<const AnalysisDecl*> select(const scn::Loaded& l, std::initializer_list<AnalysisKind> kinds,
                                        const Flags& f, std::string_view what) {
  std::vector<const AnalysisDecl*> out;
  for (const auto& d : l.scenario.decls) {
    const auto* a = std::get_if<AnalysisDecl>(&d);
    if (!a || std::find(kinds.begin(), kinds.end(), a->kind) == kinds.end()) continue;
    if (f.analysis && *f.analysis != a->name) continue;
    out.push_back(a);
  }
  if (out.empty()) {
    throw InputError(f.analysis ? "no " + std::string(what) + " analysis named '" + *f.analysis + "'"
                                : "scenario declares no " + std::string(what) + " analysis");
  }
  return out;
}

// ---- simulate --------------------------------------------------------------

void simulate(const scn::Loaded& l, const Flags& f, Run& run) {
  for (const AnalysisDecl* a : select(l, {AnalysisKind::simulate}, f, "simulate")) {
    const DeterministicControl& c = l.model.controls.at(a->subject);
    const HybridPhaseSpace& hps = *c.ssub.state;
    const IntegratorOptions o = integrator_options(*a, f);
    const TaggedPoint x0{hps.node(a->node), eval_point(a->point)};
    const Execution e = execute(c, x0, o);
    const double tol = f.tol.value_or(1e-4);
    const ValidationReport check = verify_execution(e, c, tol);

    Json times = Json::array();
    for (const auto& j : e.jumps) times.push_back(j.t);
    const std::string traj = a->name + ".trajectory.csv";
    const std::string jumps = a->name + ".jumps.csv";
    run.results.push_back(Json{{"analysis", a->name},
                               {"control", a->subject},
                               {"step", o.step},
                               {"horizon", o.horizon},
                               {"stop_reason", std::string(to_string(e.reason))},
                               {"final_time", e.partition.times.back()},
                               {"arcs", e.arcs.size()},
                               {"jumps", e.jumps.size()},
                               {"jump_times", times},
                               {"zeno_estimate", e.zeno ? Json(*e.zeno) : Json(nullptr)},
                               {"execution_check", Json{{"tol", tol},
                                                        {"pass", check.ok()},
                                                        {"violations", strings_json(check.violations)}}},
                               {"files", Json::array({traj, jumps})}});
    run.pass = run.pass && check.ok();
    run.artifacts.push_back({traj, trajectory_csv(e, hps)});
    run.artifacts.push_back({jumps, jumps_csv(e, hps)});
  }
}

// ---- verify ----------------------------------------------------------------

void verify_controls(const scn::Loaded& l, const Flags& f, Run& run) {
  if (l.model.control_order.empty()) throw InputError("scenario declares no control");
  const CheckOptions o = check_options(nullptr, f);
  for (const auto& name : l.model.control_order) {
    const DeterministicControl& c = l.model.controls.at(name);
    const ValidationReport rep = check_control(c, o);
    Json j{{"control", name}, {"closed", c.closed()}, {"pass", rep.ok()}, {"violations", strings_json(rep.violations)}};
    bool ok = rep.ok();
    if (c.closed()) {
      const IdempotencyReport idem = check_idempotent(c, o);
      j["idempotent"] = idem.idempotent();
      j["idempotency_witnesses"] = strings_json(idem.witnesses);
      ok = ok && idem.idempotent();
      j["pass"] = ok;
    }
    run.pass = run.pass && ok;
    run.results.push_back(j);
  }
}

void verify_morphisms(const scn::Loaded& l, const Flags& f, Run& run) {
  if (l.model.morphism_order.empty()) throw InputError("scenario declares no morphism");
  const CheckOptions o = check_options(nullptr, f);
  for (const auto& name : l.model.morphism_order) {
    const PhaseSpaceMorphism& m = l.model.morphisms.at(name);
    const ValidationReport structure = validate(m);
    const MorphismReport rep = check_morphism(m, o);
    const bool ok = structure.ok() && rep.pass();
    run.results.push_back(Json{{"morphism", name},
                               {"domain", m.domain()->name()},
                               {"codomain", m.codomain()->name()},
                               {"checked_pairs", rep.checked_pairs},
                               {"pass", ok},
                               {"structure_violations", strings_json(structure.violations)},
                               {"failures", strings_json(rep.failures)},
                               {"unsampleable", rep.unsampleable}});
    run.pass = run.pass && ok;
  }
}

void verify_submersions(const scn::Loaded& l, const Flags& f, Run& run) {
  if (l.model.ssub_order.empty()) throw InputError("scenario declares no ssub");
  const std::size_t samples = f.samples.value_or(32);
  const double rank_tol = f.tol.value_or(1e-9);
  for (const auto& name : l.model.ssub_order) {
    const SubmersionReport rep = check_submersion(l.model.ssubs.at(name), samples, rank_tol, f.seed.value_or(1));
    run.results.push_back(Json{{"ssub", name},
                               {"node_surjective", rep.node_surjective},
                               {"missed_nodes", rep.missed_nodes},
                               {"min_singular_value", rep.min_singular_value},
                               {"rank_tol", rank_tol},
                               {"asserted_surjective", rep.asserted_surjective},
                               {"pass", rep.pass()},
                               {"rank_failures", strings_json(rep.rank_failures)}});
    run.pass = run.pass && rep.pass();
  }
}

void verify_networks(const scn::Loaded& l, const Flags& f, Run& run) {
  if (l.model.network_order.empty()) throw InputError("scenario declares no network");
  for (const auto& name : l.model.network_order) {
    const Network& n = l.model.networks.at(name);
    // make_network verified the interconnection while loading.
    run.results.push_back(Json{{"network", name},
                               {"labels", n.list.labels},
                               {"bound", n.bound.total->name()},
                               {"interconnection_verified", true},
                               {"pass", true}});
  }
  const CheckOptions o = check_options(nullptr, f);
  for (const auto& name : l.model.netmorph_order) {
    const ValidationReport rep = check_network_morphism(l.model.netmorphs.at(name), o);
    run.results.push_back(Json{{"netmorph", name}, {"pass", rep.ok()}, {"violations", strings_json(rep.violations)}});
    run.pass = run.pass && rep.ok();
  }
}

std::vector<DeterministicControl> controls(const scn::Loaded& l, const std::vector<std::string>& names) {
  std::vector<DeterministicControl> out;
  for (const auto& n : names) out.push_back(l.model.controls.at(n));
  return out;
}

void verify_theorem(const scn::Loaded& l, const Flags& f, Run& run) {
  for (const AnalysisDecl* a : select(l, {AnalysisKind::theorem, AnalysisKind::invariance}, f, "theorem")) {
    const NetworkMorphism& nm = l.model.netmorphs.at(a->subject);
    const auto w = controls(l, a->w);
    const auto v = controls(l, a->v);
    if (a->kind == AnalysisKind::theorem) {
      const CheckOptions o = check_options(a, f);
      const TheoremReport rep = verify_main_theorem(nm, w, v, o);
      Json hyp = Json::array();
      for (std::size_t i = 0; i < rep.hypothesis.size(); ++i) {
        Json row = relatedness_json(rep.hypothesis[i]);
        row["label"] = i < rep.labels.size() ? rep.labels[i] : std::to_string(i);
        hyp.push_back(row);
      }
      run.results.push_back(Json{{"analysis", a->name},
                                 {"kind", "theorem"},
                                 {"netmorph", a->subject},
                                 {"samples", o.samples},
                                 {"seed", o.seed},
                                 {"tol", o.tol},
                                 {"hypothesis", hyp},
                                 {"hypothesis_holds", rep.hypothesis_holds},
                                 {"product_stage", rep.product_stage ? relatedness_json(*rep.product_stage) : Json()},
                                 {"conclusion", rep.conclusion ? relatedness_json(*rep.conclusion) : Json()},
                                 {"pass", rep.pass()}});
      run.pass = run.pass && rep.pass();
    } else {
      const IntegratorOptions o = integrator_options(*a, f);
      const double tol = pick(f.tol, a, "tol", 1e-4);
      const HybridPhaseSpace& wspace = *nm.target.bound.total;
      const TaggedPoint x0{wspace.node(a->node), eval_point(a->point)};
      const InvarianceResult r = invariance_demo(nm, w, v, x0, o);
      const bool ok = r.within(tol);
      const std::string wfile = a->name + ".w.trajectory.csv";
      const std::string vfile = a->name + ".v.trajectory.csv";
      run.results.push_back(Json{{"analysis", a->name},
                                 {"kind", "invariance"},
                                 {"netmorph", a->subject},
                                 {"step", o.step},
                                 {"horizon", o.horizon},
                                 {"tol", tol},
                                 {"sup_deviation", r.sup_deviation},
                                 {"node_mismatches", r.node_mismatches},
                                 {"switches", r.switches},
                                 {"pass", ok},
                                 {"files", Json::array({wfile, vfile})}});
      run.pass = run.pass && ok;
      run.artifacts.push_back({wfile, trajectory_csv(r.w_run, wspace)});
      run.artifacts.push_back({vfile, trajectory_csv(r.v_run, *nm.source.bound.total)});
    }
  }
}

// ---- stability -------------------------------------------------------------

std::vector<double> eps_grid(const AnalysisDecl& a) {
  std::vector<double> out;
  for (const auto& e : a.eps) out.push_back(e.eval(Vector()));
  return out;
}

void stability(const scn::Loaded& l, const Flags& f, Run& run) {
  for (const AnalysisDecl* a : select(l, {AnalysisKind::stability, AnalysisKind::transport}, f, "stability")) {
    const StabilityOptions so = stability_options(*a, f);
    const Vector x0 = eval_point(a->point);
    if (a->kind == AnalysisKind::stability) {
      const StabilityVerdict v = empirical_stability(l.model.flows.at(a->subject), x0, eps_grid(*a), so);
      const std::string file = a->name + ".delta-epsilon.csv";
      Json j{{"analysis", a->name}, {"kind", "stability"}, {"system", a->subject}};
      j.update(verdict_json(v));
      j["pass"] = v.stable;
      j["files"] = Json::array({file});
      run.results.push_back(j);
      run.pass = run.pass && v.stable;
      run.artifacts.push_back({file, delta_epsilon_csv(v)});
      continue;
    }
    TransportOptions to;
    to.stability = so;
    to.eps_grid = eps_grid(*a);
    to.map_tol = pick(f.tol, a, "map-tol", to.map_tol);
    for (std::size_t i = 0; i < a->grid_count; ++i) {
      const double s = a->grid_count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(a->grid_count - 1);
      to.map_grid.push_back(Vector::Constant(1, a->grid_lo + s * (a->grid_hi - a->grid_lo)));
    }
    Json j{{"analysis", a->name}, {"kind", "transport"}, {"map", a->subject}, {"from", a->from}, {"to", a->to}};
    try {
      const TransportReport r = stability_transport_demo(l.model.maps.at(a->subject), l.model.flows.at(a->from),
                                                         l.model.flows.at(a->to), x0, to);
      const bool ok = r.map.pass() && r.source.stable && r.target.stable;
      const std::string src = a->name + ".source.csv";
      const std::string tgt = a->name + ".target.csv";
      j["map_check"] = Json{{"points", r.map.points},
                            {"max_residual", r.map.max_residual},
                            {"worst_point", vector_json(r.map.worst_point)},
                            {"tol", r.map.tol},
                            {"pass", r.map.pass()}};
      j["min_singular_value"] = r.min_singular_value;
      j["fx0"] = vector_json(r.fx0);
      j["source"] = verdict_json(r.source);
      j["target"] = verdict_json(r.target);
      j["pass"] = ok;
      j["files"] = Json::array({src, tgt});
      run.pass = run.pass && ok;
      run.artifacts.push_back({src, delta_epsilon_csv(r.source)});
      run.artifacts.push_back({tgt, delta_epsilon_csv(r.target)});
    } catch (const Error& e) {
      // Map or openness check refused the transport.
      j["pass"] = false;
      j["error"] = e.what();
      run.pass = false;
    }
    run.results.push_back(j);
  }
}

// ---- finite ----------------------------------------------------------------

finite::FiniteMap random_map(std::mt19937_64& g, std::size_t dom, std::size_t cod) {
  finite::FiniteMap f{dom, cod, {}};
  for (std::size_t i = 0; i < dom; ++i) f.table.push_back(g() % cod);
  return f;
}

/// Bijective state map, arbitrary total map, domain projection forced by the square.
finite::FiniteSSubMorphism random_interconnection(std::mt19937_64& g, const finite::FiniteMap& cod_proj,
                                                  std::size_t dom_total) {
  finite::FiniteMap st = finite::FiniteMap::identity(cod_proj.cod);
  std::shuffle(st.table.begin(), st.table.end(), g);
  const finite::FiniteMap tot = random_map(g, dom_total, cod_proj.dom);
  const finite::FiniteMap proj_dom = compose(inverse(st), compose(cod_proj, tot));
  return {proj_dom, cod_proj, tot, st};
}

Json omega_json(const finite::OmegaShape& shape) {
  const finite::OmegaTable t = finite::omega(shape);
  return Json{{"shape", shape.c},
              {"domain_size", t.domain_size},
              {"codomain_size", t.codomain_size},
              {"bijective", t.bijective()},
              {"omega", t.omega.table}};
}

void finite_suite(const Flags& f, Run& run) {
  const std::uint64_t seed = f.seed.value_or(1);
  const std::size_t n = f.samples.value_or(100);

  // J = {a, b}, K_a = {1, 2, 3}, K_b = {1, 2}: singleton summands, then C(j, k) of size k.
  Json concrete = Json::array({omega_json({{{1, 1, 1}, {1, 1}}}), omega_json({{{1, 2, 3}, {1, 2}}})});
  bool concrete_ok = concrete[0]["bijective"] && concrete[1]["bijective"];
  std::size_t omega_failures = 0;
  std::size_t largest = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const finite::OmegaTable t = finite::omega(finite::random_omega_shape(mix_seed(seed, s), 200));
    largest = std::max(largest, t.codomain_size);
    if (!t.bijective() || t.domain_size != t.codomain_size) ++omega_failures;
  }
  run.results.push_back(Json{{"check", "omega"},
                             {"concrete_instance", concrete},
                             {"random_instances", n},
                             {"largest_total", largest},
                             {"failures", omega_failures},
                             {"pass", concrete_ok && omega_failures == 0}});
  run.pass = run.pass && concrete_ok && omega_failures == 0;

  std::size_t counterexamples = 0;
  std::size_t points = 0;
  Json failing = Json::array();
  for (std::size_t s = 0; s < n; ++s) {
    const std::uint64_t sd = mix_seed(seed, 1000 + s);
    const finite::DiscreteVerdict v = finite::discrete_network_theorem(finite::random_discrete_instance(sd));
    points += v.checked_points;
    if (!v.structure_ok || !v.hypothesis_holds || v.conclusion_holds != std::optional<bool>(true)) {
      ++counterexamples;
      failing.push_back(sd);
    }
  }
  finite::InstanceOptions defect;
  defect.inject_defect = true;
  const std::size_t defects = 10;
  std::size_t flagged = 0;
  for (std::size_t s = 0; s < defects; ++s) {
    const auto v = finite::discrete_network_theorem(finite::random_discrete_instance(mix_seed(seed, 2000 + s), defect));
    if (!v.hypothesis_holds) ++flagged;
  }
  const bool theorem_ok = counterexamples == 0 && flagged == defects;
  run.results.push_back(Json{{"check", "network_theorem"},
                             {"instances", n},
                             {"checked_points", points},
                             {"counterexamples", counterexamples},
                             {"counterexample_seeds", failing},
                             {"defect_instances", defects},
                             {"defects_flagged", flagged},
                             {"pass", theorem_ok}});
  run.pass = run.pass && theorem_ok;

  std::mt19937_64 g(seed);
  std::size_t trials = 0;
  std::size_t law_failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto p3 = random_map(g, 2 + g() % 3, 1 + g() % 3);
    const auto id = finite::identity_morphism(p3);
    const auto j = random_interconnection(g, p3, 1 + g() % 4);
    const auto i = random_interconnection(g, j.proj_dom, 1 + g() % 4);
    const auto ji = compose(j, i);
    for (const auto& dyn : finite::all_maps(p3.dom, p3.cod)) {
      ++trials;
      if (!(finite::gamma(id, dyn) == dyn)) ++law_failures;
      if (!(finite::gamma(ji, dyn) == finite::gamma(i, finite::gamma(j, dyn)))) ++law_failures;
    }
  }
  run.results.push_back(
      Json{{"check", "gamma_functor"}, {"cases", trials}, {"failures", law_failures}, {"pass", law_failures == 0}});
  run.pass = run.pass && law_failures == 0;

  const auto w = finite::find_lax_strictness_witness(3);
  const bool certified = w && w->certified && finite::certify(*w);
  Json lax{{"check", "lax_strictness_witness"}, {"found", w.has_value()}, {"certified", certified}};
  if (w) {
    lax["sizes"] = Json::array({w->a, w->b, w->c});
    lax["f"] = w->f.table;
    lax["g"] = w->g.table;
    lax["x"] = w->x.table;
    lax["z"] = w->z.table;
  }
  lax["pass"] = certified;
  run.results.push_back(lax);
  run.pass = run.pass && certified;
}

// ---- dispatch --------------------------------------------------------------

void dispatch(std::string_view command, std::string_view target, const scn::Loaded& l, const Flags& f, Run& run) {
  if (command == "simulate") {
    simulate(l, f, run);
  } else if (command == "stability") {
    stability(l, f, run);
  } else if (command == "verify") {
    if (target == "control") {
      verify_controls(l, f, run);
    } else if (target == "morphism") {
      verify_morphisms(l, f, run);
    } else if (target == "submersion") {
      verify_submersions(l, f, run);
    } else if (target == "network") {
      verify_networks(l, f, run);
    } else if (target == "theorem") {
      verify_theorem(l, f, run);
    } else {
      throw InputError("unknown verify kind '" + std::string(target) +
                       "' (expected control, morphism, submersion, network or theorem)");
    }
  } else {
    throw InputError("unknown command '" + std::string(command) + "'");
  }
}

using Step = std::pair<std::string_view, std::string_view>;

std::vector<Step> demo_steps(std::string_view demo) {
  if (demo == "thermostat") return {{"simulate", ""}, {"verify", "control"}, {"verify", "morphism"}};
  if (demo == "bouncing-ball" || demo == "switched-state" || demo == "switched-time") {
    return {{"simulate", ""}, {"verify", "control"}};
  }
  if (demo == "networked-thermostats") {
    return {{"verify", "submersion"}, {"verify", "network"}, {"verify", "theorem"}};
  }
  if (demo == "stability-transport") return {{"stability", ""}};
  throw InputError("unknown demo '" + std::string(demo) + "'");
}

Json header(std::string_view command, std::string_view target, const std::string& scenario) {
  Json j{{"command", command}};
  if (!target.empty()) j["target"] = target;
  if (!scenario.empty()) j["scenario"] = scenario;
  return j;
}

Outcome finish(Json j, Run run) {
  j["status"] = run.pass ? "pass" : "fail";
  j["results"] = std::move(run.results);
  return {run.pass ? exit_pass : exit_failure, j.dump(2) + "\n", std::move(run.artifacts)};
}

Outcome input_error(Json diagnostics) {
  const Json j{{"status", "input_error"}, {"diagnostics", std::move(diagnostics)}};
  return {exit_input_error, j.dump(2) + "\n", {}};
}

Outcome run_demo(std::string_view demo, const Flags& f) {
  const auto steps = demo_steps(demo);
  const scn::Loaded l = scn::load_scenario(bundled_scenario(demo), f.params);
  Json j = header("demo", demo, l.scenario.name);
  Json reports = Json::array();
  bool pass = true;
  std::vector<Artifact> artifacts;
  for (const auto& [command, target] : steps) {
    Run run;
    dispatch(command, target, l, f, run);
    Json step = header(command, target, "");
    step["status"] = run.pass ? "pass" : "fail";
    step["results"] = std::move(run.results);
    reports.push_back(std::move(step));
    pass = pass && run.pass;
    for (auto& a : run.artifacts) artifacts.push_back(std::move(a));
  }
  j["status"] = pass ? "pass" : "fail";
  j["steps"] = std::move(reports);
  return {pass ? exit_pass : exit_failure, j.dump(2) + "\n", std::move(artifacts)};
}

}  // namespace

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, text] : detail::bundled()) out.push_back(name);
    return out;
  }();
  return names;
}

std::string_view bundled_scenario(std::string_view demo) {
  for (const auto& [name, text] : detail::bundled()) {
    if (name == demo) return text;
  }
  throw Error("unknown demo '" + std::string(demo) + "'");
}

Outcome run(std::string_view command, std::string_view target, std::string_view scenario, const Flags& flags) {
  try {
    if (command == "demo") return run_demo(target, flags);
    if (command == "finite") {
      Run r;
      finite_suite(flags, r);
      return finish(header(command, target, ""), std::move(r));
    }
    if (command != "simulate" && command != "verify" && command != "stability") {
      throw InputError("unknown command '" + std::string(command) + "'");
    }
    const scn::Loaded l = scn::load_scenario(scenario, flags.params);
    Run r;
    dispatch(command, target, l, flags, r);
    return finish(header(command, target, l.scenario.name), std::move(r));
  } catch (const expr::DiagnosticError& e) {
    return input_error(diagnostics_json(e.diagnostics()));
  } catch (const InputError& e) {
    return input_error(Json::array({Json{{"message", e.what()}}}));
  } catch (const Error& e) {
    // The scenario loaded but an analysis could not be carried out.
    const Json j{{"command", command}, {"status", "fail"}, {"error", e.what()}};
    return {exit_failure, j.dump(2) + "\n", {}};
  }
}

}  // namespace hybrid::cli
