#include "hybrid/execution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybrid {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::horizon:
      return "horizon";
    case StopReason::max_jumps:
      return "max_jumps";
    case StopReason::zeno:
      return "zeno";
    case StopReason::domain_exit:
      return "domain_exit";
  }
  return "?";
}

void TimePartition::validate() const {
  if (times.size() < 2) throw Error("time partition needs at least two times");
  if (!std::isfinite(times.front())) throw Error("time partition must start at a finite time");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error("time partition is not strictly increasing");
    if (!std::isfinite(times[i]) && i + 1 != times.size()) {
      throw Error("only the last partition time may be infinite");
    }
  }
}

void IntegratorOptions::validate() const {
  if (!(step > 0) || !(event_refine_tol > 0) || !(min_dwell > 0) || !(horizon > 0) ||
      max_jumps == 0) {
    throw Error("integrator options must all be positive");
  }
}

namespace {

bool same_point(const TaggedPoint& a, const TaggedPoint& b, double tol) {
  if (a.node != b.node || a.coords.size() != b.coords.size()) return false;
  return a.coords.size() == 0 || (a.coords - b.coords).cwiseAbs().maxCoeff() <= tol;
}

class Stepper {
 public:
  Stepper(const DeterministicControl& c, NodeId node)
      : c_(c), node_(node), box_(c.ssub.state->space(node)) {}

  Vector field(const Vector& x) const { return c_.vector_field(TaggedPoint{node_, box_.clamp(x)}); }

  /// One RK4 step of size h; stage points are clamped into the box.
  Vector rk4(const Vector& x, double h) const {
    const Vector k1 = field(x);
    const Vector k2 = field(x + 0.5 * h * k1);
    const Vector k3 = field(x + 0.5 * h * k2);
    const Vector k4 = field(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  bool armed(const Vector& x) const {
    const auto& evs = c_.events_at(node_);
    // Without declared events every nontrivial jump is armed.
    if (!evs.empty() &&
        std::none_of(evs.begin(), evs.end(), [&](const EventFunction& e) { return e(x) <= 0.0; })) {
      return false;
    }
    return !same_point(c_.jump_map(TaggedPoint{node_, x}), TaggedPoint{node_, x}, 0.0);
  }

  const BoxSpace& box() const { return box_; }

 private:
  const DeterministicControl& c_;
  NodeId node_;
  const BoxSpace& box_;
};

JumpRecord make_jump(const DeterministicControl& c, double t, const TaggedPoint& from) {
  TaggedPoint to = c.jump_map(from);
  const auto edge = lambda_lookup(*c.ssub.state, from, to, 1e-9);
  if (!edge) {
    throw Error("jump " + to_string(*c.ssub.state, from) + " -> " + to_string(*c.ssub.state, to) +
                " is not related by any edge");
  }
  return {t, from, std::move(to), *edge};
}

}  // namespace

Execution execute(const DeterministicControl& c, const TaggedPoint& x0,
                  const IntegratorOptions& opts) {
  opts.validate();
  if (!c.closed()) throw Error("execute needs a closed system");
  const auto& hps = *c.ssub.state;
  if (!contains(hps, x0)) throw Error("initial point " + to_string(hps, x0) + " is outside the space");
  if (opts.check_preconditions) {
    CheckOptions chk{opts.precondition_samples, 1e-9, 1};
    const auto ctl = check_control(c, chk);
    if (!ctl.ok()) throw Error("control check failed: " + ctl.violations.front());
    const auto idem = check_idempotent(c, chk);
    if (!idem.idempotent()) throw Error("jump map is not idempotent: " + idem.witnesses.front());
  }

  Execution ex;
  double t = opts.t0;
  const double t_end = opts.t0 + opts.horizon;
  TaggedPoint x = x0;
  ex.partition.times.push_back(t);

  if (const TaggedPoint j = c.jump_map(x); !same_point(j, x, 0.0)) {
    ex.initial_jump = make_jump(c, t, x);
    x = ex.initial_jump->to;
  }

  std::size_t short_dwells = 0;
  while (true) {
    Arc arc{x.node, t, t, {{t, x.coords}}};
    const Stepper s(c, x.node);
    std::optional<TaggedPoint> jump_from;
    bool exited = false;

    while (t_end - t > 1e-12) {
      const double h = std::min(opts.step, t_end - t);
      const Vector y = s.rk4(x.coords, h);
      const Vector yc = s.box().clamp(y);
      const bool armed = s.armed(yc);
      const bool outside = !s.box().contains(y);
      if (!armed && !outside) {
        t += h;
        x.coords = yc;
        arc.samples.push_back({t, yc});
        continue;
      }
      // Localize the first time the step predicate flips.
      auto flips = [&](double tau) {
        const Vector z = s.rk4(x.coords, tau);
        return armed ? s.armed(s.box().clamp(z)) : !s.box().contains(z);
      };
      double lo = 0.0;
      double hi = h;
      while (hi - lo > opts.event_refine_tol) {
        const double mid = 0.5 * (lo + hi);
        (flips(mid) ? hi : lo) = mid;
      }
      const Vector z = s.box().clamp(s.rk4(x.coords, hi));
      t += hi;
      x.coords = z;
      arc.samples.push_back({t, z});
      if (armed) {
        jump_from = x;
      } else {
        exited = true;
      }
      break;
    }
    arc.t_end = t;
    ex.arcs.push_back(std::move(arc));

    if (exited || !jump_from) {
      ex.reason = exited ? StopReason::domain_exit : StopReason::horizon;
      break;
    }

    const double dwell = ex.arcs.back().t_end - ex.arcs.back().t_start;
    ex.jumps.push_back(make_jump(c, t, *jump_from));
    ex.partition.times.push_back(t);
    x = ex.jumps.back().to;
    short_dwells = dwell < opts.min_dwell ? short_dwells + 1 : 0;

    const bool zeno = short_dwells >= 3;
    if (zeno || ex.jumps.size() >= opts.max_jumps) {
      ex.arcs.push_back(Arc{x.node, t, t, {{t, x.coords}}});
      ex.reason = zeno ? StopReason::zeno : StopReason::max_jumps;
      if (zeno) {
        const std::size_t n = ex.jumps.size();
        double estimate = t;
        if (n >= 3) {
          const double g2 = ex.jumps[n - 2].t - ex.jumps[n - 3].t;
          const double g3 = ex.jumps[n - 1].t - ex.jumps[n - 2].t;
          const double q = g2 > 0 ? g3 / g2 : 0.0;
          if (q > 0 && q < 1) estimate = t + g3 * q / (1.0 - q);
        }
        ex.zeno = estimate;
      }
      break;
    }
  }
  ex.partition.times.push_back(t);
  return ex;
}

DeterministicControl universal_system(const TimePartition& partition) {
  partition.validate();
  const auto& ts = partition.times;
  HybridPhaseSpace::Builder b("universal");
  const std::size_t n = ts.size() - 1;
  for (std::size_t j = 0; j < n; ++j) {
    const Interval iv = std::isfinite(ts[j + 1]) ? Interval::closed(ts[j], ts[j + 1])
                                                 : Interval::at_least(ts[j]);
    b.add_node(std::to_string(j), BoxSpace({iv}));
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    Vector p(1);
    p << ts[j + 1];
    b.add_edge("e_" + std::to_string(j) + "_" + std::to_string(j + 1), NodeId{j}, NodeId{j + 1},
               JumpRelation::finite({{p, p}}));
  }
  auto hps = b.build();

  VectorField x = [](const TaggedPoint&) { return Vector(Vector::Ones(1)); };
  JumpMap rho = [ts, n](const TaggedPoint& p) {
    const std::size_t j = p.node.index;
    if (j + 1 < n && p.coords[0] >= ts[j + 1]) {
      Vector c(1);
      c << ts[j + 1];
      return TaggedPoint{NodeId{j + 1}, c};
    }
    return p;
  };
  std::vector<std::vector<EventFunction>> events(n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double next = ts[j + 1];
    events[j].push_back([next](const Vector& v) { return next - v[0]; });
  }
  return closed_control(hps, std::move(x), std::move(rho), std::move(events));
}

ValidationReport verify_execution(const Execution& e, const DeterministicControl& c, double tol) {
  ValidationReport r;
  const auto& hps = *c.ssub.state;
  if (e.arcs.empty()) {
    r.add("execution has no arcs");
    return r;
  }
  if (e.jumps.size() + 1 != e.arcs.size()) {
    r.add("execution has " + std::to_string(e.arcs.size()) + " arcs and " +
          std::to_string(e.jumps.size()) + " jumps");
    return r;
  }
  for (std::size_t k = 0; k < e.arcs.size(); ++k) {
    const Arc& arc = e.arcs[k];
    const std::string tag = "arc " + std::to_string(k);
    if (arc.samples.empty()) {
      r.add(tag + " has no samples");
      continue;
    }
    if (arc.node.index >= hps.node_count()) {
      r.add(tag + " sits on an unknown node");
      continue;
    }
    if (k + 1 < e.arcs.size() && arc.t_end != e.arcs[k + 1].t_start) {
      r.add(tag + " does not abut the next arc");
    }
    const auto& box = hps.space(arc.node);
    for (std::size_t i = 0; i < arc.samples.size(); ++i) {
      const auto& s = arc.samples[i];
      if (!box.contains(s.coords, tol)) {
        r.add(tag + " leaves its box at t=" + std::to_string(s.t));
        break;
      }
      if (i == 0) continue;
      const auto& prev = arc.samples[i - 1];
      const double dt = s.t - prev.t;
      if (dt < 1e-8) continue;
      const Vector mid = box.clamp(0.5 * (prev.coords + s.coords));
      const Vector v = c.vector_field(TaggedPoint{arc.node, mid});
      const Vector chord = (s.coords - prev.coords) / dt;
      const double res = max_abs(chord - v);
      if (res > tol * (1.0 + max_abs(v))) {
        r.add(tag + " violates the ODE near t=" + std::to_string(prev.t) + " (residual " +
              std::to_string(res) + ")");
        break;
      }
    }
  }
  for (std::size_t k = 0; k < e.jumps.size(); ++k) {
    const auto& j = e.jumps[k];
    const std::string tag = "jump " + std::to_string(k);
    const Arc& before = e.arcs[k];
    const Arc& after = e.arcs[k + 1];
    const TaggedPoint end{before.node, before.samples.back().coords};
    const TaggedPoint start{after.node, after.samples.front().coords};
    if (!same_point(j.from, end, tol)) r.add(tag + " does not start at the end of its arc");
    const TaggedPoint expect = c.jump_map(end);
    if (!same_point(expect, start, tol)) {
      r.add(tag + " lands on " + to_string(hps, start) + " but rho gives " + to_string(hps, expect));
    }
    if (!lambda_lookup(hps, end, start, tol)) r.add(tag + " is not related by any edge");
  }
  return r;
}

Execution pushforward_execution(const PhaseSpaceMorphism& f, const Execution& e) {
  constexpr double kTol = 1e-9;
  Execution out = e;
  for (auto& arc : out.arcs) {
    const NodeId src = arc.node;
    arc.node = f.map_node(src);
    for (auto& s : arc.samples) s.coords = apply(f, TaggedPoint{src, s.coords}, kTol).coords;
  }
  auto push = [&](JumpRecord& j) {
    j.from = apply(f, j.from, kTol);
    j.to = apply(f, j.to, kTol);
    j.edge = f.map_edge(j.edge);
  };
  for (auto& j : out.jumps) push(j);
  if (out.initial_jump) push(*out.initial_jump);
  return out;
}

TaggedPoint state_at(const Execution& e, double t) {
  if (e.arcs.empty()) throw Error("state_at: empty execution");
  const Arc* arc = &e.arcs.front();
  for (const auto& a : e.arcs) {
    if (a.t_start <= t) arc = &a;
  }
  const auto& s = arc->samples;
  if (t <= s.front().t) return {arc->node, s.front().coords};
  if (t >= s.back().t) return {arc->node, s.back().coords};
  const auto it = std::lower_bound(s.begin(), s.end(), t,
                                   [](const ArcSample& a, double v) { return a.t < v; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return {arc->node, Vector((1.0 - w) * a.coords + w * b.coords)};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::size_t max_dim(const HybridPhaseSpace& state) {
  std::size_t d = 0;
  for (std::size_t n = 0; n < state.node_count(); ++n) d = std::max(d, state.dim(NodeId{n}));
  return d;
}

void append_coords(std::string& out, const Vector& v, std::size_t width) {
  for (std::size_t i = 0; i < width; ++i) {
    out += ',';
    if (i < static_cast<std::size_t>(v.size())) out += format_real(v[static_cast<Eigen::Index>(i)]);
  }
}

}  // namespace

std::string trajectory_csv(const Execution& e, const HybridPhaseSpace& state) {
  const std::size_t width = max_dim(state);
  std::string out = "arc_index,node,t";
  for (std::size_t i = 0; i < width; ++i) out += ",coord_" + std::to_string(i);
  out += '\n';
  for (std::size_t a = 0; a < e.arcs.size(); ++a) {
    const Arc& arc = e.arcs[a];
    const std::string prefix = std::to_string(a) + "," + csv_field(state.graph().node_name(arc.node)) + ",";
    for (const auto& s : arc.samples) {
      out += prefix + format_real(s.t);
      append_coords(out, s.coords, width);
      out += '\n';
    }
  }
  return out;
}

std::string jumps_csv(const Execution& e, const HybridPhaseSpace& state) {
  const std::size_t width = max_dim(state);
  std::string out = "t,from_node";
  for (std::size_t i = 0; i < width; ++i) out += ",from_" + std::to_string(i);
  out += ",to_node";
  for (std::size_t i = 0; i < width; ++i) out += ",to_" + std::to_string(i);
  out += ",edge\n";
  auto row = [&](const JumpRecord& j) {
    out += format_real(j.t) + "," + csv_field(state.graph().node_name(j.from.node));
    append_coords(out, j.from.coords, width);
    out += "," + csv_field(state.graph().node_name(j.to.node));
    append_coords(out, j.to.coords, width);
    out += "," + csv_field(state.graph().edge(j.edge).name) + "\n";
  };
  if (e.initial_jump) row(*e.initial_jump);
  for (const auto& j : e.jumps) row(j);
  return out;
}

}  // namespace hybrid
