#include "hybrid/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace hybrid {

namespace {

Vector rk4(const FlowSystem& sys, const Vector& x, double h) {
  const Vector k1 = sys.field(x);
  const Vector k2 = sys.field(x + 0.5 * h * k1);
  const Vector k3 = sys.field(x + 0.5 * h * k2);
  const Vector k4 = sys.field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vector interpolate(const Trajectory& tr, double t) {
  const auto& s = tr.samples;
  if (t <= s.front().t) return s.front().coords;
  if (t >= s.back().t) return s.back().coords;
  const auto it = std::lower_bound(s.begin(), s.end(), t,
                                   [](const TrajectorySample& a, double v) { return a.t < v; });
  if (it->t == t) return it->coords;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  return (1.0 - w) * lo.coords + w * hi.coords;
}

bool same_grid(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (a.samples[i].t != b.samples[i].t) return false;
  }
  return true;
}

/// Distance at the final sample against the distance one tenth of the horizon earlier.
bool still_growing(const Trajectory& a, const Trajectory& b, double rel_tol) {
  const double t_end = std::min(a.samples.back().t, b.samples.back().t);
  const double d_end = (interpolate(a, t_end) - interpolate(b, t_end)).norm();
  const double d_prev = (interpolate(a, 0.9 * t_end) - interpolate(b, 0.9 * t_end)).norm();
  return d_end > 0.0 && d_end > d_prev * (1.0 + rel_tol);
}

std::vector<Vector> directions(std::size_t dim, std::size_t extra, std::uint64_t seed) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < dim; ++i) {
    const Vector e = Vector::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(i));
    out.push_back(e);
    out.push_back(-e);
  }
  if (dim < 2) return out;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < extra; ++k) {
    Vector u(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(gen);
    out.push_back(u.normalized());
  }
  return out;
}

struct RingResult {
  double worst = 0.0;
  bool growing = false;
};

}  // namespace

Trajectory solve(const FlowSystem& sys, const Vector& x0, const FlowOptions& opts) {
  if (!(opts.step > 0.0) || !(opts.horizon > 0.0)) throw Error("step and horizon must be positive");
  if (static_cast<std::size_t>(x0.size()) != sys.box.dim()) {
    throw Error("initial condition has dimension " + std::to_string(x0.size()) + ", expected " +
                std::to_string(sys.box.dim()));
  }
  if (!sys.box.contains(x0)) throw Error("initial condition " + format_vector(x0) + " lies outside the box");
  Trajectory tr;
  tr.horizon = opts.horizon;
  tr.samples.push_back({0.0, x0});
  const auto steps = static_cast<std::size_t>(std::ceil(opts.horizon / opts.step - 1e-9));
  Vector x = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = tr.samples.back().t;
    const double t = k == steps ? opts.horizon : static_cast<double>(k) * opts.step;
    x = rk4(sys, x, t - t_prev);
    if (!x.allFinite() || max_abs(x) > opts.escape_bound) {
      throw Error("escape: solution from " + format_vector(x0) + " exceeds " + format_real(opts.escape_bound) +
                  " at t=" + format_real(t));
    }
    if (!sys.box.contains(x, 1e-12)) {
      throw Error("solution from " + format_vector(x0) + " leaves the box at t=" + format_real(t));
    }
    tr.samples.push_back({t, x});
  }
  return tr;
}

double sup_metric(const Trajectory& a, const Trajectory& b) {
  if (a.samples.empty() || b.samples.empty()) throw Error("sup_metric of an empty trajectory");
  if (a.samples.front().coords.size() != b.samples.front().coords.size()) {
    throw Error("sup_metric of trajectories with different dimensions");
  }
  double sup = 0.0;
  if (same_grid(a, b)) {
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      sup = std::max(sup, (a.samples[i].coords - b.samples[i].coords).norm());
    }
    return sup;
  }
  const double t_end = std::min(a.samples.back().t, b.samples.back().t);
  std::vector<double> times;
  for (const auto* tr : {&a, &b}) {
    for (const auto& s : tr->samples) {
      if (s.t <= t_end) times.push_back(s.t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  for (double t : times) sup = std::max(sup, (interpolate(a, t) - interpolate(b, t)).norm());
  return sup;
}

SystemMapReport check_system_map(const SmoothMap& f, const FlowSystem& x, const FlowSystem& y,
                                 const std::vector<Vector>& grid, double tol) {
  if (f.in_dim != x.box.dim() || f.out_dim != y.box.dim()) {
    throw Error("map dimensions do not match the two systems");
  }
  SystemMapReport r;
  r.tol = tol;
  for (const auto& p : grid) {
    const Matrix df = differential(f, x.box, p).jacobian;
    const double res = max_abs(df * x.field(p) - y.field(f(p)));
    if (r.points == 0 || res > r.max_residual) {
      r.max_residual = res;
      r.worst_point = p;
    }
    ++r.points;
  }
  return r;
}

StabilityVerdict empirical_stability(const FlowSystem& sys, const Vector& x0,
                                     const std::vector<double>& eps_grid,
                                     const StabilityOptions& opts) {
  if (eps_grid.empty()) throw Error("empty epsilon grid");
  for (double e : eps_grid) {
    if (!(e > 0.0)) throw Error("epsilon values must be positive");
  }
  const Trajectory ref = solve(sys, x0, opts.flow);
  const auto dirs = directions(sys.box.dim(), opts.extra_directions, opts.seed);

  auto ring = [&](double delta) {
    std::vector<Vector> pts;
    for (double r : {delta, 0.5 * delta}) {
      for (const auto& u : dirs) {
        const Vector p = x0 + r * u;
        if (sys.box.contains(p)) pts.push_back(p);
      }
    }
    return pts;
  };
  auto probe = [&](double delta) {
    RingResult out;
    double worst = -1.0;
    for (const auto& p : ring(delta)) {
      const Trajectory tr = solve(sys, p, opts.flow);
      const double d = sup_metric(ref, tr);
      if (d > worst) {
        worst = d;
        out.growing = still_growing(ref, tr, opts.growth_tol);
      }
    }
    out.worst = std::max(worst, 0.0);
    return out;
  };

  // Escape probe at the widest radius.
  const double widest = *std::max_element(eps_grid.begin(), eps_grid.end());
  probe(widest);
  const std::size_t skipped = 2 * dirs.size() - ring(widest).size();

  StabilityVerdict v;
  v.x0 = x0;
  v.horizon = opts.flow.horizon;
  v.stable = true;
  for (double eps : eps_grid) {
    EpsilonRow row;
    row.epsilon = eps;
    const double bound = eps * (1.0 + opts.eps_slack);
    double delta = eps;
    RingResult res = probe(delta);
    std::size_t k = 0;
    while (res.worst > bound && ++k < opts.max_halvings) {
      delta *= 0.5;
      res = probe(delta);
    }
    if (res.worst <= bound) {
      if (k > 0) {
        double lo = delta;
        double hi = 2.0 * delta;
        for (std::size_t i = 0; i < opts.bisections; ++i) {
          const double mid = 0.5 * (lo + hi);
          const RingResult m = probe(mid);
          if (m.worst <= bound) {
            lo = mid;
            res = m;
          } else {
            hi = mid;
          }
        }
        delta = lo;
      }
      row.delta = delta;
    }
    row.worst_distance = res.worst;
    row.growing_at_horizon = res.growing;
    v.stable = v.stable && row.delta.has_value();
    v.horizon_robust = v.horizon_robust && !row.growing_at_horizon;
    v.rows.push_back(row);
  }
  v.notes.push_back("verdict truncated at horizon " + format_real(v.horizon));
  if (!v.horizon_robust) {
    v.notes.push_back("stability not horizon-robust: distance still growing at the horizon");
  }
  if (skipped > 0) {
    v.notes.push_back(std::to_string(skipped) + " perturbed initial conditions at the widest radius fell outside the box");
  }
  return v;
}

TransportReport stability_transport_demo(const SmoothMap& f, const FlowSystem& x, const FlowSystem& y,
                                         const Vector& x0, const TransportOptions& opts) {
  if (opts.map_grid.empty()) throw Error("the system-map check needs a grid");
  TransportReport rep;
  rep.map = check_system_map(f, x, y, opts.map_grid, opts.map_tol);
  if (!rep.map.pass()) {
    throw Error("f does not relate " + x.name + " to " + y.name + ": residual " +
                format_real(rep.map.max_residual) + " at " + format_vector(rep.map.worst_point));
  }
  if (f.out_dim > f.in_dim) throw Error("openness spot check: f cannot be open into a higher dimension");

  rep.min_singular_value = std::numeric_limits<double>::infinity();
  const std::size_t n = std::max<std::size_t>(opts.open_samples, 2);
  for (std::size_t i = 0; i < x.box.dim(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      Vector p = x0;
      p[static_cast<Eigen::Index>(i)] +=
          opts.open_radius * (-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1));
      if (!x.box.contains(p)) continue;
      const Matrix df = differential(f, x.box, p).jacobian;
      const Eigen::JacobiSVD<Matrix> svd(df);
      rep.min_singular_value = std::min(rep.min_singular_value, svd.singularValues().minCoeff());
    }
  }
  if (!(rep.min_singular_value > opts.rank_tol)) {
    throw Error("openness spot check failed near " + format_vector(x0) + ": smallest singular value " +
                format_real(rep.min_singular_value));
  }
  rep.fx0 = f(x0);
  rep.source = empirical_stability(x, x0, opts.eps_grid, opts.stability);
  rep.target = empirical_stability(y, rep.fx0, opts.eps_grid, opts.stability);
  return rep;
}

std::string delta_epsilon_csv(const StabilityVerdict& v) {
  std::string out = "epsilon,delta,worst_distance,growing_at_horizon\n";
  for (const auto& r : v.rows) {
    out += format_real(r.epsilon) + "," + (r.delta ? format_real(*r.delta) : std::string()) + "," +
           format_real(r.worst_distance) + "," + (r.growing_at_horizon ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace hybrid
