#include "pbf/optimize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "pbf/doe.hpp"
#include "pbf/error.hpp"
#include "pbf/risk.hpp"
#include "pbf/rng.hpp"

namespace pbf {

std::string to_string(Solver s) {
  return s == Solver::penalty_nelder_mead ? "penalty-nelder-mead" : "cobyla-like";
}

Solver solver_from_string(const std::string& s) {
  if (s == "penalty-nelder-mead") return Solver::penalty_nelder_mead;
  if (s == "cobyla-like") return Solver::cobyla_like;
  throw Error("unknown solver '" + s + "' (expected penalty-nelder-mead or cobyla-like)");
}

std::string to_string(RiskConstraint c) { return c == RiskConstraint::bpof ? "bpof" : "pof"; }

RiskConstraint risk_constraint_from_string(const std::string& s) {
  if (s == "bpof") return RiskConstraint::bpof;
  if (s == "pof") return RiskConstraint::pof;
  throw Error("unknown risk constraint '" + s + "' (expected bpof or pof)");
}

void OptimizeConfig::validate() const {
  require(alpha_t > 0.0 && alpha_t < 1.0, "alpha_T must lie in (0, 1)");
  require(tau > 0.0, "tau must be positive");
  require(n_mc >= 100, "n_mc must be at least 100");
  const auto box = default_input_bounds();
  auto inside = [](const Interval& in, const Interval& outer) {
    return in.lower < in.upper && in.lower >= outer.lower && in.upper <= outer.upper;
  };
  require(inside(speed_bounds, box[0]), "speed bounds must lie within [100, 1000] mm/s");
  require(inside(power_bounds, box[1]), "power bounds must lie within [20, 200] W");
  require(t_lower < t_upper, "temperature window is empty");
  require(length > 0.0, "scan length must be positive");
  require(max_iters >= 1, "max_iters must be at least 1");
  require(restarts >= 0, "restarts must be non-negative");
  require(constraint_tol >= 0.0, "constraint_tol must be non-negative");
  require(x_tol > 0.0, "x_tol must be positive");
}

double energy(const DesignPoint& d, double length) {
  require(d.speed > 0.0, "scanning speed must be positive");
  return d.power * length / d.speed;
}

double bpof_lhs(std::span<const double> sigma_max, double zeta, double tau) {
  require(!sigma_max.empty(), "sample set is empty");
  require(zeta < tau, "zeta must be below tau");
  if (std::isinf(tau)) return 0.0;
  return risk::bpof_ratio(sigma_max, zeta, tau);
}

bool is_feasible(const ConstraintValues& c, const OptimizeConfig& cfg) {
  const double t_scale =
      std::isfinite(cfg.t_lower) && std::isfinite(cfg.t_upper) ? cfg.t_upper - cfg.t_lower : 1.0;
  const double t_tol = cfg.constraint_tol * t_scale;
  return c.risk <= (1.0 - cfg.alpha_t) + cfg.constraint_tol &&
         c.t_max_hat >= cfg.t_lower - t_tol && c.t_max_hat <= cfg.t_upper + t_tol;
}

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double pof_of(const std::vector<double>& sigma, double tau) {
  std::size_t n = 0;
  for (double s : sigma) n += s > tau ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(sigma.size());
}

using Vec3 = Eigen::Vector3d;

struct Point {
  Vec3 u = Vec3::Zero();  // projected normalized coordinates
  DesignPoint d;
  double zeta = 0.0;
  double energy = 0.0;
  ConstraintValues c;
  std::array<double, 3> viol{};  // risk, below window, above window (normalized)
  double box_excess2 = 0.0;
  bool feasible = false;

  double total_violation() const { return viol[0] + viol[1] + viol[2]; }
};

class Problem {
public:
  Problem(const BundleEvaluator& eval, const OptimizeConfig& cfg)
      : eval_(eval), cfg_(cfg), sigma_(eval.size()), tmax_(eval.size()) {
    energy_ref_ = energy({cfg.speed_bounds.lower, cfg.power_bounds.upper}, cfg.length);
    t_scale_ = std::isfinite(cfg.t_lower) && std::isfinite(cfg.t_upper)
                   ? cfg.t_upper - cfg.t_lower
                   : 1.0;
    zeta_active_ = cfg.constraint == RiskConstraint::bpof && std::isfinite(cfg.tau);
  }

  int evaluations() const { return evaluations_; }
  double energy_ref() const { return energy_ref_; }
  bool zeta_active() const { return zeta_active_; }

  DesignPoint design(const Vec3& u) const {
    return {cfg_.speed_bounds.lower + u(0) * cfg_.speed_bounds.width(),
            cfg_.power_bounds.lower + u(1) * cfg_.power_bounds.width()};
  }

  double zeta_of(double u2) const { return zeta_active_ ? u2 * cfg_.tau : 0.0; }

  double u_of_zeta(double zeta) const {
    return zeta_active_ ? std::clamp(zeta / cfg_.tau, 0.0, kZetaMax) : 0.0;
  }

  Vec3 to_unit(const DesignPoint& d, double zeta) const {
    return {(d.speed - cfg_.speed_bounds.lower) / cfg_.speed_bounds.width(),
            (d.power - cfg_.power_bounds.lower) / cfg_.power_bounds.width(), u_of_zeta(zeta)};
  }

  static Vec3 project(const Vec3& u) {
    return {std::clamp(u(0), 0.0, 1.0), std::clamp(u(1), 0.0, 1.0), std::clamp(u(2), 0.0, kZetaMax)};
  }

  Point evaluate(const Vec3& raw) {
    Point p;
    p.u = project(raw);
    p.box_excess2 = (raw - p.u).squaredNorm();
    p.d = design(p.u);
    p.zeta = zeta_of(p.u(2));
    p.energy = energy(p.d, cfg_.length);
    run(p.d);
    p.c.t_max_hat = mean(tmax_);
    p.c.risk = cfg_.constraint == RiskConstraint::pof ? pof_of(sigma_, cfg_.tau)
                                                      : bpof_lhs(sigma_, p.zeta, cfg_.tau);
    fill_violation(p);
    return p;
  }

  // Constraint values with zeta at its minimizing value for this design.
  Point evaluate_profile(const DesignPoint& d, double zeta_fallback) {
    Point p;
    p.d = d;
    p.energy = energy(d, cfg_.length);
    run(d);
    p.c.t_max_hat = mean(tmax_);
    p.zeta = zeta_fallback;
    if (cfg_.constraint == RiskConstraint::pof) {
      p.c.risk = pof_of(sigma_, cfg_.tau);
    } else if (!zeta_active_) {
      p.c.risk = 0.0;
    } else {
      const risk::SampleSet s(sigma_);
      const auto m = risk::bpof_minform(s, cfg_.tau);
      const double fallback = bpof_lhs(sigma_, zeta_fallback, cfg_.tau);
      if (m.zeta < cfg_.tau && m.zeta >= 0.0) {
        const double at_min = bpof_lhs(sigma_, m.zeta, cfg_.tau);
        if (at_min <= fallback) {
          p.zeta = m.zeta;
          p.c.risk = at_min;
        } else {
          p.c.risk = fallback;
        }
      } else {
        p.c.risk = fallback;
      }
    }
    p.u = to_unit(d, p.zeta);
    fill_violation(p);
    return p;
  }

  // Normalized constraint functions, feasible when >= 0. Unbounded sides are skipped.
  std::vector<double> constraint_functions(const Point& p) const {
    std::vector<double> c;
    const double budget = 1.0 - cfg_.alpha_t;
    c.push_back((budget - p.c.risk) / budget);
    if (std::isfinite(cfg_.t_lower)) c.push_back((p.c.t_max_hat - cfg_.t_lower) / t_scale_);
    if (std::isfinite(cfg_.t_upper)) c.push_back((cfg_.t_upper - p.c.t_max_hat) / t_scale_);
    return c;
  }

private:
  static constexpr double kZetaMax = 1.0 - 1e-9;

  void run(const DesignPoint& d) {
    eval_.evaluate(d, sigma_, tmax_);
    ++evaluations_;
  }

  void fill_violation(Point& p) const {
    const double budget = 1.0 - cfg_.alpha_t;
    p.viol[0] = std::max(0.0, p.c.risk - budget) / budget;
    p.viol[1] = std::isfinite(cfg_.t_lower)
                    ? std::max(0.0, cfg_.t_lower - p.c.t_max_hat) / t_scale_
                    : 0.0;
    p.viol[2] = std::isfinite(cfg_.t_upper)
                    ? std::max(0.0, p.c.t_max_hat - cfg_.t_upper) / t_scale_
                    : 0.0;
    p.feasible = is_feasible(p.c, cfg_);
  }

  const BundleEvaluator& eval_;
  const OptimizeConfig& cfg_;
  std::vector<double> sigma_;
  std::vector<double> tmax_;
  double energy_ref_ = 1.0;
  double t_scale_ = 1.0;
  bool zeta_active_ = true;
  int evaluations_ = 0;
};

// Best feasible point by energy and least-infeasible point by violation.
struct Tracker {
  bool have_feasible = false;
  Point best_feasible;
  Point least_infeasible;
  bool have_any = false;

  void offer(const Point& p) {
    if (p.feasible && (!have_feasible || p.energy < best_feasible.energy)) {
      best_feasible = p;
      have_feasible = true;
    }
    if (!have_any || p.total_violation() < least_infeasible.total_violation() ||
        (p.total_violation() == least_infeasible.total_violation() &&
         p.energy < least_infeasible.energy)) {
      least_infeasible = p;
      have_any = true;
    }
  }

  const Point& best() const { return have_feasible ? best_feasible : least_infeasible; }

  Point final_iterate;  // where the solver stopped
};

void record(OptimizationResult& out, int iteration, const Point& p) {
  out.history.push_back({iteration, p.d, p.zeta, p.energy, p.c.risk, p.c.t_max_hat, p.feasible});
}

// ---------------------------------------------------------------------------
// Penalized Nelder-Mead

double penalty_merit(const Point& p, double mu, double energy_ref) {
  double v2 = 0.0;
  for (double v : p.viol) v2 += v * v;
  return p.energy / energy_ref + mu * (v2 + p.box_excess2);
}

struct Vertex {
  Vec3 x;  // unprojected simplex coordinates
  Point p;
  double f;
};

void nelder_mead(Problem& prob, const OptimizeConfig& cfg, OptimizationResult& out,
                 Tracker& tracker) {
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const Point start = prob.evaluate_profile(out.d0, 0.0);
  tracker.offer(start);
  record(out, 0, start);

  double mu = 1000.0;
  int iter = 0;
  Vec3 centre = start.u;
  Point last_best = start;
  double previous_best = std::numeric_limits<double>::infinity();
  for (int round = 0; round <= cfg.restarts && iter < cfg.max_iters; ++round) {
    const double step = round == 0 ? 0.15 : 0.05;
    std::vector<Vertex> simplex;
    auto make = [&](const Vec3& x) {
      Vertex v{x, prob.evaluate(x), 0.0};
      v.f = penalty_merit(v.p, mu, prob.energy_ref());
      tracker.offer(v.p);
      return v;
    };
    simplex.push_back(make(centre));
    for (int i = 0; i < 3; ++i) {
      Vec3 x = centre;
      x(i) += (x(i) + step <= 1.0) ? step : -step;
      simplex.push_back(make(x));
    }

    while (iter < cfg.max_iters) {
      std::stable_sort(simplex.begin(), simplex.end(),
                       [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      double diam = 0.0;
      for (std::size_t i = 1; i < simplex.size(); ++i) {
        diam = std::max(diam, (simplex[i].x - simplex[0].x).lpNorm<Eigen::Infinity>());
      }
      if (diam < cfg.x_tol) break;
      ++iter;

      Vec3 mid = Vec3::Zero();
      for (int i = 0; i < 3; ++i) mid += simplex[i].x;
      mid /= 3.0;
      Vertex& worst = simplex[3];
      const Vertex r = make(mid + (mid - worst.x));
      if (r.f < simplex[0].f) {
        const Vertex e = make(mid + 2.0 * (mid - worst.x));
        worst = e.f < r.f ? e : r;
      } else if (r.f < simplex[2].f) {
        worst = r;
      } else {
        const bool outside = r.f < worst.f;
        const Vertex c = make(outside ? mid + 0.5 * (r.x - mid) : mid + 0.5 * (worst.x - mid));
        if (c.f < std::min(r.f, worst.f)) {
          worst = c;
        } else {
          for (int i = 1; i < 4; ++i) {
            simplex[i] = make(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
          }
        }
      }
      const auto best_it = std::min_element(
          simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
      record(out, iter, best_it->p);
      last_best = best_it->p;
    }

    // A restart that neither finds a cheaper feasible point nor needs a
    // stiffer penalty ends the search.
    const double best_energy = tracker.have_feasible ? tracker.best_feasible.energy
                                                     : std::numeric_limits<double>::infinity();
    if (last_best.feasible && round > 0 && best_energy >= previous_best * (1.0 - 1e-6)) break;
    previous_best = best_energy;
    // Stagnated on an infeasible point: stiffen the penalty.
    if (!last_best.feasible) mu *= 2.0;
    const Vec3 base = tracker.have_feasible ? tracker.best_feasible.u : last_best.u;
    for (int i = 0; i < 3; ++i) centre(i) = base(i) + rng.uniform(-0.05, 0.05);
    centre = Problem::project(centre);
  }
  tracker.final_iterate = last_best;
  out.iterations = iter;
  out.iteration_limit = iter >= cfg.max_iters;
}

// ---------------------------------------------------------------------------
// Linear-model trust region (COBYLA-like)
//
// Works on (v, P) only: zeta enters nothing but the risk constraint, so every
// evaluation uses its exact minimizer, which is the tightest value the
// constraint can take.

using Vec2 = Eigen::Vector2d;

struct Line {
  Vec2 a;
  double b;  // a . s = b
};

// Minimizes g.s + mu * sum_j max(0, -(c_j + G_j.s)) over the box lo <= s <= hi.
// The merit is piecewise linear, so some vertex of the arrangement of box
// edges and kink lines is optimal. Ties go to the shortest step.
Vec2 solve_linear_subproblem(const Vec2& g, const std::vector<double>& c,
                             const std::vector<Vec2>& grads, double mu, const Vec2& lo,
                             const Vec2& hi) {
  std::vector<Line> lines;
  for (int i = 0; i < 2; ++i) {
    lines.push_back({Vec2::Unit(i), lo(i)});
    lines.push_back({Vec2::Unit(i), hi(i)});
    lines.push_back({Vec2::Unit(i), 0.0});
  }
  for (std::size_t j = 0; j < c.size(); ++j) lines.push_back({grads[j], -c[j]});
  auto merit = [&](const Vec2& s) {
    double m = g.dot(s);
    for (std::size_t j = 0; j < c.size(); ++j) m += mu * std::max(0.0, -(c[j] + grads[j].dot(s)));
    return m;
  };
  Vec2 best = Vec2::Zero();
  double best_m = merit(best);
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      Eigen::Matrix2d m;
      m.row(0) = lines[a].a.transpose();
      m.row(1) = lines[b].a.transpose();
      const double det = m.determinant();
      if (std::abs(det) < 1e-14) continue;
      const Vec2 s = m.inverse() * Vec2(lines[a].b, lines[b].b);
      bool inside = true;
      for (int i = 0; i < 2; ++i) {
        const double tol = 1e-12 * (1.0 + std::abs(hi(i) - lo(i)));
        inside = inside && s(i) >= lo(i) - tol && s(i) <= hi(i) + tol;
      }
      if (!inside) continue;
      const Vec2 sc = s.cwiseMax(lo).cwiseMin(hi);
      const double v = merit(sc);
      const double tie = 1e-12 * (1.0 + std::abs(best_m));
      if (v < best_m - tie || (v <= best_m + tie && sc.norm() < best.norm())) {
        best_m = std::min(v, best_m);
        best = sc;
      }
    }
  }
  return best;
}

void cobyla_like(Problem& prob, const OptimizeConfig& cfg, OptimizationResult& out,
                 Tracker& tracker) {
  auto at = [&](const Vec2& u, double zeta) {
    const Vec2 uc = u.cwiseMax(0.0).cwiseMin(1.0);
    const Point p = prob.evaluate_profile(prob.design(Vec3(uc(0), uc(1), 0.0)), zeta);
    tracker.offer(p);
    return p;
  };
  auto coords = [](const Point& p) { return Vec2(p.u(0), p.u(1)); };
  auto objective = [&](const Point& p) { return p.energy / prob.energy_ref(); };
  auto l1_merit = [&](const Point& p, double mu) {
    double m = objective(p);
    for (double c : prob.constraint_functions(p)) m += mu * std::max(0.0, -c);
    return m;
  };

  Point x0 = prob.evaluate_profile(out.d0, 0.0);
  tracker.offer(x0);
  record(out, 0, x0);

  double rho = 0.1;
  double mu = 1.0;
  std::vector<Point> others;
  auto rebuild = [&]() {
    others.clear();
    for (int i = 0; i < 2; ++i) {
      Vec2 u = coords(x0);
      u(i) += (u(i) + rho <= 1.0) ? rho : -rho;
      others.push_back(at(u, x0.zeta));
    }
  };
  rebuild();

  int iter = 0;
  while (iter < cfg.max_iters && rho >= cfg.x_tol) {
    ++iter;
    // Linear interpolation models through x0 and the two other points.
    Eigen::Matrix2d dx;
    for (int i = 0; i < 2; ++i) dx.row(i) = (coords(others[i]) - coords(x0)).transpose();
    Eigen::FullPivLU<Eigen::Matrix2d> lu(dx);
    if (lu.rank() < 2) {
      rebuild();
      continue;
    }
    auto fit = [&](auto value) {
      Vec2 rhs;
      for (int i = 0; i < 2; ++i) rhs(i) = value(others[i]) - value(x0);
      return Vec2(lu.solve(rhs));
    };
    const Vec2 gf = fit(objective);
    const auto c0 = prob.constraint_functions(x0);
    std::vector<Vec2> gc;
    for (std::size_t j = 0; j < c0.size(); ++j) {
      gc.push_back(fit([&](const Point& p) { return prob.constraint_functions(p)[j]; }));
    }
    // Only constraints that can become active inside the trust region set
    // the penalty weight.
    for (std::size_t j = 0; j < gc.size(); ++j) {
      const double gn = gc[j].norm();
      if (gn > 1e-12 && c0[j] <= 2.0 * rho * gn) mu = std::max(mu, 2.0 * gf.norm() / gn);
    }

    Vec2 lo, hi;
    for (int i = 0; i < 2; ++i) {
      lo(i) = std::max(-rho, -x0.u(i));
      hi(i) = std::min(rho, 1.0 - x0.u(i));
    }
    const Vec2 s = solve_linear_subproblem(gf, c0, gc, mu, lo, hi);
    double m0 = 0.0, m1 = gf.dot(s);
    for (std::size_t j = 0; j < c0.size(); ++j) {
      m0 += mu * std::max(0.0, -c0[j]);
      m1 += mu * std::max(0.0, -(c0[j] + gc[j].dot(s)));
    }
    const double predicted = m0 - m1;
    if (s.norm() < 0.1 * rho || predicted <= 0.0) {
      rho *= 0.5;
      rebuild();
      record(out, iter, x0);
      continue;
    }
    Point trial = at(coords(x0) + s, x0.zeta);
    double ratio = (l1_merit(x0, mu) - l1_merit(trial, mu)) / predicted;
    if (ratio < 0.1) {
      // Second-order correction: pull the trial point back onto the
      // linearized constraints it violates, then retest.
      const auto ct = prob.constraint_functions(trial);
      Vec2 corr = Vec2::Zero();
      for (std::size_t j = 0; j < ct.size(); ++j) {
        const double gn2 = gc[j].squaredNorm();
        if (ct[j] < 0.0 && gn2 > 1e-24) corr -= ct[j] / gn2 * gc[j];
      }
      if (corr.norm() > 0.0 && corr.norm() <= rho) {
        const Point fixed = at(coords(x0) + s + corr, x0.zeta);
        const double r2 = (l1_merit(x0, mu) - l1_merit(fixed, mu)) / predicted;
        if (r2 > ratio) {
          trial = fixed;
          ratio = r2;
        }
      }
    }
    if (ratio >= 0.1) {
      // Replace the interpolation point farthest from the new centre.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < others.size(); ++i) {
        const double d = (coords(others[i]) - coords(trial)).norm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      others[far] = x0;
      x0 = trial;
      if (ratio > 0.7) rho = std::min(0.5, 2.0 * rho);
    } else {
      rho *= 0.5;
      if (l1_merit(trial, mu) < l1_merit(x0, mu)) x0 = trial;
      rebuild();
    }
    record(out, iter, x0);
  }
  tracker.final_iterate = x0;
  out.iterations = iter;
  out.iteration_limit = iter >= cfg.max_iters;
}

}  // namespace

ConstraintValues evaluate_constraints(const DesignPoint& d, double zeta,
                                      const BundleEvaluator& eval, const OptimizeConfig& cfg) {
  require(eval.size() > 0, "sample set is empty");
  require(zeta < cfg.tau, "zeta must be below tau");
  std::vector<double> sigma(eval.size()), tmax(eval.size());
  eval.evaluate(d, sigma, tmax);
  ConstraintValues out;
  out.t_max_hat = mean(tmax);
  out.risk = cfg.constraint == RiskConstraint::pof ? pof_of(sigma, cfg.tau)
                                                   : bpof_lhs(sigma, zeta, cfg.tau);
  return out;
}

ConstraintValues evaluate_constraints(const DesignPoint& d, double zeta, const SurrogateBundle& b,
                                      std::span<const RandomInputs> samples,
                                      const OptimizeConfig& cfg) {
  require(!samples.empty(), "sample set is empty");
  const BundleEvaluator eval(b, samples);
  return evaluate_constraints(d, zeta, eval, cfg);
}

OptimizationResult solve(const SurrogateBundle& b, const OptimizeConfig& cfg, const DesignPoint& d0) {
  cfg.validate();
  const auto samples = sample_random_inputs(static_cast<std::size_t>(cfg.n_mc), b.input_bounds, cfg.seed);
  const BundleEvaluator eval(b, samples);
  return solve(eval, cfg, d0);
}

OptimizationResult solve(const BundleEvaluator& eval, const OptimizeConfig& cfg,
                         const DesignPoint& d0) {
  cfg.validate();
  const double tol_v = 1e-9 * cfg.speed_bounds.width();
  const double tol_p = 1e-9 * cfg.power_bounds.width();
  require(d0.speed >= cfg.speed_bounds.lower - tol_v && d0.speed <= cfg.speed_bounds.upper + tol_v &&
              d0.power >= cfg.power_bounds.lower - tol_p &&
              d0.power <= cfg.power_bounds.upper + tol_p,
          "initial design outside the design box");

  Problem prob(eval, cfg);
  OptimizationResult out;
  out.d0 = {std::clamp(d0.speed, cfg.speed_bounds.lower, cfg.speed_bounds.upper),
            std::clamp(d0.power, cfg.power_bounds.lower, cfg.power_bounds.upper)};
  Tracker tracker;
  if (cfg.solver == Solver::penalty_nelder_mead) {
    nelder_mead(prob, cfg, out, tracker);
  } else {
    cobyla_like(prob, cfg, out, tracker);
  }

  // Move zeta to its minimizing value, then pull a feasible answer toward the
  // final iterate when that one is cheaper but slightly infeasible.
  Point best = prob.evaluate_profile(tracker.best().d, tracker.best().zeta);
  if (best.feasible) {
    const Point& target = tracker.final_iterate;
    if (target.energy < best.energy) {
      DesignPoint a = best.d, b = target.d;
      for (int i = 0; i < 40; ++i) {
        const DesignPoint m{0.5 * (a.speed + b.speed), 0.5 * (a.power + b.power)};
        const Point pm = prob.evaluate_profile(m, best.zeta);
        if (pm.feasible && pm.energy <= best.energy) {
          best = pm;
          a = m;
        } else {
          b = m;
        }
      }
    }
  }
  out.d_star = best.d;
  out.zeta_star = best.zeta;
  out.energy = best.energy;
  out.bpof_lhs = best.c.risk;
  out.t_max_hat = best.c.t_max_hat;
  out.feasible = best.feasible;
  out.evaluations = prob.evaluations();
  return out;
}

}  // namespace pbf
