// Acceptance run: one line per criterion, exit status 1 if any fails.
//
//   acceptance [work_dir]
//
// The end-to-end criteria run the full default pipeline twice under
// work_dir/run1 and work_dir/run2.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pbf/cli.hpp"
#include "pbf/doe.hpp"
#include "pbf/persist.hpp"
#include "pbf/pipeline.hpp"
#include "pbf/reduction.hpp"
#include "pbf/risk.hpp"
#include "pbf/rng.hpp"
#include "pbf/thermal.hpp"

using namespace pbf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double normal(Rng& rng) {
  const double u = 1.0 - rng.uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * rng.uniform());
}

// Sample sets with ties, heavy tails and mixed supports.
std::vector<double> random_set(Rng& rng, std::size_t m) {
  std::vector<double> v(m);
  switch (rng.index(4)) {
    case 0:
      for (auto& x : v) x = rng.uniform();
      break;
    case 1:
      for (auto& x : v) x = -std::log1p(-rng.uniform());
      break;
    case 2:
      for (auto& x : v) x = 800.0 + 40.0 * normal(rng);
      break;
    default:
      for (auto& x : v) x = static_cast<double>(rng.index(5));
      break;
  }
  return v;
}

// E[(g - z)^+] / (tau - z), straight from the definition.
double ratio_oracle(const std::vector<double>& g, double z, double tau) {
  double s = 0.0;
  for (double x : g) s += std::max(0.0, x - z);
  return s / static_cast<double>(g.size()) / (tau - z);
}

// Brute-force bpof: 1000-point zeta grid, then a golden-section pass over
// the two cells around the best grid point (the ratio is quasiconvex).
double bpof_oracle(const std::vector<double>& g, double tau) {
  const double mx = *std::max_element(g.begin(), g.end());
  const double mn = *std::min_element(g.begin(), g.end());
  if (tau >= mx) return 0.0;
  const double base = std::min(mn, tau);
  const double lo = base - (mx - base) - 1.0;
  const int n = 1000;
  const double h = (tau - lo) / n;
  int best_i = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double r = ratio_oracle(g, lo + i * h, tau);
    if (r < best) {
      best = r;
      best_i = i;
    }
  }
  double a = lo + std::max(0, best_i - 1) * h;
  double b = std::min(lo + (best_i + 1) * h, std::nextafter(tau, lo));
  const double k = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - k * (b - a), d = a + k * (b - a);
    if (ratio_oracle(g, c, tau) <= ratio_oracle(g, d, tau))
      b = d;
    else
      a = c;
  }
  best = std::min(best, ratio_oracle(g, 0.5 * (a + b), tau));
  // Breakpoints are candidates too; the grid cell may straddle one.
  for (double x : g)
    if (x < tau) best = std::min(best, ratio_oracle(g, x, tau));
  return std::clamp(best, 0.0, 1.0);
}

Outcome risk_oracles() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::vector<double> u(100000), e(100000);
  for (auto& x : u) x = rng.uniform();
  for (auto& x : e) x = -std::log1p(-rng.uniform());
  const risk::SampleSet su(u), se(e);
  const double q = risk::quantile(su, 0.95);
  const double qb = risk::superquantile(su, 0.95);
  const double qe = risk::superquantile(se, 0.95);
  const double want_e = -std::log(0.05) + 1.0;
  const double dt = seconds_since(t0);
  Outcome o;
  o.pass = std::abs(q - 0.95) <= 0.01 && std::abs(qb - 0.975) <= 0.01 &&
           std::abs(qe - want_e) <= 0.05 && dt < 1.0;
  o.detail = fmt("uniform Q=%.4f Qbar=%.4f, exponential Qbar=%.4f (want %.4f), %.3f s", q, qb, qe,
                 want_e, dt);
  return o;
}

Outcome bpof_equivalence() {
  Rng rng(77);
  double worst_grid = 0.0, worst_tail = 0.0;
  bool ok = true;
  for (int t = 0; t < 200; ++t) {
    const auto g = random_set(rng, 1 + rng.index(50));
    const risk::SampleSet s(g);
    const double spread = std::max(1.0, s.max() - s.min());
    const double tau = rng.uniform(s.min() - 0.2 * spread, s.max() + 0.2 * spread);
    const double diff = std::abs(risk::bpof_minform(s, tau).bpof - bpof_oracle(g, tau));
    worst_grid = std::max(worst_grid, diff);
    ok = ok && diff <= 1e-6;

    const double alpha = rng.uniform(0.05, 0.95);
    const auto tail = risk::bpof_tail(s, alpha);
    const double dtail = std::abs(risk::bpof_minform(s, tail.tau).bpof - tail.bpof);
    const double m = static_cast<double>(g.size());
    worst_tail = std::max(worst_tail, dtail * m);
    ok = ok && dtail <= 1.0 / m + 1e-12;
  }
  return {ok, fmt("max |minform - grid| = %.2e, max |tail - minform| = %.3f / m", worst_grid,
                  worst_tail)};
}

Outcome risk_ordering() {
  Rng rng(303);
  int bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto g = random_set(rng, 1 + rng.index(200));
    const risk::SampleSet s(g);
    const double spread = std::max(1.0, s.max() - s.min());
    const double tau = rng.uniform(s.min() - 0.2 * spread, s.max() + 0.2 * spread);
    const double alpha = rng.uniform(0.01, 0.99);
    const double tol = 1e-12 * (1.0 + std::abs(s.max()));
    if (risk::bpof_minform(s, tau).bpof < risk::pof(s, tau)) ++bad;
    if (risk::superquantile(s, alpha) < risk::quantile(s, alpha) - tol) ++bad;
  }
  return {bad == 0, fmt("%d violations in 10000 trials", bad)};
}

Outcome svd_suite() {
  const auto t0 = Clock::now();
  Rng rng(5);
  Eigen::MatrixXd m(10, 6);
  for (auto& x : m.reshaped()) x = rng.uniform(-1.0, 1.0);
  const double rec = (reconstruct(decompose(m, 6)) - m).norm() / m.norm();

  Eigen::MatrixXd big(40, 31);
  for (auto& x : big.reshaped()) x = rng.uniform(0.0, 1.0);
  const auto errs = error_curve(big, 31);
  bool mono = true;
  for (std::size_t k = 1; k < errs.size(); ++k) mono = mono && errs[k] <= errs[k - 1] + 1e-15;

  const std::vector<double> err_t{0.10325313944291051, 0.04530458923079103, 0.008644761206775068,
                                  0.0032871406645308397, 0.001943224380352817, 0.0015067953784717004,
                                  0.0012720758890423156, 0.0010631241969934668, 0.0008968229291920379,
                                  0.0007490274357354919};
  const std::vector<double> err_s{0.39987282961628545, 0.26315456388152675, 0.15059725663747497,
                                  0.13418503344473287, 0.10370120666329985, 0.09284355897732577,
                                  0.08453758821970234, 0.07918093976700538, 0.07501744014285021,
                                  0.07074871407171848};
  const int kt = select_feature_count(err_t, 0.05, 0.02);
  const int ks = select_feature_count(err_s, 0.05, 0.02);
  const double dt = seconds_since(t0);
  return {rec <= 1e-10 && mono && kt == 2 && ks == 5 && dt < 1.0,
          fmt("reconstruction %.1e, curve %s, K_T=%d, K_S=%d, %.3f s", rec,
              mono ? "non-increasing" : "INCREASES", kt, ks, dt)};
}

Eigen::MatrixXd normalized_lhs(int m, std::uint64_t seed) {
  const auto b = default_input_bounds();
  const auto d = generate_doe(m, b, seed);
  Eigen::MatrixXd x(m, 6);
  for (int i = 0; i < m; ++i) x.row(i) = normalize_inputs(d[i], b).transpose();
  return x;
}

Outcome active_subspace_recovery() {
  const std::vector<std::function<double(double)>> ridge = {
      [](double t) { return t + 0.3 * t * t; },
      [](double t) { return std::exp(0.5 * t); },
      [](double t) { return std::sin(t) + t; },
      [](double t) { return t * t * t / 3.0 + t; },
  };
  Rng rng(11);
  int hits = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd w(6);
    for (auto& x : w) x = normal(rng);
    w.normalize();
    const auto x = normalized_lhs(120, 1000 + t);
    const auto& g = ridge[t % ridge.size()];
    Eigen::VectorXd f(x.rows());
    for (int i = 0; i < x.rows(); ++i) f(i) = g(x.row(i).dot(w));
    const auto s = discover(estimate_gradients(x, f));
    const double cosang = std::min(1.0, std::abs(s.w1.col(0).dot(w)));
    const double deg = std::acos(cosang) * 180.0 / M_PI;
    worst = std::max(worst, deg);
    if (s.r == 1 && deg <= 5.0) ++hits;
  }
  return {hits >= 95, fmt("%d/100 recovered (worst angle %.2f deg)", hits, worst)};
}

Outcome gradient_fit() {
  // Finite differences of the fitted quadratic itself.
  Rng rng(21);
  double fd_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto x = normalized_lhs(60, 500 + t);
    Eigen::VectorXd f(x.rows());
    for (auto& v : f) v = rng.uniform(-1.0, 1.0);
    const auto q = QuadraticModel::fit(x, f);
    const Eigen::VectorXd p = x.row(t).transpose();
    const auto g = q.gradient(p);
    for (int j = 0; j < 6; ++j) {
      const double h = 1e-3;
      Eigen::VectorXd a = p, b = p;
      a(j) += h;
      b(j) -= h;
      fd_err = std::max(fd_err, std::abs((q.value(a) - q.value(b)) / (2 * h) - g(j)));
    }
  }

  // Gradients of a global quadratic are affine, so the planted functions keep
  // their non-affine gradient part small; exp(0.4 (x1 - x5)) already misses
  // by about 0.11 at the corners.
  struct Planted {
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  };
  const std::vector<Planted> planted = {
      {[](const Eigen::VectorXd& x) {
         return std::sin(0.5 * x(0)) + std::exp(0.3 * x(1)) + 0.2 * x(2) * x(3);
       },
       [](const Eigen::VectorXd& x) {
         Eigen::VectorXd g = Eigen::VectorXd::Zero(6);
         g(0) = 0.5 * std::cos(0.5 * x(0));
         g(1) = 0.3 * std::exp(0.3 * x(1));
         g(2) = 0.2 * x(3);
         g(3) = 0.2 * x(2);
         return g;
       }},
      {[](const Eigen::VectorXd& x) { return std::log(4.0 + x(0) + x(1)); },
       [](const Eigen::VectorXd& x) {
         Eigen::VectorXd g = Eigen::VectorXd::Zero(6);
         g(0) = g(1) = 1.0 / (4.0 + x(0) + x(1));
         return g;
       }},
      {[](const Eigen::VectorXd& x) { return std::exp(0.25 * (x(0) - x(4))) + 0.5 * x(5) * x(5); },
       [](const Eigen::VectorXd& x) {
         Eigen::VectorXd g = Eigen::VectorXd::Zero(6);
         g(0) = 0.25 * std::exp(0.25 * (x(0) - x(4)));
         g(4) = -g(0);
         g(5) = x(5);
         return g;
       }},
  };
  double an_err = 0.0;
  for (std::size_t k = 0; k < planted.size(); ++k) {
    const auto x = normalized_lhs(120, 70 + k);
    Eigen::VectorXd f(x.rows());
    for (int i = 0; i < x.rows(); ++i) f(i) = planted[k].f(x.row(i).transpose());
    const auto g = estimate_gradients(x, f);
    for (int i = 0; i < x.rows(); ++i) {
      const Eigen::VectorXd want = planted[k].grad(x.row(i).transpose());
      an_err = std::max(an_err, (g.row(i).transpose() - want).cwiseAbs().maxCoeff());
    }
  }
  return {fd_err <= 1e-8 && an_err <= 0.08,
          fmt("vs finite differences %.1e, vs analytic %.4f", fd_err, an_err)};
}

Outcome thermal_simulator() {
  const ModelParams p;
  RandomInputs z;
  z.preheat = p.chamber_temp;
  const auto eq = simulate({500.0, 0.0}, z, p);
  double drift = 0.0;
  for (double t : eq.temps) drift = std::max(drift, std::abs(t - p.chamber_temp));
  for (double t : eq.peak_field) drift = std::max(drift, std::abs(t - p.chamber_temp));

  bool mono = true;
  double worst_time = 0.0;
  double last = 0.0;
  for (double P : {20.0, 65.0, 110.0, 155.0, 200.0}) {
    const auto t0 = Clock::now();
    const double T = simulate({500.0, P}, RandomInputs{}, p).max_temp();
    worst_time = std::max(worst_time, seconds_since(t0));
    mono = mono && T > last;
    last = T;
  }
  last = std::numeric_limits<double>::infinity();
  for (double v : {100.0, 325.0, 550.0, 775.0, 1000.0}) {
    const auto t0 = Clock::now();
    const double T = simulate({v, 160.0}, RandomInputs{}, p).max_temp();
    worst_time = std::max(worst_time, seconds_since(t0));
    mono = mono && T < last;
    last = T;
  }

  SimGridConfig fine;
  fine.cells_x *= 2;
  fine.cells_z *= 2;
  const double coarse_peak = simulate({500.0, 160.0}, RandomInputs{}, p).max_temp();
  const double fine_peak = simulate({500.0, 160.0}, RandomInputs{}, p, fine).max_temp();
  const double change = std::abs(fine_peak - coarse_peak) / std::abs(fine_peak);

  return {drift <= 1e-6 && mono && change < 0.02 && worst_time < 2.0,
          fmt("equilibrium drift %.1e C, sweeps %s, grid halving %.2f%% (%.1f -> %.1f C), "
              "slowest run %.3f s",
              drift, mono ? "monotone" : "NOT monotone", 100.0 * change, coarse_peak, fine_peak,
              worst_time)};
}

struct PipelineRun {
  double seconds = 0.0;
  bool ok = false;
  std::string error;
};

PipelineRun run_full(const fs::path& dir) {
  PipelineConfig cfg;
  cfg.output_dir = dir.string();
  fs::remove_all(dir);
  PipelineRun r;
  const auto t0 = Clock::now();
  try {
    run_pipeline(cfg);
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

Outcome end_to_end(const fs::path& dir, const PipelineRun& run) {
  if (!run.ok) return {false, "pipeline failed: " + run.error};
  PipelineConfig cfg;
  const auto summary = read_json(dir / "optimize.json");
  const auto& runs = summary.at("runs");
  const auto bundle = load_bundle(dir / "bundle.json");
  const auto samples = sample_random_inputs(cfg.optimize.n_mc, cfg.bounds, cfg.optimize.seed);
  const BundleEvaluator ev(bundle, samples);

  int feasible = 0;
  double e_min = std::numeric_limits<double>::infinity(), e_max = 0.0;
  double best_energy = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    const double e = r.at("energy").get<double>();
    e_min = std::min(e_min, e);
    e_max = std::max(e_max, e);
    if (r.at("feasible").get<bool>()) {
      ++feasible;
      best_energy = std::min(best_energy, e);
    }
  }

  // A start is feasible if some zeta satisfies the risk constraint there.
  bool beats_starts = true;
  int feasible_starts = 0;
  std::vector<double> sig(ev.size()), tmax(ev.size());
  for (const auto& d0 : cfg.starts) {
    ev.evaluate(d0, sig, tmax);
    ConstraintValues c;
    c.risk = risk::bpof_minform(risk::SampleSet(sig), cfg.optimize.tau).bpof;
    c.t_max_hat = std::accumulate(tmax.begin(), tmax.end(), 0.0) / static_cast<double>(tmax.size());
    if (is_feasible(c, cfg.optimize)) {
      ++feasible_starts;
      beats_starts = beats_starts && best_energy <= energy(d0, cfg.optimize.length);
    }
  }
  const double spread = (e_max - e_min) / e_min;
  return {run.seconds < 600.0 && feasible >= 3 && beats_starts && spread <= 0.10,
          fmt("%.1f s, %d/4 runs feasible, best E* = %.4f J (baseline), spread %.2f%%, "
              "%d of 4 starts feasible%s",
              run.seconds, feasible, best_energy, 100.0 * spread, feasible_starts,
              feasible_starts > 0 ? (beats_starts ? ", all beaten" : ", NOT all beaten") : "")};
}

Outcome validation_protocol(const fs::path& dir, const PipelineRun& run) {
  if (!run.ok) return {false, "pipeline failed: " + run.error};
  PipelineConfig cfg;
  const auto report = report_from_json(read_json(dir / "validation.json"));
  const bool surr_ok = std::abs(report.rel_diff) <= 0.05;

  // Self-validation at the optimizer's zeta, as the pipeline runs it.
  const auto model = make_response_model(cfg);
  const auto at_star = self_validate(report.d_star, report.zeta_star, cfg, *model);
  const bool star_ok = std::abs(at_star.rel_diff) <= 2.0 * at_star.rel_std_error;

  // zeta* sits above every simulator sample, which makes the comparison
  // above exact. Repeat it with the 0.95-quantile of an independent pilot
  // batch of model runs as the proxy, so that both sides carry Monte Carlo
  // noise.
  const auto pilot = sample_random_inputs(200, cfg.bounds, cfg.validation_seed + 1000);
  std::vector<double> sig;
  for (const auto& z : pilot) sig.push_back(model->run(make_input(report.d_star, z)).sigma_max);
  const double zq = risk::quantile(risk::SampleSet(sig), report.alpha);
  const auto at_q = self_validate(report.d_star, zq, cfg, *model);
  const bool q_ok = std::abs(at_q.rel_diff) <= 2.0 * at_q.rel_std_error;

  return {surr_ok && star_ok && q_ok,
          fmt("rel_diff %.3f%% (q_sim %.2f, q_surr %.2f); self at zeta* %.2e (se %.1e); "
              "self at pilot Q_0.95=%.1f %.3f%% (se %.3f%%)",
              100.0 * report.rel_diff, report.q_sim, report.q_surr, at_star.rel_diff,
              at_star.rel_std_error, zq, 100.0 * at_q.rel_diff, 100.0 * at_q.rel_std_error)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Outcome determinism(const fs::path& a, const PipelineRun& ra, const fs::path& b,
                    const PipelineRun& rb) {
  if (!ra.ok || !rb.ok) return {false, "pipeline failed: " + ra.error + rb.error};
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  int differ = 0;
  std::string which;
  for (const auto& n : names) {
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) {
      ++differ;
      which += " " + n;
    }
  }
  for (const auto& e : fs::directory_iterator(b))
    if (!fs::exists(a / e.path().filename())) ++differ;
  return {differ == 0 && !names.empty(),
          fmt("%zu artifacts compared, %d differ%s", names.size(), differ, which.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  fs::create_directories(work);

  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "risk oracles", guarded(risk_oracles));
  report(2, "bpof estimator equivalence", guarded(bpof_equivalence));
  report(3, "bpof >= pof, Qbar >= Q", guarded(risk_ordering));
  report(4, "svd suite", guarded(svd_suite));
  report(5, "active subspace recovery", guarded(active_subspace_recovery));
  report(6, "gradient fit", guarded(gradient_fit));
  report(7, "thermal simulator", guarded(thermal_simulator));

  const auto run1 = run_full(work / "run1");
  report(8, "end-to-end pipeline", guarded([&] { return end_to_end(work / "run1", run1); }));
  report(9, "validation protocol", guarded([&] { return validation_protocol(work / "run1", run1); }));
  const auto run2 = run_full(work / "run2");
  report(10, "determinism", guarded([&] { return determinism(work / "run1", run1, work / "run2", run2); }));

  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
