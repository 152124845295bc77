#include "pbf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "pbf/doe.hpp"
#include "pbf/error.hpp"
#include "pbf/persist.hpp"
#include "pbf/reduction.hpp"

namespace pbf {

void PipelineConfig::validate() const {
  // The design is point-symmetric, so the 22 even quadratic terms see only
  // ceil(M / 2) distinct values; the gradient fit needs all of them.
  require(m >= 43, "M must be at least 43 for the quadratic gradient fit on a symmetric design");
  require(n_val >= 10, "n_val must be at least 10");
  require(workers >= 1, "workers must be at least 1");
  require(self_validation_runs >= 10, "self_validation_runs must be at least 10");
  const auto ref = default_input_bounds();
  for (std::size_t i = 0; i < kNumInputs; ++i) {
    require(bounds[i].lower < bounds[i].upper, "input bounds must satisfy lower < upper");
    require(bounds[i].lower >= ref[i].lower && bounds[i].upper <= ref[i].upper,
            "input bounds must lie within the reference ranges");
  }
  require(bounds[0].lower > 0.0, "speed bounds must be positive");
  model.validate();
  stress.validate();
  grid.validate();
  require(reduction.err_threshold > 0.0, "err_threshold must be positive");
  require(reduction.min_gain >= 0.0, "min_gain must be non-negative");
  require(reduction.k_max >= 1, "k_max must be at least 1");
  require(fit.max_degree >= 1 && fit.max_degree <= kMaxPolyDegree, "max_degree must lie in [1, 6]");
  require(fit.r2_slack >= 0.0, "r2_slack must be non-negative");
  optimize.validate();
  require(!starts.empty(), "at least one initial design is required");
  for (const auto& s : starts) {
    require(s.speed >= bounds[0].lower && s.speed <= bounds[0].upper &&
                s.power >= bounds[1].lower && s.power <= bounds[1].upper,
            "initial designs must lie within the design box");
  }
}

// ---------------------------------------------------------------------------
// Response models

SimulatorModel::SimulatorModel(ModelParams p, StressParams sp, SimGridConfig grid)
    : p_(p), sp_(sp), grid_(grid) {
  p_.validate();
  sp_.validate();
  grid_.validate();
}

Response SimulatorModel::run(const InputVector& xi) const {
  const auto z = random_of(xi);
  const auto snap = simulate(design_of(xi), z, p_, grid_);
  auto field = residual_stress(snap, z, p_, sp_);
  Response r;
  r.temps = snap.temps;
  r.sigma_max = field.sigma_max;
  r.stress = std::move(field.grid);
  return r;
}

SyntheticModel::SyntheticModel(InputBounds bounds) : bounds_(bounds) {}

Eigen::VectorXd SyntheticModel::ridge_direction() {
  Eigen::VectorXd w(kNumInputs);
  w << 1.0, -0.8, 0.6, 0.4, -0.3, 0.2;
  return w.normalized();
}

Response SyntheticModel::run(const InputVector& xi) const {
  const double eta = ridge_direction().dot(normalize_inputs(xi, bounds_));
  const double a = 1600.0 + 150.0 * eta + 45.0 * eta * eta;
  const double b = 700.0 * eta + 210.0 * eta * eta;
  const double c = 700.0 + 60.0 * eta - 10.0 * eta * eta;
  const double e = 80.0 * eta + 15.0 * eta * eta;
  Response r;
  for (std::size_t i = 0; i < kNumSnapshots; ++i) {
    const double s = static_cast<double>(i) / (kNumSnapshots - 1);
    r.temps[i] = a * (1.0 - 0.3 * s) + b * std::sin(std::numbers::pi * s);
  }
  r.stress.resize(kStressSize);
  for (std::size_t iz = 0; iz < kStressNz; ++iz) {
    for (std::size_t ix = 0; ix < kStressNx; ++ix) {
      const double sx = (ix + 0.5) / kStressNx;
      const double sz = static_cast<double>(iz) / (kStressNz - 1);
      r.stress[stress_index(ix, iz)] =
          c * (0.6 + 0.4 * sz) + e * std::sin(std::numbers::pi * sx) * std::cos(std::numbers::pi * sz);
    }
  }
  r.sigma_max = max_stress(r.stress);
  return r;
}

std::unique_ptr<ResponseModel> make_response_model(const PipelineConfig& cfg) {
  if (cfg.response == ResponseKind::synthetic) return std::make_unique<SyntheticModel>(cfg.bounds);
  return std::make_unique<SimulatorModel>(cfg.model, cfg.stress, cfg.grid);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::string describe(const InputVector& xi) {
  std::ostringstream os;
  os << "(v=" << xi[0] << ", P=" << xi[1] << ", T0=" << xi[2] << ", Y=" << xi[3]
     << ", E=" << xi[4] << ", rho=" << xi[5] << ")";
  return os.str();
}

// Model runs for every input, in input order.
std::vector<Response> run_all(const std::vector<InputVector>& inputs, const ResponseModel& model,
                              int workers) {
  std::vector<Response> out(inputs.size());
  parallel_for(inputs.size(), workers, [&](std::size_t i) {
    try {
      out[i] = model.run(inputs[i]);
    } catch (const std::exception& e) {
      throw Error("run " + std::to_string(i) + " at " + describe(inputs[i]) + " failed: " +
                  e.what());
    }
  });
  return out;
}

}  // namespace

TrainingData simulate_doe(const PipelineConfig& cfg, const ResponseModel& model) {
  cfg.validate();
  TrainingData data;
  data.doe = generate_doe(cfg.m, cfg.bounds, cfg.doe_seed);
  const auto responses = run_all(data.doe, model, cfg.workers);
  data.temperature.resize(cfg.m, static_cast<Eigen::Index>(kNumSnapshots));
  data.stress.resize(cfg.m, static_cast<Eigen::Index>(kStressSize));
  for (int r = 0; r < cfg.m; ++r) {
    const auto& resp = responses[r];
    require(resp.stress.size() == kStressSize, "model returned a stress field of the wrong size");
    for (std::size_t i = 0; i < kNumSnapshots; ++i) data.temperature(r, static_cast<Eigen::Index>(i)) = resp.temps[i];
    for (std::size_t i = 0; i < kStressSize; ++i) data.stress(r, static_cast<Eigen::Index>(i)) = resp.stress[i];
  }
  return data;
}

TrainingResult train(const PipelineConfig& cfg, const TrainingData& data) {
  cfg.validate();
  const auto m = static_cast<Eigen::Index>(data.doe.size());
  require(m >= 28, "training needs at least 28 runs for the gradient fit, got " + std::to_string(m));
  require(data.temperature.rows() == m && data.stress.rows() == m,
          "design and snapshot matrices have different run counts");
  SnapshotMatrix{data.temperature, SnapshotKind::temperature}.validate();
  SnapshotMatrix{data.stress, SnapshotKind::stress}.validate();

  Eigen::MatrixXd xn(m, static_cast<Eigen::Index>(kNumInputs));
  for (Eigen::Index r = 0; r < m; ++r) {
    xn.row(r) = normalize_inputs(data.doe[static_cast<std::size_t>(r)], cfg.bounds).transpose();
  }

  TrainingResult out;
  const int kt_max = std::min<int>(cfg.reduction.k_max, static_cast<int>(std::min<Eigen::Index>(m, kNumSnapshots)));
  const int ks_max = std::min<int>(cfg.reduction.k_max, static_cast<int>(std::min<Eigen::Index>(m, kStressSize)));
  out.err_temperature = error_curve(data.temperature, kt_max);
  out.err_stress = error_curve(data.stress, ks_max);
  const int kt = select_feature_count(out.err_temperature, cfg.reduction.err_threshold, cfg.reduction.min_gain);
  const int ks = select_feature_count(out.err_stress, cfg.reduction.err_threshold, cfg.reduction.min_gain);

  auto& b = out.bundle;
  b.input_bounds = cfg.bounds;
  b.temperature = fit_component(data.temperature, xn, kt, cfg.bounds, cfg.fit);
  b.stress = fit_component(data.stress, xn, ks, cfg.bounds, cfg.fit);
  b.provenance = {cfg.doe_seed, static_cast<int>(m), config_hash(cfg)};
  b.validate();
  return out;
}

TrainingResult run_training(const PipelineConfig& cfg, const ResponseModel& model,
                            TrainingData* data_out) {
  auto data = simulate_doe(cfg, model);
  auto result = train(cfg, data);
  if (data_out != nullptr) *data_out = std::move(data);
  return result;
}

// ---------------------------------------------------------------------------
// Validation

double superquantile_at(std::span<const double> samples, double zeta, double alpha) {
  require(!samples.empty(), "sample set is empty");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  double s = 0.0;
  for (double x : samples) s += std::max(0.0, x - zeta);
  return zeta + s / static_cast<double>(samples.size()) / (1.0 - alpha);
}

double superquantile_std_error(std::span<const double> samples, double zeta, double alpha) {
  require(samples.size() >= 2, "standard error needs at least two samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += std::max(0.0, x - zeta);
  mean /= n;
  double var = 0.0;
  for (double x : samples) {
    const double d = std::max(0.0, x - zeta) - mean;
    var += d * d;
  }
  var /= n - 1.0;
  return std::sqrt(var / n) / (1.0 - alpha);
}

namespace {

constexpr std::uint64_t kSurrogateStream = 0x5851f42d4c957f2dULL;

std::vector<double> model_sigma(const DesignPoint& d, const std::vector<RandomInputs>& zs,
                                const ResponseModel& model, int workers) {
  std::vector<InputVector> inputs;
  inputs.reserve(zs.size());
  for (const auto& z : zs) inputs.push_back(make_input(d, z));
  const auto responses = run_all(inputs, model, workers);
  std::vector<double> out;
  out.reserve(responses.size());
  for (const auto& r : responses) out.push_back(r.sigma_max);
  return out;
}

void finish_report(ValidationReport& r, const std::vector<double>& sim,
                   const std::vector<double>& other) {
  r.n_sim = static_cast<int>(sim.size());
  r.n_surr = static_cast<int>(other.size());
  r.q_sim = superquantile_at(sim, r.zeta_star, r.alpha);
  r.q_surr = superquantile_at(other, r.zeta_star, r.alpha);
  require(r.q_sim != 0.0, "simulator superquantile is zero; relative difference undefined");
  r.rel_diff = (r.q_sim - r.q_surr) / r.q_sim;
  const double se_a = superquantile_std_error(sim, r.zeta_star, r.alpha);
  const double se_b = superquantile_std_error(other, r.zeta_star, r.alpha);
  r.rel_std_error = std::sqrt(se_a * se_a + se_b * se_b) / std::abs(r.q_sim);
}

}  // namespace

ValidationReport validate(const DesignPoint& d_star, double zeta_star, const SurrogateBundle& b,
                          const PipelineConfig& cfg, const ResponseModel& model) {
  cfg.validate();
  b.validate();
  require(b.input_bounds == cfg.bounds, "bundle input bounds do not match the configuration");
  ValidationReport r;
  r.d_star = d_star;
  r.zeta_star = zeta_star;
  r.alpha = cfg.optimize.alpha_t;

  const auto zs_sim = sample_random_inputs(static_cast<std::size_t>(cfg.n_val), cfg.bounds, cfg.validation_seed);
  const auto sim = model_sigma(d_star, zs_sim, model, cfg.workers);

  const auto zs_surr = sample_random_inputs(static_cast<std::size_t>(cfg.optimize.n_mc), cfg.bounds,
                                            cfg.validation_seed ^ kSurrogateStream);
  const BundleEvaluator eval(b, zs_surr);
  std::vector<double> surr(eval.size()), tmax(eval.size());
  eval.evaluate(d_star, surr, tmax);

  finish_report(r, sim, surr);
  return r;
}

ValidationReport self_validate(const DesignPoint& d_star, double zeta_star,
                               const PipelineConfig& cfg, const ResponseModel& model) {
  cfg.validate();
  ValidationReport r;
  r.d_star = d_star;
  r.zeta_star = zeta_star;
  r.alpha = cfg.optimize.alpha_t;
  r.self_validation = true;
  const auto zs_sim = sample_random_inputs(static_cast<std::size_t>(cfg.n_val), cfg.bounds, cfg.validation_seed);
  const auto zs_ref = sample_random_inputs(static_cast<std::size_t>(cfg.self_validation_runs),
                                           cfg.bounds, cfg.validation_seed ^ kSurrogateStream);
  const auto sim = model_sigma(d_star, zs_sim, model, cfg.workers);
  const auto ref = model_sigma(d_star, zs_ref, model, cfg.workers);
  finish_report(r, sim, ref);
  return r;
}

// ---------------------------------------------------------------------------
// Optimization from every start

OptimizationSummary optimize_all(const SurrogateBundle& b, const PipelineConfig& cfg) {
  cfg.validate();
  const auto samples = sample_random_inputs(static_cast<std::size_t>(cfg.optimize.n_mc),
                                            b.input_bounds, cfg.optimize.seed);
  const BundleEvaluator eval(b, samples);
  OptimizationSummary s;
  s.runs.resize(cfg.starts.size());
  parallel_for(cfg.starts.size(), cfg.workers,
               [&](std::size_t i) { s.runs[i] = solve(eval, cfg.optimize, cfg.starts[i]); });
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    if (!s.runs[i].feasible) continue;
    if (s.best < 0 || s.runs[i].energy < s.runs[static_cast<std::size_t>(s.best)].energy) {
      s.best = static_cast<int>(i);
    }
  }
  return s;
}

}  // namespace pbf
