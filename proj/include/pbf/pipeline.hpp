#pragma once

// End-to-end orchestration: DOE, high-fidelity runs, reduction and surrogate
// training, optimization from several starts, and validation of the
// superquantile at the optimum against fresh simulator runs.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pbf/optimize.hpp"
#include "pbf/stress.hpp"
#include "pbf/surrogate.hpp"
#include "pbf/thermal.hpp"

namespace pbf {

struct ReductionConfig {
  double err_threshold = 0.05;
  double min_gain = 0.02;
  int k_max = 10;
};

enum class ResponseKind { simulator, synthetic };

struct PipelineConfig {
  int m = 120;
  InputBounds bounds = default_input_bounds();
  ModelParams model;
  StressParams stress;
  SimGridConfig grid;
  ReductionConfig reduction;
  FitOptions fit;
  OptimizeConfig optimize;  ///< optimize.seed is the Monte Carlo seed
  int n_val = 50;
  std::uint64_t doe_seed = 1;
  std::uint64_t validation_seed = 3;
  std::string output_dir = "out";
  int workers = 1;
  ResponseKind response = ResponseKind::simulator;
  /// Simulator runs on the surrogate side of a self-validation.
  int self_validation_runs = 200;
  std::vector<DesignPoint> starts = {{500.0, 160.0}, {400.0, 100.0}, {400.0, 125.0}, {600.0, 100.0}};

  void validate() const;
};

/// One high-fidelity evaluation.
struct Response {
  std::array<double, kNumSnapshots> temps{};
  std::vector<double> stress;  ///< kStressSize values
  double sigma_max = 0.0;
};

/// The "high-fidelity model" boundary. Implementations must be safe to call
/// concurrently.
class ResponseModel {
public:
  virtual ~ResponseModel() = default;
  virtual Response run(const InputVector& xi) const = 0;
};

/// Thermal solver followed by the residual-stress proxy.
class SimulatorModel final : public ResponseModel {
public:
  SimulatorModel(ModelParams p, StressParams sp, SimGridConfig grid);
  Response run(const InputVector& xi) const override;

private:
  ModelParams p_;
  StressParams sp_;
  SimGridConfig grid_;
};

/// Rank-2 analytic response. Temperatures and stresses are quadratic
/// functions of one ridge variable eta = w^T xi (xi normalized), times fixed
/// spatial/temporal shapes.
class SyntheticModel final : public ResponseModel {
public:
  explicit SyntheticModel(InputBounds bounds);
  Response run(const InputVector& xi) const override;
  static Eigen::VectorXd ridge_direction();

private:
  InputBounds bounds_;
};

std::unique_ptr<ResponseModel> make_response_model(const PipelineConfig& cfg);

/// Runs f(i) for i in [0, n) on up to `workers` threads. Each index is run
/// exactly once; the error from the lowest failing index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

struct TrainingData {
  std::vector<InputVector> doe;
  Eigen::MatrixXd temperature;  ///< M x 31
  Eigen::MatrixXd stress;       ///< M x 448
};

/// DOE plus one model run per design row.
TrainingData simulate_doe(const PipelineConfig& cfg, const ResponseModel& model);

struct TrainingResult {
  SurrogateBundle bundle;
  std::vector<double> err_temperature;
  std::vector<double> err_stress;
};

TrainingResult train(const PipelineConfig& cfg, const TrainingData& data);

/// simulate_doe followed by train.
TrainingResult run_training(const PipelineConfig& cfg, const ResponseModel& model,
                            TrainingData* data_out = nullptr);

struct ValidationReport {
  DesignPoint d_star;
  double zeta_star = 0.0;
  double alpha = 0.95;
  int n_sim = 0;
  int n_surr = 0;
  double q_sim = 0.0;
  double q_surr = 0.0;
  double rel_diff = 0.0;  ///< (q_sim - q_surr) / q_sim
  double rel_std_error = 0.0;  ///< Monte Carlo standard error of rel_diff
  bool self_validation = false;
};

/// zeta + mean[(s - zeta)^+] / (1 - alpha).
double superquantile_at(std::span<const double> samples, double zeta, double alpha);

/// Standard error of superquantile_at.
double superquantile_std_error(std::span<const double> samples, double zeta, double alpha);

/// Simulator superquantile from n_val fresh runs against the surrogate one
/// from n_mc fresh draws, both with zeta_star as the quantile proxy.
ValidationReport validate(const DesignPoint& d_star, double zeta_star, const SurrogateBundle& b,
                          const PipelineConfig& cfg, const ResponseModel& model);

/// Same protocol with the surrogate side replaced by cfg.self_validation_runs
/// further model runs.
ValidationReport self_validate(const DesignPoint& d_star, double zeta_star,
                               const PipelineConfig& cfg, const ResponseModel& model);

struct OptimizationSummary {
  std::vector<OptimizationResult> runs;
  int best = -1;  ///< lowest-energy feasible run, -1 if none
};

/// One solve per configured start, all sharing the frozen sample set.
OptimizationSummary optimize_all(const SurrogateBundle& b, const PipelineConfig& cfg);

}  // namespace pbf
