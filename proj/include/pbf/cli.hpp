#pragma once

// Command-line front end and the artifact-producing pipeline stages.
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pbf/pipeline.hpp"

namespace pbf {

/// DOE and model runs; writes doe.csv, T.csv and S.csv.
TrainingData stage_simulate(const PipelineConfig& cfg);

/// Reads the matrices, trains and writes bundle.json and err_curve.json
/// (plus err_T.csv / err_S.csv with plot_data).
TrainingResult stage_train(const PipelineConfig& cfg, bool plot_data = false);

/// Reads bundle.json, solves from every configured start (or only d0) and
/// writes optimize.json and optimize_history.csv.
OptimizationSummary stage_optimize(const PipelineConfig& cfg, std::optional<DesignPoint> d0 = {},
                                   bool plot_data = false);

/// Validates the best design in optimize.json; writes validation.json.
ValidationReport stage_validate(const PipelineConfig& cfg, bool self_validation = false);

/// All four stages in order.
void run_pipeline(const PipelineConfig& cfg);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pbf
