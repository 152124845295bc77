#pragma once

// Artifact persistence: headerless CSV matrices and versioned JSON documents.

#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "pbf/optimize.hpp"
#include "pbf/pipeline.hpp"
#include "pbf/surrogate.hpp"

namespace pbf {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Row-major, comma separated, one row per line, no header.
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_csv(const std::filesystem::path& path);

Eigen::MatrixXd to_matrix(const std::vector<InputVector>& rows);
std::vector<InputVector> to_inputs(const Eigen::MatrixXd& m);

void write_text(const std::filesystem::path& path, const std::string& text);
json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

json config_to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const json& j);
/// Empty path gives the defaults.
PipelineConfig load_config(const std::filesystem::path& path);
/// FNV-1a (64 bit, hex) of the canonical config document, without the
/// output directory and worker count.
std::string config_hash(const PipelineConfig& cfg);

json bundle_to_json(const SurrogateBundle& b);
SurrogateBundle bundle_from_json(const json& j);
void save_bundle(const std::filesystem::path& path, const SurrogateBundle& b);
SurrogateBundle load_bundle(const std::filesystem::path& path);

json result_to_json(const OptimizationResult& r);
OptimizationResult result_from_json(const json& j);
json summary_to_json(const OptimizationSummary& s, const OptimizeConfig& cfg);

/// iteration, v, P, zeta, energy, risk, t_max_hat, feasible per line.
void write_history_csv(const std::filesystem::path& path, const OptimizationResult& r,
                       int run_index = 0, bool append = false);

json report_to_json(const ValidationReport& r);
ValidationReport report_from_json(const json& j);

}  // namespace pbf
