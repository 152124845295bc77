#pragma once

// Polynomial feature surrogates and full-field prediction.
//
// Each retained SVD feature j gets its own active subspace W1_j and a
// polynomial G_j(eta) with eta = W1_j^T xi (xi normalized to [-1, 1]).
// Predicted fields are recovered as sum_j G_j v_j.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pbf/reduction.hpp"
#include "pbf/thermal.hpp"

namespace pbf {

inline constexpr int kMaxPolyDegree = 6;

/// Dense polynomial over all monomials of total degree <= degree in n_vars
/// variables, ordered by total degree then lexicographically (x1 first).
class PolySurrogate {
public:
  PolySurrogate() = default;
  PolySurrogate(int n_vars, int degree, Eigen::VectorXd coefficients, double r2 = 1.0);

  /// Least-squares fit over the full monomial basis with a column-pivoted QR.
  /// Requires more samples than coefficients and a full-rank basis.
  static PolySurrogate fit(const Eigen::MatrixXd& etas, const Eigen::VectorXd& values, int degree);

  /// Fits degrees 1..6 (as far as the sample count allows) and keeps the
  /// lowest degree whose r2 is within r2_slack of the best one.
  static PolySurrogate fit_best(const Eigen::MatrixXd& etas, const Eigen::VectorXd& values,
                                int max_degree = kMaxPolyDegree, double r2_slack = 0.01);

  /// C(n_vars + degree, degree).
  static int coefficient_count(int n_vars, int degree);

  /// Exponent vectors of the basis, one row per coefficient.
  static std::vector<std::vector<int>> exponents(int n_vars, int degree);

  int n_vars() const { return n_vars_; }
  int degree() const { return degree_; }
  double r2() const { return r2_; }
  const Eigen::VectorXd& coefficients() const { return coef_; }

  double predict(std::span<const double> eta) const;
  double predict(const Eigen::VectorXd& eta) const {
    return predict(std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())));
  }

private:
  int n_vars_ = 0;
  int degree_ = 0;
  Eigen::VectorXd coef_;
  double r2_ = 1.0;
  std::vector<unsigned char> flat_exponents_;
};

/// 1 - SS_res / SS_tot. Constant targets give 1 for a zero residual, else 0.
double r_squared(const Eigen::VectorXd& values, const Eigen::VectorXd& fitted);

struct FeatureModel {
  ActiveSubspace subspace;
  PolySurrogate poly;
};

/// Surrogate for one output family (temperature snapshot or stress field).
struct ComponentModel {
  Eigen::MatrixXd basis;  ///< N x K right singular vectors
  Eigen::VectorXd singular_values;
  std::vector<FeatureModel> features;

  int k() const { return static_cast<int>(basis.cols()); }
  int n_outputs() const { return static_cast<int>(basis.rows()); }
};

struct FitOptions {
  int max_degree = kMaxPolyDegree;
  double r2_slack = 0.01;
};

/// SVD features of the snapshots, one active subspace and polynomial per
/// retained feature. normalized_inputs holds one normalized 6-vector per row.
ComponentModel fit_component(const Eigen::MatrixXd& snapshots,
                             const Eigen::MatrixXd& normalized_inputs, int k,
                             const InputBounds& bounds, const FitOptions& opts = {});

struct Provenance {
  std::uint64_t seed = 0;
  int runs = 0;
  std::string config_hash;

  bool operator==(const Provenance&) const = default;
};

struct SurrogateBundle {
  ComponentModel temperature;
  ComponentModel stress;
  InputBounds input_bounds = default_input_bounds();
  Provenance provenance;

  /// K_T, K_S >= 1 and consistent shapes.
  void validate() const;
};

/// Feature predictions G_1..G_K of one component at a normalized input.
Eigen::VectorXd predict_features(const ComponentModel& c, const Eigen::VectorXd& xi_normalized);

/// Predicted 31-point temperature history at a raw input.
Eigen::VectorXd predict_snapshot(const SurrogateBundle& b, const InputVector& xi);

struct StressPrediction {
  Eigen::VectorXd field;
  double sigma_max = 0.0;
};

/// Predicted 448-point stress field and its maximum at a raw input.
StressPrediction predict_stress_field(const SurrogateBundle& b, const InputVector& xi);

/// Batch evaluation of sigma_max and T_max for a fixed set of random inputs
/// at varying designs. The random-input part of every active variable is
/// precomputed once; the bundle must outlive the evaluator.
class BundleEvaluator {
public:
  BundleEvaluator(const SurrogateBundle& b, std::span<const RandomInputs> samples);

  std::size_t size() const { return n_samples_; }

  /// Fills sigma_max and t_max (both of length size()).
  void evaluate(const DesignPoint& d, std::span<double> sigma_max, std::span<double> t_max) const;

private:
  struct Feature {
    const PolySurrogate* poly = nullptr;
    int r = 1;
    double w_speed[kMaxActiveDim]{};
    double w_power[kMaxActiveDim]{};
    std::vector<double> eta_random;  // n_samples x r
  };
  // Output rows grouped into contiguous blocks. Each block carries a centre
  // and radius so that centre.g + radius |g| bounds every row in it.
  struct Block {
    std::size_t begin = 0;
    std::size_t end = 0;
    double radius = 0.0;
  };
  struct Component {
    std::vector<Feature> features;
    std::vector<double> rows;     // row-major N x K
    std::vector<double> centres;  // row-major blocks x K
    std::vector<Block> blocks;
    int n = 0;
    int k = 0;
  };

  Component prepare(const ComponentModel& c, const std::vector<Eigen::VectorXd>& xin) const;
  // Field maximum for one sample given its feature values.
  static double field_max(const Component& c, const double* g);
  const SurrogateBundle* bundle_;
  std::size_t n_samples_ = 0;
  Component temperature_;
  Component stress_;
};

}  // namespace pbf
