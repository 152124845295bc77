#pragma once

// Output and input dimension reduction.
//
// Outputs: a snapshot matrix (runs x flattened QoI) is compressed with a
// truncated SVD into features F = U_k S_k, so that F V_k^T is the best rank-k
// approximation of the data.
//
// Inputs: for each feature, the dominant eigenvectors of the averaged
// gradient outer product C = E[grad f grad f^T] span its active subspace, and
// the feature is modelled as a function of eta = W1^T xi only.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pbf/thermal.hpp"

namespace pbf {

enum class SnapshotKind { temperature, stress };

struct SnapshotMatrix {
  Eigen::MatrixXd data;  ///< rows = runs, columns = flattened QoI
  SnapshotKind kind = SnapshotKind::temperature;

  /// M >= 2, finite entries, 31 or 448 columns according to kind.
  void validate() const;
};

struct FeatureDecomposition {
  Eigen::MatrixXd features;       ///< M x k, F = U_k S_k
  Eigen::MatrixXd right_vectors;  ///< N x k, V_k
  Eigen::VectorXd singular_values;

  int k() const { return static_cast<int>(right_vectors.cols()); }
};

/// Thin SVD truncated to k components. Each right vector is signed so that
/// its largest-magnitude entry is positive.
FeatureDecomposition decompose(const Eigen::MatrixXd& m, int k);
inline FeatureDecomposition decompose(const SnapshotMatrix& m, int k) {
  m.validate();
  return decompose(m.data, k);
}

/// F V_k^T.
Eigen::MatrixXd reconstruct(const FeatureDecomposition& f);

/// Mean over rows of ||row - rank-k reconstruction|| / ||row||.
double truncation_error(const Eigen::MatrixXd& m, int k);

/// truncation_error for k = 1 .. k_max from a single factorization.
std::vector<double> error_curve(const Eigen::MatrixXd& m, int k_max);

/// Picks the number of features from an error curve (errs[0] is k = 1).
///
/// Returns the smallest k whose error is within threshold. Otherwise returns
/// the smallest k after which every further feature lowers the error by less
/// than min_gain.
int select_feature_count(std::span<const double> errs, double threshold, double min_gain);

/// Affine map of each coordinate from its bounds to [-1, 1]. Coordinates
/// outside the bounds by more than 1e-9 (relative to the width) are rejected;
/// smaller excursions are clamped.
Eigen::VectorXd normalize_inputs(const InputVector& xi, const InputBounds& bounds);
InputVector denormalize_inputs(const Eigen::VectorXd& xi, const InputBounds& bounds);

/// Full quadratic response surface in n variables:
/// c0 + sum_i b_i x_i + sum_{i <= j} c_ij x_i x_j.
class QuadraticModel {
public:
  /// Least-squares fit; needs at least (n + 1)(n + 2) / 2 rows and a
  /// full-rank design.
  static QuadraticModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values);

  static int term_count(int n) { return (n + 1) * (n + 2) / 2; }
  int dim() const { return dim_; }
  const Eigen::VectorXd& coefficients() const { return coef_; }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

private:
  static Eigen::RowVectorXd basis(const Eigen::VectorXd& x);

  int dim_ = 0;
  Eigen::VectorXd coef_;
};

/// Gradient of a global quadratic fit to (inputs, values), evaluated at every
/// input row. Inputs are expected normalized to [-1, 1].
Eigen::MatrixXd estimate_gradients(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values);

inline constexpr int kMaxActiveDim = 3;

struct ActiveSubspace {
  Eigen::MatrixXd w1;           ///< n x r, orthonormal columns
  Eigen::VectorXd eigenvalues;  ///< all n, non-increasing
  int r = 1;
  InputBounds input_bounds = default_input_bounds();
};

/// Active subspace from sampled gradients (rows). r is the index of the
/// largest spectral gap lambda_r / lambda_{r+1} for 1 <= r <= 3.
ActiveSubspace discover(const Eigen::MatrixXd& gradients,
                        const InputBounds& bounds = default_input_bounds());

/// eta = W1^T xi for a normalized input.
Eigen::VectorXd active_vars(const ActiveSubspace& s, const Eigen::VectorXd& xi);

}  // namespace pbf
