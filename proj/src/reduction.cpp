#include "pbf/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pbf/error.hpp"

namespace pbf {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  require(m.allFinite(), std::string(what) + " has non-finite entries");
}

// Flip so the largest-magnitude entry is positive; first index wins ties.
template <class Col>
bool needs_flip(const Col& v) {
  Eigen::Index idx = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      idx = i;
    }
  }
  return v(idx) < 0.0;
}

}  // namespace

void SnapshotMatrix::validate() const {
  require(data.rows() >= 2, "snapshot matrix needs at least two runs");
  const Eigen::Index expected = kind == SnapshotKind::temperature
                                    ? static_cast<Eigen::Index>(kNumSnapshots)
                                    : static_cast<Eigen::Index>(kStressSize);
  require(data.cols() == expected, "snapshot matrix has " + std::to_string(data.cols()) +
                                       " columns, expected " + std::to_string(expected));
  require_finite(data, "snapshot matrix");
}

FeatureDecomposition decompose(const Eigen::MatrixXd& m, int k) {
  const auto p = std::min(m.rows(), m.cols());
  require(k >= 1 && k <= p, "feature count " + std::to_string(k) + " outside [1, " +
                                std::to_string(p) + "]");
  require_finite(m, "input matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  FeatureDecomposition out;
  out.singular_values = svd.singularValues().head(k);
  Eigen::MatrixXd u = svd.matrixU().leftCols(k);
  out.right_vectors = svd.matrixV().leftCols(k);
  for (int j = 0; j < k; ++j) {
    if (needs_flip(out.right_vectors.col(j))) {
      out.right_vectors.col(j) *= -1.0;
      u.col(j) *= -1.0;
    }
  }
  out.features = u * out.singular_values.asDiagonal();
  return out;
}

Eigen::MatrixXd reconstruct(const FeatureDecomposition& f) {
  require(f.features.cols() == f.right_vectors.cols() && f.features.cols() >= 1,
          "feature and right-vector counts differ");
  return f.features * f.right_vectors.transpose();
}

std::vector<double> error_curve(const Eigen::MatrixXd& m, int k_max) {
  const auto p = std::min(m.rows(), m.cols());
  require(k_max >= 1 && k_max <= p, "feature count outside [1, min(M, N)]");
  require_finite(m, "input matrix");
  const Eigen::VectorXd row_norms = m.rowwise().norm();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    require(row_norms(i) > 0.0, "row " + std::to_string(i) + " has zero norm");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd residual = m;
  std::vector<double> errs;
  errs.reserve(k_max);
  for (int k = 0; k < k_max; ++k) {
    residual.noalias() -= svd.singularValues()(k) * svd.matrixU().col(k) *
                          svd.matrixV().col(k).transpose();
    errs.push_back((residual.rowwise().norm().array() / row_norms.array()).mean());
  }
  return errs;
}

double truncation_error(const Eigen::MatrixXd& m, int k) { return error_curve(m, k).back(); }

int select_feature_count(std::span<const double> errs, double threshold, double min_gain) {
  require(!errs.empty(), "error curve is empty");
  const int n = static_cast<int>(errs.size());
  for (int k = 1; k <= n; ++k) {
    if (errs[k - 1] <= threshold) return k;
  }
  // Walk back from the end while the gains stay small.
  int k = n;
  while (k > 1 && errs[k - 2] - errs[k - 1] < min_gain) --k;
  return k;
}

Eigen::VectorXd normalize_inputs(const InputVector& xi, const InputBounds& bounds) {
  Eigen::VectorXd out(kNumInputs);
  for (std::size_t i = 0; i < kNumInputs; ++i) {
    const auto& b = bounds[i];
    require(b.lower < b.upper, "input bounds must satisfy lower < upper");
    const double tol = 1e-9 * b.width();
    require(xi[i] >= b.lower - tol && xi[i] <= b.upper + tol,
            "input " + std::to_string(i) + " = " + std::to_string(xi[i]) + " outside [" +
                std::to_string(b.lower) + ", " + std::to_string(b.upper) + "]");
    out(i) = std::clamp(2.0 * (xi[i] - b.lower) / b.width() - 1.0, -1.0, 1.0);
  }
  return out;
}

InputVector denormalize_inputs(const Eigen::VectorXd& xi, const InputBounds& bounds) {
  require(xi.size() == static_cast<Eigen::Index>(kNumInputs), "expected a 6-vector");
  InputVector out{};
  for (std::size_t i = 0; i < kNumInputs; ++i) {
    out[i] = bounds[i].lower + 0.5 * (xi(i) + 1.0) * bounds[i].width();
  }
  return out;
}

Eigen::RowVectorXd QuadraticModel::basis(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::RowVectorXd row(term_count(n));
  int c = 0;
  row(c++) = 1.0;
  for (int i = 0; i < n; ++i) row(c++) = x(i);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) row(c++) = x(i) * x(j);
  }
  return row;
}

QuadraticModel QuadraticModel::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values) {
  const int n = static_cast<int>(inputs.cols());
  const int terms = term_count(n);
  require(inputs.rows() == values.size(), "input and value counts differ");
  require(inputs.rows() >= terms, "quadratic fit in " + std::to_string(n) + " variables needs " +
                                      std::to_string(terms) + " samples, got " +
                                      std::to_string(inputs.rows()));
  require_finite(inputs, "gradient-fit inputs");
  require(values.allFinite(), "gradient-fit values are not finite");
  Eigen::MatrixXd design(inputs.rows(), terms);
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) design.row(r) = basis(inputs.row(r).transpose());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  require(qr.rank() == terms, "quadratic design matrix is rank deficient");
  QuadraticModel q;
  q.dim_ = n;
  q.coef_ = qr.solve(values);
  return q;
}

double QuadraticModel::value(const Eigen::VectorXd& x) const {
  require(x.size() == dim_, "dimension mismatch in quadratic model");
  return basis(x).dot(coef_);
}

Eigen::VectorXd QuadraticModel::gradient(const Eigen::VectorXd& x) const {
  require(x.size() == dim_, "dimension mismatch in quadratic model");
  Eigen::VectorXd g = coef_.segment(1, dim_);
  int c = 1 + dim_;
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      const double w = coef_(c++);
      g(i) += w * x(j);
      g(j) += w * x(i);
    }
  }
  return g;
}

Eigen::MatrixXd estimate_gradients(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& values) {
  const auto q = QuadraticModel::fit(inputs, values);
  Eigen::MatrixXd grads(inputs.rows(), inputs.cols());
  for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
    grads.row(r) = q.gradient(inputs.row(r).transpose()).transpose();
  }
  return grads;
}

ActiveSubspace discover(const Eigen::MatrixXd& gradients, const InputBounds& bounds) {
  require(gradients.rows() >= 2, "active subspace discovery needs at least two gradients");
  require_finite(gradients, "gradient matrix");
  const int n = static_cast<int>(gradients.cols());
  const Eigen::MatrixXd c =
      gradients.transpose() * gradients / static_cast<double>(gradients.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  require(eig.info() == Eigen::Success, "eigendecomposition failed");

  ActiveSubspace out;
  out.input_bounds = bounds;
  out.eigenvalues = eig.eigenvalues().reverse();
  Eigen::MatrixXd w = eig.eigenvectors().rowwise().reverse();

  // Ratios over a numerically zero eigenvalue are left out of the argmax, so
  // a weak but nonzero direction does not win an infinite gap. When every
  // ratio is left out the covariance has rank one (or is zero) and r = 1.
  const double lead = out.eigenvalues(0);
  const int r_cap = std::min(kMaxActiveDim, n - 1);
  out.r = 1;
  double best = 0.0;
  for (int r = 1; r <= r_cap && lead > 0.0; ++r) {
    const double next = out.eigenvalues(r);
    if (next <= 1e-12 * lead) break;
    const double gap = out.eigenvalues(r - 1) / next;
    if (gap > best) {
      best = gap;
      out.r = r;
    }
  }
  out.w1 = w.leftCols(out.r);
  for (int j = 0; j < out.r; ++j) {
    if (needs_flip(out.w1.col(j))) out.w1.col(j) *= -1.0;
  }
  return out;
}

Eigen::VectorXd active_vars(const ActiveSubspace& s, const Eigen::VectorXd& xi) {
  require(xi.size() == s.w1.rows(), "active variable input has wrong dimension");
  return s.w1.transpose() * xi;
}

}  // namespace pbf
