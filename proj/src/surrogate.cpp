#include "pbf/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "pbf/error.hpp"

namespace pbf {

namespace {

void compositions(int n, int total, std::vector<int>& cur, int pos,
                  std::vector<std::vector<int>>& out) {
  if (pos == n - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int e = total; e >= 0; --e) {
    cur[pos] = e;
    compositions(n, total - e, cur, pos + 1, out);
  }
}

Eigen::MatrixXd vandermonde(const Eigen::MatrixXd& etas,
                            const std::vector<std::vector<int>>& exps) {
  Eigen::MatrixXd v(etas.rows(), static_cast<Eigen::Index>(exps.size()));
  for (Eigen::Index r = 0; r < etas.rows(); ++r) {
    for (std::size_t c = 0; c < exps.size(); ++c) {
      double t = 1.0;
      for (std::size_t i = 0; i < exps[c].size(); ++i) {
        t *= std::pow(etas(r, static_cast<Eigen::Index>(i)), exps[c][i]);
      }
      v(r, static_cast<Eigen::Index>(c)) = t;
    }
  }
  return v;
}

}  // namespace

int PolySurrogate::coefficient_count(int n_vars, int degree) {
  // C(n + d, d)
  long c = 1;
  for (int i = 1; i <= degree; ++i) c = c * (n_vars + i) / i;
  return static_cast<int>(c);
}

std::vector<std::vector<int>> PolySurrogate::exponents(int n_vars, int degree) {
  require(n_vars >= 1, "polynomial needs at least one variable");
  require(degree >= 0, "polynomial degree must be non-negative");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n_vars, 0);
  for (int t = 0; t <= degree; ++t) compositions(n_vars, t, cur, 0, out);
  return out;
}

PolySurrogate::PolySurrogate(int n_vars, int degree, Eigen::VectorXd coefficients, double r2)
    : n_vars_(n_vars), degree_(degree), coef_(std::move(coefficients)), r2_(r2) {
  require(n_vars >= 1 && n_vars <= kMaxActiveDim, "polynomial must have 1 to 3 variables");
  require(degree >= 0 && degree <= kMaxPolyDegree, "polynomial degree must lie in [0, 6]");
  require(coef_.size() == coefficient_count(n_vars, degree),
          "coefficient count does not match the monomial basis");
  for (const auto& e : exponents(n_vars, degree)) {
    for (int x : e) flat_exponents_.push_back(static_cast<unsigned char>(x));
  }
}

double r_squared(const Eigen::VectorXd& values, const Eigen::VectorXd& fitted) {
  const double mean = values.mean();
  const double ss_tot = (values.array() - mean).square().sum();
  const double ss_res = (values - fitted).squaredNorm();
  if (ss_tot == 0.0) {
    const double scale = std::max(1.0, values.squaredNorm());
    return ss_res <= 1e-24 * scale ? 1.0 : 0.0;
  }
  return 1.0 - ss_res / ss_tot;
}

PolySurrogate PolySurrogate::fit(const Eigen::MatrixXd& etas, const Eigen::VectorXd& values,
                                 int degree) {
  const int n = static_cast<int>(etas.cols());
  require(etas.rows() == values.size(), "active-variable and value counts differ");
  const int count = coefficient_count(n, degree);
  require(etas.rows() > count, "degree-" + std::to_string(degree) + " fit in " +
                                   std::to_string(n) + " variables needs more than " +
                                   std::to_string(count) + " samples");
  require(etas.allFinite() && values.allFinite(), "surrogate training data is not finite");
  const auto exps = exponents(n, degree);
  const Eigen::MatrixXd v = vandermonde(etas, exps);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  require(qr.rank() == count, "polynomial basis is rank deficient at degree " +
                                  std::to_string(degree));
  Eigen::VectorXd coef = qr.solve(values);
  const double r2 = r_squared(values, v * coef);
  return PolySurrogate(n, degree, std::move(coef), r2);
}

PolySurrogate PolySurrogate::fit_best(const Eigen::MatrixXd& etas, const Eigen::VectorXd& values,
                                      int max_degree, double r2_slack) {
  const int n = static_cast<int>(etas.cols());
  std::vector<PolySurrogate> fits;
  for (int d = 1; d <= std::min(max_degree, kMaxPolyDegree); ++d) {
    if (etas.rows() <= coefficient_count(n, d)) break;
    try {
      fits.push_back(fit(etas, values, d));
    } catch (const Error&) {
      break;
    }
  }
  require(!fits.empty(), "no polynomial degree could be fitted to " +
                             std::to_string(etas.rows()) + " samples");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : fits) best = std::max(best, f.r2());
  for (const auto& f : fits) {
    if (f.r2() >= best - r2_slack) return f;
  }
  return fits.back();
}

double PolySurrogate::predict(std::span<const double> eta) const {
  require(static_cast<int>(eta.size()) == n_vars_, "active-variable dimension mismatch");
  if (n_vars_ == 1) {
    // Univariate basis is 1, x, x^2, ...
    double acc = 0.0;
    for (Eigen::Index c = coef_.size() - 1; c >= 0; --c) acc = acc * eta[0] + coef_(c);
    return acc;
  }
  double pw[kMaxActiveDim][kMaxPolyDegree + 1];
  for (int i = 0; i < n_vars_; ++i) {
    pw[i][0] = 1.0;
    for (int p = 1; p <= degree_; ++p) pw[i][p] = pw[i][p - 1] * eta[i];
  }
  double sum = 0.0;
  const unsigned char* e = flat_exponents_.data();
  for (Eigen::Index c = 0; c < coef_.size(); ++c) {
    double t = coef_(c);
    for (int i = 0; i < n_vars_; ++i) t *= pw[i][*e++];
    sum += t;
  }
  return sum;
}

ComponentModel fit_component(const Eigen::MatrixXd& snapshots,
                             const Eigen::MatrixXd& normalized_inputs, int k,
                             const InputBounds& bounds, const FitOptions& opts) {
  require(snapshots.rows() == normalized_inputs.rows(), "snapshot and input run counts differ");
  require(normalized_inputs.cols() == static_cast<Eigen::Index>(kNumInputs),
          "inputs must have six columns");
  const auto dec = decompose(snapshots, k);
  ComponentModel out;
  out.basis = dec.right_vectors;
  out.singular_values = dec.singular_values;
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd values = dec.features.col(j);
    FeatureModel fm;
    fm.subspace = discover(estimate_gradients(normalized_inputs, values), bounds);
    const Eigen::MatrixXd etas = normalized_inputs * fm.subspace.w1;
    fm.poly = PolySurrogate::fit_best(etas, values, opts.max_degree, opts.r2_slack);
    out.features.push_back(std::move(fm));
  }
  return out;
}

void SurrogateBundle::validate() const {
  auto check = [](const ComponentModel& c, Eigen::Index n, const char* name) {
    const std::string what(name);
    require(c.k() >= 1, what + " surrogate has no features");
    require(c.basis.rows() == n, what + " basis has the wrong number of outputs");
    require(static_cast<int>(c.features.size()) == c.k(), what + " feature count mismatch");
    for (const auto& f : c.features) {
      require(f.subspace.w1.rows() == static_cast<Eigen::Index>(kNumInputs),
              what + " active subspace must act on six inputs");
      require(f.subspace.w1.cols() == f.poly.n_vars(), what + " active dimension mismatch");
    }
  };
  check(temperature, static_cast<Eigen::Index>(kNumSnapshots), "temperature");
  check(stress, static_cast<Eigen::Index>(kStressSize), "stress");
}

Eigen::VectorXd predict_features(const ComponentModel& c, const Eigen::VectorXd& xi_normalized) {
  Eigen::VectorXd g(c.k());
  for (int j = 0; j < c.k(); ++j) {
    g(j) = c.features[j].poly.predict(active_vars(c.features[j].subspace, xi_normalized));
  }
  return g;
}

Eigen::VectorXd predict_snapshot(const SurrogateBundle& b, const InputVector& xi) {
  const Eigen::VectorXd xn = normalize_inputs(xi, b.input_bounds);
  return b.temperature.basis * predict_features(b.temperature, xn);
}

StressPrediction predict_stress_field(const SurrogateBundle& b, const InputVector& xi) {
  const Eigen::VectorXd xn = normalize_inputs(xi, b.input_bounds);
  StressPrediction out;
  out.field = b.stress.basis * predict_features(b.stress, xn);
  out.sigma_max = out.field.maxCoeff();
  return out;
}

BundleEvaluator::BundleEvaluator(const SurrogateBundle& b, std::span<const RandomInputs> samples)
    : bundle_(&b), n_samples_(samples.size()) {
  b.validate();
  require(!samples.empty(), "random-input sample set is empty");
  // Random inputs are normalized once; the design slots hold a placeholder
  // inside the box and are replaced per evaluation.
  std::vector<Eigen::VectorXd> xin;
  xin.reserve(samples.size());
  const DesignPoint mid{b.input_bounds[0].mid(), b.input_bounds[1].mid()};
  for (const auto& z : samples) xin.push_back(normalize_inputs(make_input(mid, z), b.input_bounds));
  temperature_ = prepare(b.temperature, xin);
  stress_ = prepare(b.stress, xin);
}

BundleEvaluator::Component BundleEvaluator::prepare(const ComponentModel& c,
                                                    const std::vector<Eigen::VectorXd>& xin) const {
  Component out;
  out.n = c.n_outputs();
  out.k = c.k();
  const auto k = static_cast<std::size_t>(out.k);
  out.rows.resize(static_cast<std::size_t>(out.n) * k);
  for (int i = 0; i < out.n; ++i) {
    for (int j = 0; j < out.k; ++j) out.rows[static_cast<std::size_t>(i) * k + j] = c.basis(i, j);
  }
  constexpr std::size_t kBlockRows = 16;
  require(static_cast<std::size_t>(out.n) <= 64 * kBlockRows, "too many outputs for the evaluator");
  for (std::size_t b = 0; b < static_cast<std::size_t>(out.n); b += kBlockRows) {
    Block blk{b, std::min(b + kBlockRows, static_cast<std::size_t>(out.n)), 0.0};
    std::vector<double> centre(k, 0.0);
    for (std::size_t i = blk.begin; i < blk.end; ++i) {
      for (std::size_t j = 0; j < k; ++j) centre[j] += out.rows[i * k + j];
    }
    for (auto& x : centre) x /= static_cast<double>(blk.end - blk.begin);
    for (std::size_t i = blk.begin; i < blk.end; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double t = out.rows[i * k + j] - centre[j];
        d2 += t * t;
      }
      blk.radius = std::max(blk.radius, std::sqrt(d2));
    }
    // Pad against rounding in the bound.
    blk.radius = blk.radius * (1.0 + 1e-12) + 1e-300;
    out.centres.insert(out.centres.end(), centre.begin(), centre.end());
    out.blocks.push_back(blk);
  }
  for (const auto& fm : c.features) {
    Feature f;
    f.poly = &fm.poly;
    f.r = static_cast<int>(fm.subspace.w1.cols());
    for (int a = 0; a < f.r; ++a) {
      f.w_speed[a] = fm.subspace.w1(0, a);
      f.w_power[a] = fm.subspace.w1(1, a);
    }
    f.eta_random.resize(xin.size() * f.r);
    for (std::size_t s = 0; s < xin.size(); ++s) {
      for (int a = 0; a < f.r; ++a) {
        double acc = 0.0;
        for (std::size_t i = 2; i < kNumInputs; ++i) acc += fm.subspace.w1(i, a) * xin[s](i);
        f.eta_random[s * f.r + a] = acc;
      }
    }
    out.features.push_back(std::move(f));
  }
  return out;
}

double BundleEvaluator::field_max(const Component& c, const double* g) {
  const auto k = static_cast<std::size_t>(c.k);
  double gnorm = 0.0;
  for (std::size_t j = 0; j < k; ++j) gnorm += g[j] * g[j];
  gnorm = std::sqrt(gnorm);

  // Bounds per block; scan the most promising block first, then every block
  // whose bound can still beat the running maximum.
  const std::size_t nb = c.blocks.size();
  double ub[64];
  double centre_best = -std::numeric_limits<double>::infinity();
  std::size_t first = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    double dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += c.centres[b * k + j] * g[j];
    ub[b] = dot + c.blocks[b].radius * gnorm;
    if (dot > centre_best) {
      centre_best = dot;
      first = b;
    }
  }
  auto scan = [&](std::size_t b, double best) {
    for (std::size_t i = c.blocks[b].begin; i < c.blocks[b].end; ++i) {
      const double* row = c.rows.data() + i * k;
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += row[j] * g[j];
      best = std::max(best, acc);
    }
    return best;
  };
  double best = scan(first, -std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < nb; ++b) {
    if (b == first) continue;
    const double slack = 1e-12 * (std::abs(ub[b]) + std::abs(best));
    if (ub[b] + slack >= best) best = scan(b, best);
  }
  return best;
}

void BundleEvaluator::evaluate(const DesignPoint& d, std::span<double> sigma_max,
                               std::span<double> t_max) const {
  require(sigma_max.size() == n_samples_ && t_max.size() == n_samples_,
          "output spans must match the sample count");
  const auto& bnd = bundle_->input_bounds;
  const InputVector probe =
      make_input(d, RandomInputs{bnd[2].mid(), bnd[3].mid(), bnd[4].mid(), bnd[5].mid()});
  const Eigen::VectorXd xn = normalize_inputs(probe, bnd);
  const double xv = xn(0), xp = xn(1);
  std::vector<double> g(static_cast<std::size_t>(std::max(temperature_.k, stress_.k)));
  auto features = [&](const Component& c, std::size_t s) {
    for (std::size_t j = 0; j < c.features.size(); ++j) {
      const auto& f = c.features[j];
      double eta[kMaxActiveDim];
      const double* base = f.eta_random.data() + s * f.r;
      for (int a = 0; a < f.r; ++a) eta[a] = base[a] + f.w_speed[a] * xv + f.w_power[a] * xp;
      g[j] = f.poly->predict(std::span<const double>(eta, f.r));
    }
  };
  for (std::size_t s = 0; s < n_samples_; ++s) {
    features(temperature_, s);
    t_max[s] = field_max(temperature_, g.data());
    features(stress_, s);
    sigma_max[s] = field_max(stress_, g.data());
  }
}

}  // namespace pbf
