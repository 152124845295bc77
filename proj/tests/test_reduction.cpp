#include <doctest.h>

#include <cmath>
#include <vector>

#include "pbf/doe.hpp"
#include "pbf/error.hpp"
#include "pbf/reduction.hpp"
#include "pbf/rng.hpp"

using namespace pbf;

namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

// Normalized LHS inputs, one row per run.
Eigen::MatrixXd lhs_inputs(int m, std::uint64_t seed) {
  const auto bounds = default_input_bounds();
  const auto doe = generate_doe(m, bounds, seed);
  Eigen::MatrixXd x(m, 6);
  for (int i = 0; i < m; ++i) x.row(i) = normalize_inputs(doe[i], bounds).transpose();
  return x;
}

}  // namespace

TEST_CASE("rank-one matrix is exact at k = 1") {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
  const Eigen::MatrixXd m = a * b.transpose();
  CHECK((reconstruct(decompose(m, 1)) - m).norm() < 1e-12 * m.norm());
  CHECK(truncation_error(m, 1) < 1e-12);
}

TEST_CASE("diagonal singular values and sign convention") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = -1.0;
  const auto f = decompose(m, 2);
  CHECK(f.singular_values(0) == doctest::Approx(3.0));
  CHECK(f.singular_values(1) == doctest::Approx(1.0));
  for (int j = 0; j < 2; ++j) {
    Eigen::Index i;
    f.right_vectors.col(j).cwiseAbs().maxCoeff(&i);
    CHECK(f.right_vectors(i, j) > 0.0);
  }
  CHECK((reconstruct(f) - m).norm() < 1e-14);
}

TEST_CASE("full-rank reconstruction of a random 10 x 6 matrix") {
  const auto m = random_matrix(10, 6, 4);
  CHECK((reconstruct(decompose(m, 6)) - m).norm() <= 1e-10 * m.norm());
  CHECK_THROWS_AS(decompose(m, 0), Error);
  CHECK_THROWS_AS(decompose(m, 7), Error);
}

TEST_CASE("rank-1 truncation of a rank-2 matrix leaves the second singular value") {
  const Eigen::MatrixXd m = random_matrix(8, 2, 9) * random_matrix(2, 5, 10);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto f = decompose(m, 1);
  CHECK((reconstruct(f) - m).norm() == doctest::Approx(svd.singularValues()(1)).epsilon(1e-10));
  CHECK(truncation_error(m, 2) < 1e-12);
}

TEST_CASE("error curve is non-increasing and matches single evaluations") {
  const auto m = random_matrix(12, 9, 21);
  const auto errs = error_curve(m, 9);
  REQUIRE(errs.size() == 9);
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] <= errs[k - 1] + 1e-15);
  for (int k = 1; k <= 9; ++k) CHECK(errs[k - 1] == doctest::Approx(truncation_error(m, k)));
  // Direct evaluation of the mean relative row error at k = 3.
  const auto rec = reconstruct(decompose(m, 3));
  double sum = 0.0;
  for (int i = 0; i < m.rows(); ++i) sum += (m.row(i) - rec.row(i)).norm() / m.row(i).norm();
  CHECK(errs[2] == doctest::Approx(sum / m.rows()).epsilon(1e-12));
}

TEST_CASE("feature count selection") {
  const std::vector<double> a{0.10, 0.045, 0.009};
  CHECK(select_feature_count(a, 0.05, 0.02) == 2);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(select_feature_count(zero, 0.05, 0.02) == 1);
  // Stress curve read off the reference err-vs-k plot.
  const std::vector<double> s{0.39987282961628545, 0.26315456388152675, 0.15059725663747497,
                              0.13418503344473287, 0.10370120666329985, 0.09284355897732577,
                              0.08453758821970234, 0.07918093976700538, 0.07501744014285021,
                              0.07074871407171848};
  CHECK(select_feature_count(s, 0.05, 0.02) == 5);
  CHECK_THROWS_AS(select_feature_count(std::vector<double>{}, 0.05, 0.02), Error);
}

TEST_CASE("input normalization") {
  const auto b = default_input_bounds();
  InputVector mid, lo;
  for (std::size_t i = 0; i < kNumInputs; ++i) {
    mid[i] = b[i].mid();
    lo[i] = b[i].lower;
  }
  CHECK(normalize_inputs(mid, b).norm() < 1e-15);
  CHECK((normalize_inputs(lo, b).array() == -1.0).all());
  CHECK(mid[0] == 550.0);
  CHECK(mid[1] == 110.0);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -0.9, 0.7);
  CHECK((normalize_inputs(denormalize_inputs(x, b), b) - x).norm() < 1e-14);
  InputVector out = mid;
  out[2] = 1000.0;
  CHECK_THROWS_AS(normalize_inputs(out, b), Error);
}

TEST_CASE("quadratic gradients of exact model classes") {
  const auto x = lhs_inputs(60, 2);
  const Eigen::VectorXd lin = 3.0 * x.col(0);
  const auto g = estimate_gradients(x, lin);
  for (int i = 0; i < x.rows(); ++i) {
    Eigen::VectorXd want = Eigen::VectorXd::Zero(6);
    want(0) = 3.0;
    CHECK((g.row(i).transpose() - want).cwiseAbs().maxCoeff() < 1e-8);
  }
  const Eigen::VectorXd sq = x.col(0).array().square();
  const auto g2 = estimate_gradients(x, sq);
  for (int i = 0; i < x.rows(); ++i) {
    Eigen::VectorXd want = Eigen::VectorXd::Zero(6);
    want(0) = 2.0 * x(i, 0);
    CHECK((g2.row(i).transpose() - want).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK_THROWS_AS(estimate_gradients(x.topRows(20), sq.head(20)), Error);
}

TEST_CASE("quadratic gradient of sin is its least-squares slope") {
  // On uniform inputs the best quadratic in x for sin(x) is the line
  // 3 (sin 1 - cos 1) x, so the fitted derivative is flat at about 0.904
  // while cos(x) runs from 0.54 to 1.
  const auto x = lhs_inputs(120, 7);
  const Eigen::VectorXd f = x.col(0).array().sin();
  const auto g = estimate_gradients(x, f);
  const double slope = 3.0 * (std::sin(1.0) - std::cos(1.0));
  for (int i = 0; i < x.rows(); ++i) CHECK(std::abs(g(i, 0) - slope) < 0.02);
}

TEST_CASE("quadratic gradients of a smooth planted function") {
  const auto x = lhs_inputs(120, 8);
  Eigen::VectorXd f(x.rows());
  for (int i = 0; i < x.rows(); ++i)
    f(i) = std::sin(0.5 * x(i, 0)) + std::exp(0.3 * x(i, 1)) + 0.2 * x(i, 2) * x(i, 3);
  const auto g = estimate_gradients(x, f);
  for (int i = 0; i < x.rows(); ++i) {
    CHECK(std::abs(g(i, 0) - 0.5 * std::cos(0.5 * x(i, 0))) < 0.08);
    CHECK(std::abs(g(i, 1) - 0.3 * std::exp(0.3 * x(i, 1))) < 0.08);
    CHECK(std::abs(g(i, 2) - 0.2 * x(i, 3)) < 0.08);
    CHECK(std::abs(g(i, 4)) < 0.08);
  }
}

TEST_CASE("fitted gradient matches finite differences of the fit") {
  const auto x = lhs_inputs(80, 5);
  Eigen::VectorXd f(x.rows());
  for (int i = 0; i < x.rows(); ++i) f(i) = std::exp(0.5 * x(i, 0)) + x(i, 1) * x(i, 2) - x(i, 5);
  const auto q = QuadraticModel::fit(x, f);
  CHECK(q.coefficients().size() == QuadraticModel::term_count(6));
  const double h = 1e-3;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd xi = x.row(i).transpose();
    const auto g = q.gradient(xi);
    for (int j = 0; j < 6; ++j) {
      Eigen::VectorXd a = xi, b = xi;
      a(j) += h;
      b(j) -= h;
      CHECK(std::abs((q.value(a) - q.value(b)) / (2 * h) - g(j)) < 1e-8);
    }
  }
}

TEST_CASE("active subspace of simple gradients") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(20, 6);
  g.col(0).setOnes();
  auto s = discover(g);
  CHECK(s.r == 1);
  CHECK(std::abs(s.w1(0, 0)) == doctest::Approx(1.0));
  CHECK(s.eigenvalues.tail(5).cwiseAbs().maxCoeff() < 1e-14);

  g.col(1).setOnes();
  s = discover(g);
  CHECK(s.r == 1);
  CHECK(std::abs(s.w1(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(s.w1(1, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  for (int i = 1; i < 6; ++i) CHECK(s.eigenvalues(i) <= s.eigenvalues(i - 1) + 1e-15);
}

TEST_CASE("active subspace of a dominant square") {
  const auto x = lhs_inputs(120, 13);
  Eigen::VectorXd f(x.rows());
  for (int i = 0; i < x.rows(); ++i) f(i) = x(i, 0) * x(i, 0) + 0.01 * x(i, 1);
  const auto s = discover(estimate_gradients(x, f));
  CHECK(s.r == 1);
  const double angle = std::acos(std::min(1.0, std::abs(s.w1(0, 0)))) * 180.0 / M_PI;
  CHECK(angle < 5.0);
}

TEST_CASE("active variables") {
  ActiveSubspace s;
  s.w1 = Eigen::MatrixXd::Zero(6, 1);
  s.w1(0, 0) = 1.0;
  Eigen::VectorXd xi = Eigen::VectorXd::Constant(6, 0.3);
  CHECK(active_vars(s, xi)(0) == doctest::Approx(0.3));
  CHECK(active_vars(s, Eigen::VectorXd::Zero(6)).norm() == 0.0);
}

TEST_CASE("snapshot matrix validation") {
  SnapshotMatrix m{Eigen::MatrixXd::Zero(3, 31), SnapshotKind::temperature};
  CHECK_NOTHROW(m.validate());
  m.kind = SnapshotKind::stress;
  CHECK_THROWS_AS(m.validate(), Error);
  m.data = Eigen::MatrixXd::Zero(1, 448);
  CHECK_THROWS_AS(m.validate(), Error);
  m.data = Eigen::MatrixXd::Zero(2, 448);
  m.data(0, 0) = NAN;
  CHECK_THROWS_AS(m.validate(), Error);
}
