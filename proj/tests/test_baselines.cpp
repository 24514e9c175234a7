#include "doctest.h"

#include <cmath>
#include <limits>

#include "projridge/baselines.hpp"
#include "projridge/error.hpp"
#include "projridge/ridge.hpp"
#include "projridge/simgen.hpp"
#include "test_support.hpp"

using namespace projridge;
using testing::gaussian_matrix;
using testing::gaussian_vector;

namespace {

// Exact LASSO solution for small p by enumerating every support and sign
// pattern: on the right pattern the stationarity conditions are linear.
Vector enumerate_lasso(const Matrix& X, const Vector& y, double lambda) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Vector best = Vector::Zero(p);
  double best_obj = enet_objective(X, y, best, lambda, 0.0);
  long patterns = 1;
  for (Eigen::Index j = 0; j < p; ++j) patterns *= 3;
  for (long code = 1; code < patterns; ++code) {
    std::vector<Eigen::Index> S;
    std::vector<double> sign;
    long c = code;
    for (Eigen::Index j = 0; j < p; ++j, c /= 3) {
      if (c % 3 == 0) continue;
      S.push_back(j);
      sign.push_back(c % 3 == 1 ? 1.0 : -1.0);
    }
    const auto k = static_cast<Eigen::Index>(S.size());
    Matrix XS(n, k);
    Vector sv(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      XS.col(i) = X.col(S[i]);
      sv(i) = sign[i];
    }
    const Vector bS = (XS.transpose() * XS / n).ldlt().solve(XS.transpose() * y / n - lambda * sv);
    bool consistent = true;
    for (Eigen::Index i = 0; i < k; ++i) consistent = consistent && bS(i) * sv(i) > 0.0;
    if (!consistent) continue;
    Vector b = Vector::Zero(p);
    for (Eigen::Index i = 0; i < k; ++i) b(S[i]) = bS(i);
    const double obj = enet_objective(X, y, b, lambda, 0.0);
    if (obj < best_obj) {
      best_obj = obj;
      best = b;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("penalty validation") {
  PenaltyConfig c;
  c.lambda = -1.0;
  CHECK_THROWS_AS(c.validate(), input_error);
  c.lambda = 1.0;
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), input_error);
  c.tol = 1e-7;
  c.lambda2 = 0.5;
  CHECK_THROWS_AS(fit_lasso(Matrix::Ones(2, 2), Vector::Ones(2), c), input_error);
}

TEST_CASE("lambda at or above lambda_max gives the zero vector") {
  auto s = testing::stream(501);
  const Matrix X = gaussian_matrix(s, 20, 50);
  const Vector y = gaussian_vector(s, 20);
  const double lmax = lambda_max(X, y);
  CHECK(lmax == doctest::Approx((X.transpose() * y).cwiseAbs().maxCoeff() / 20.0));
  for (double f : {1.0, 1.5, 100.0}) {
    PenaltyConfig c;
    c.lambda = f * lmax;
    const CdResult r = fit_lasso(X, y, c);
    CHECK(r.converged);
    CHECK(r.coef == Vector::Zero(50));
    c.lambda2 = 3.0;
    CHECK(fit_enet(X, y, c).coef == Vector::Zero(50));
  }
}

TEST_CASE("unpenalized fit on orthonormal columns is least squares") {
  auto s = testing::stream(502);
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(s, 12, 4));
  const Matrix X = qr.householderQ() * Matrix::Identity(12, 4);
  const Vector y = gaussian_vector(s, 12);
  PenaltyConfig c;
  c.lambda = 0.0;
  const CdResult r = fit_lasso(X, y, c);
  CHECK(r.converged);
  CHECK(testing::max_abs(r.coef - X.transpose() * y) <= 1e-10);
}

TEST_CASE("small LASSO agrees with an exact enumeration oracle") {
  auto s = testing::stream(503);
  for (int rep = 0; rep < 25; ++rep) {
    const Matrix X = gaussian_matrix(s, 5, 3);
    const Vector y = gaussian_vector(s, 5) * 2.0;
    const double lambda = lambda_max(X, y) * s.uniform();
    PenaltyConfig c;
    c.lambda = lambda;
    c.tol = 1e-10;
    const CdResult r = fit_lasso(X, y, c);
    REQUIRE(r.converged);
    const Vector exact = enumerate_lasso(X, y, lambda);
    CHECK(enet_objective(X, y, r.coef, lambda, 0.0) ==
          doctest::Approx(enet_objective(X, y, exact, lambda, 0.0)).epsilon(1e-6));
    CHECK(testing::max_abs(r.coef - exact) <= 1e-6);
  }
}

TEST_CASE("ENET degenerations") {
  auto s = testing::stream(504);
  const Matrix X = gaussian_matrix(s, 15, 40);
  const Vector y = gaussian_vector(s, 15);
  SUBCASE("lambda2 = 0 is the LASSO") {
    PenaltyConfig c;
    c.lambda = 0.05;
    const CdResult a = fit_enet(X, y, c);
    const CdResult b = fit_lasso(X, y, c);
    CHECK(testing::max_abs(a.coef - b.coef) <= 1e-10);
  }
  SUBCASE("lambda = 0 is ridge at h = n * lambda2") {
    for (double l2 : {0.05, 0.5, 5.0}) {
      PenaltyConfig c;
      c.lambda = 0.0;
      c.lambda2 = l2;
      c.tol = 1e-13;
      const CdResult r = fit_enet(X, y, c);
      REQUIRE(r.converged);
      const Vector ridge = fit_ridge(factorize(DesignMatrix(X)), y, 15.0 * l2).theta_hat;
      CHECK(testing::max_abs(r.coef - ridge) <= 1e-10 * std::max(1.0, ridge.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("KKT conditions and monotone objective along a warm-started path") {
  const GeneratedInstance inst = make_instance(preset(StudyId::I, 30, 100));
  const Matrix& X = inst.X.entries();
  const Vector y = X * inst.beta + gen_noise(30, 10.0, 20120101, 3);
  for (double l2 : {0.0, 0.1, 10.0}) {
    Vector warm = Vector::Zero(100);
    for (double lambda : lambda_path(X, y)) {
      PenaltyConfig c;
      c.lambda = lambda;
      c.lambda2 = l2;
      c.record_objective = true;
      const CdResult r = fit_enet(X, y, c, &warm);
      REQUIRE(r.converged);
      CHECK(kkt_violation(X, y, r.coef, lambda, l2) <= 10.0 * c.tol);
      const Vector g = X.transpose() * (y - X * r.coef) / 30.0 - l2 * r.coef;
      for (Eigen::Index j = 0; j < 100; ++j) {
        if (r.coef(j) == 0.0) CHECK(std::fabs(g(j)) <= lambda + 10.0 * c.tol);
        else CHECK(std::fabs(g(j) - lambda * (r.coef(j) > 0 ? 1.0 : -1.0)) <= 10.0 * c.tol);
      }
      for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
        CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] * (1.0 + 1e-14));
      CHECK(r.objective_trace.back() == doctest::Approx(enet_objective(X, y, r.coef, lambda, l2)).epsilon(1e-12));
      warm = r.coef;
    }
  }
}

TEST_CASE("iteration cap is reported, not hidden") {
  auto s = testing::stream(505);
  Matrix X = gaussian_matrix(s, 20, 60);
  X.col(1) = X.col(0) + 1e-3 * X.col(1);  // nearly collinear pair slows the sweeps
  const Vector y = gaussian_vector(s, 20);
  PenaltyConfig c;
  c.lambda = lambda_max(X, y) * 1e-3;
  c.max_iter = 1;
  const CdResult r = fit_lasso(X, y, c);
  CHECK_FALSE(r.converged);
  CHECK(r.cycles == 1);
}

TEST_CASE("paths and grids") {
  auto s = testing::stream(506);
  const Matrix X = gaussian_matrix(s, 10, 30);
  const Vector y = gaussian_vector(s, 10);
  const auto path = lambda_path(X, y, 50, 1000.0);
  REQUIRE(path.size() == 50);
  CHECK(path.front() == doctest::Approx(lambda_max(X, y)));
  CHECK(path.back() == doctest::Approx(lambda_max(X, y) / 1000.0));
  for (std::size_t k = 1; k < path.size(); ++k) CHECK(path[k] < path[k - 1]);
  const auto hg = ridge_h_grid(200.0);
  REQUIRE(hg.size() == 50);
  CHECK(hg.front() == doctest::Approx(0.2));
  CHECK(hg.back() == doctest::Approx(200000.0));
  CHECK_THROWS_AS(lambda_path(X, y, 0), input_error);
  CHECK_THROWS_AS(ridge_h_grid(0.0), input_error);
}

TEST_CASE("fold assignment") {
  for (long n : {5L, 6L, 7L, 29L, 30L, 101L}) {
    const FoldAssignment fa = make_folds(n, 5, 42);
    std::vector<long> sizes(5, 0);
    for (int f : fa.fold_of) {
      REQUIRE(f >= 1);
      REQUIRE(f <= 5);
      ++sizes[static_cast<std::size_t>(f - 1)];
    }
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    CHECK(make_folds(n, 5, 42).fold_of == fa.fold_of);
    CHECK(fa.seed == 42);
  }
  CHECK(make_folds(30, 5, 1).fold_of != make_folds(30, 5, 2).fold_of);
  CHECK_THROWS_AS(make_folds(4, 5, 1), input_error);
}

TEST_CASE("k-fold tuning") {
  auto s = testing::stream(507);
  const Matrix X = gaussian_matrix(s, 25, 40);
  Vector beta = Vector::Zero(40);
  beta.head(3) << 2.0, -1.0, 1.5;
  const Vector y = X * beta + 0.5 * gaussian_vector(s, 25);
  const auto path = lambda_path(X, y, 12, 100.0);
  const std::vector<double> l2grid{0.0, 0.1, 1.0};

  SUBCASE("single point") {
    const KfoldResult r = tune_kfold(X, y, {0.3}, {0.2}, 9);
    CHECK(r.best.lambda == 0.3);
    CHECK(r.best.lambda2 == 0.2);
  }
  SUBCASE("duplicates: first occurrence wins") {
    const KfoldResult r = tune_kfold(X, y, {0.3, 0.3}, {0.1, 0.1}, 9);
    CHECK(r.cv_error(0, 0) == r.cv_error(1, 1));
    CHECK(r.best.lambda == 0.3);
    const KfoldResult path_dup = tune_kfold(X, y, {path[3], path[5], path[5]}, {0.0}, 9);
    CHECK(path_dup.cv_error(1, 0) == path_dup.cv_error(2, 0));
  }
  SUBCASE("selection matches an independent recomputation of all fold errors") {
    const KfoldResult r = tune_kfold(X, y, path, l2grid, 9);
    const FoldAssignment fa = make_folds(25, 5, 9);
    Matrix oracle = Matrix::Zero(static_cast<Eigen::Index>(path.size()), 3);
    for (int f = 1; f <= 5; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (Eigen::Index i = 0; i < 25; ++i) (fa.fold_of[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      Matrix Xtr(static_cast<Eigen::Index>(tr.size()), 40), Xte(static_cast<Eigen::Index>(te.size()), 40);
      Vector ytr(Xtr.rows()), yte(Xte.rows());
      for (std::size_t k = 0; k < tr.size(); ++k) {
        Xtr.row(static_cast<Eigen::Index>(k)) = X.row(tr[k]);
        ytr(static_cast<Eigen::Index>(k)) = y(tr[k]);
      }
      for (std::size_t k = 0; k < te.size(); ++k) {
        Xte.row(static_cast<Eigen::Index>(k)) = X.row(te[k]);
        yte(static_cast<Eigen::Index>(k)) = y(te[k]);
      }
      for (std::size_t a = 0; a < path.size(); ++a)
        for (Eigen::Index c = 0; c < 3; ++c) {
          PenaltyConfig cfg;
          cfg.lambda = path[a];
          cfg.lambda2 = l2grid[static_cast<std::size_t>(c)];
          cfg.tol = 1e-12;  // cold start, tight tolerance
          oracle(static_cast<Eigen::Index>(a), c) += (yte - Xte * fit_enet(Xtr, ytr, cfg).coef).squaredNorm() / 25.0;
        }
    }
    CHECK(testing::max_abs(r.cv_error - oracle) <= 1e-5 * oracle.maxCoeff());
    Eigen::Index ba = 0, bc = 0;
    oracle.minCoeff(&ba, &bc);
    CHECK(r.best.lambda == path[static_cast<std::size_t>(ba)]);
    CHECK(r.best.lambda2 == l2grid[static_cast<std::size_t>(bc)]);
  }
  SUBCASE("ridge k-fold against direct refits") {
    const auto hg = ridge_h_grid(spectral_diagnostics(factorize(DesignMatrix(X))).lambda_max, 15);
    const RidgeKfoldResult r = tune_ridge_kfold(X, y, hg, 9);
    const FoldAssignment fa = make_folds(25, 5, 9);
    std::vector<double> oracle(hg.size(), 0.0);
    for (int f = 1; f <= 5; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (Eigen::Index i = 0; i < 25; ++i) (fa.fold_of[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
      const Matrix Xtr = X(tr, Eigen::all);
      const Vector ytr = y(tr);
      for (std::size_t k = 0; k < hg.size(); ++k)
        oracle[k] += (y(te) - X(te, Eigen::all) * testing::primal_ridge(Xtr, ytr, hg[k])).squaredNorm() / 25.0;
    }
    for (std::size_t k = 0; k < hg.size(); ++k) CHECK(r.cv_error[k] == doctest::Approx(oracle[k]).epsilon(1e-9));
    const auto it = std::min_element(oracle.begin(), oracle.end());
    CHECK(r.best_h == hg[static_cast<std::size_t>(it - oracle.begin())]);
  }
}
