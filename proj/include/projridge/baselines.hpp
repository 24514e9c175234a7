#pragma once
// LASSO and elastic-net comparison estimators by cyclic coordinate descent,
// and k-fold cross-validation used to tune them (and plain ridge).
//
// Objective: (1/(2n))‖y − Xb‖² + λ‖b‖₁ + (λ₂/2)‖b‖². Columns are used as
// given; there is no internal standardization or intercept.

#include <cstdint>
#include <vector>

#include "projridge/linalg.hpp"

namespace projridge {

struct PenaltyConfig {
  double lambda = 0.0;   // L1 weight
  double lambda2 = 0.0;  // L2 weight; 0 for LASSO
  long max_iter = 100000;  // coordinate cycles (full or active-set)
  double tol = 1e-7;
  bool record_objective = false;

  void validate() const;
};

struct CdResult {
  Vector coef;
  bool converged = false;
  long cycles = 0;
  std::vector<double> objective_trace;  // after every cycle, when requested
};

// Row-major-free view of the training data: X columns are contiguous.
CdResult fit_enet(const Matrix& X, const Vector& y, const PenaltyConfig& cfg, const Vector* warm_start = nullptr);
CdResult fit_lasso(const Matrix& X, const Vector& y, const PenaltyConfig& cfg, const Vector* warm_start = nullptr);

double enet_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda, double lambda2);

// max over j of the KKT violation of the penalized problem at b.
double kkt_violation(const Matrix& X, const Vector& y, const Vector& b, double lambda, double lambda2);

// max_j |x_j′y|/n: the smallest λ with an all-zero solution.
double lambda_max(const Matrix& X, const Vector& y);
// `count` log-spaced values from lambda_max down to lambda_max/ratio.
std::vector<double> lambda_path(const Matrix& X, const Vector& y, int count = 50, double ratio = 1000.0);

struct FoldAssignment {
  std::vector<int> fold_of;  // labels in 1..k
  std::uint64_t seed = 0;
};

// Seeded permutation; position i of the permutation gets fold (i mod k) + 1,
// so fold sizes differ by at most one.
FoldAssignment make_folds(Eigen::Index n, int k, std::uint64_t seed);

struct KfoldResult {
  PenaltyConfig best;
  Matrix cv_error;  // rows: lambda grid, cols: lambda2 grid; NaN when excluded
};

// Mean held-out squared error over 5 folds for every (λ, λ₂); points that
// fail to converge on any fold are excluded. Ties go to the first point in
// (lambda_grid, lambda2_grid) order.
KfoldResult tune_kfold(const Matrix& X, const Vector& y, const std::vector<double>& lambda_grid,
                       const std::vector<double>& lambda2_grid, std::uint64_t seed, int folds = 5,
                       const PenaltyConfig& base = {});

struct RidgeKfoldResult {
  double best_h = 0.0;
  std::vector<double> cv_error;
};

// 5-fold CV for plain ridge over an explicit h grid (first minimum wins).
RidgeKfoldResult tune_ridge_kfold(const Matrix& X, const Vector& y, const std::vector<double>& h_grid,
                                  std::uint64_t seed, int folds = 5);

// `count` log-spaced h from lo_factor·λ_max(X′X) to hi_factor·λ_max(X′X).
std::vector<double> ridge_h_grid(double lambda_max_xtx, int count = 50, double lo_factor = 1e-3,
                                 double hi_factor = 1e3);

}  // namespace projridge
