#pragma once
// Data-driven choice of (C1, C2) by minimizing the closed-form leave-one-out
// criterion ψ̂(C) = n⁻¹Σ_i ((y_i − x_i′θ̃)/(1 − w_i))².
//
// With thresholding disabled (a = 0) this is the exact leave-one-out error of
// ridge at the same h. With thresholding active it is the usual hat-matrix
// approximation: θ̃ is not linear in y.

#include <vector>

#include "projridge/linalg.hpp"
#include "projridge/threshold.hpp"

namespace projridge {

struct TuningGrid {
  std::vector<double> c1_values;  // ascending, positive
  std::vector<double> c2_values;  // ascending, positive
  ScheduleParams schedule;        // alpha/regime (C1, C2 are overwritten per point)

  void validate() const;
};

struct CvResult {
  double best_c1 = 0.0;
  double best_c2 = 0.0;
  Matrix psi_hat;  // rows follow c1_values, columns c2_values; NaN where a point failed
  double best_value = 0.0;
  Eigen::Index best_row = 0;
  Eigen::Index best_col = 0;
};

// ψ̂ at an explicit threshold a >= 0 and ridge parameter h > 0.
double psi_hat_at(const SvdFactorization& F, const Vector& y, double a, double h);

// ψ̂ at the schedule point (a_n, h_n) implied by s for this (n, p).
double psi_hat(const SvdFactorization& F, const Vector& y, const ScheduleParams& s);

CvResult tune(const SvdFactorization& F, const Vector& y, const TuningGrid& grid);

// Scale-aware default grid. With m = max_j|θ̂_j| at h_ref = sqrt(λ_min·λ_max):
//   c1 ∈ {1/32, 1/16, 1/8, 1/4, 1/2, 3/4}·m·n^α
//   c2 such that at a_ref = m/8 the implied h runs over 8 log-spaced points
//   of [λ_min, λ_max] (λ = extreme positive eigenvalues of X′X).
TuningGrid default_grid(const SvdFactorization& F, const Vector& y, double alpha = 0.5);

}  // namespace projridge
