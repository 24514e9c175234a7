#pragma once
// Ridge estimator of the projection vector, computed in the spectral basis of
// a cached factorization (never forming p×p matrices), plus the closed-form
// bias/variance quantities and the exact finite-n expected L2-norm error.

#include "projridge/linalg.hpp"

namespace projridge {

struct RidgeFit {
  Vector theta_hat;  // Q·D(D² + hI)⁻¹P′y, always in the row space of X
  double h = 0.0;
  Vector leverages;  // w_i = x_i′(X′X + hI)⁻¹x_i ∈ [0, 1)
};

struct BiasVarianceOracle {
  Vector bias;             // −Q(h⁻¹D² + I)⁻¹Q′θ
  double var_bound = 0.0;  // σ²/h, an upper bound on l′var(θ̂)l for unit l
};

// Per-direction shrinkage factors d_j²/(d_j² + h).
Vector shrinkage_factors(const SvdFactorization& F, double h);

RidgeFit fit_ridge(const SvdFactorization& F, const Vector& y, double h);

BiasVarianceOracle bias_variance_oracle(const SvdFactorization& F, const Vector& theta, double h, double sigma);

// l′var(θ̂)l = σ²Σ_j d_j²/(d_j²+h)²·(Q′l)_j²
double directional_variance(const SvdFactorization& F, const Vector& l, double h, double sigma);

// n⁻¹E‖Xθ̂ − Xθ‖² = n⁻¹(σ²Σ_j d_j⁴/(d_j²+h)² + ‖X·bias‖²)
double expected_l2_error(const SvdFactorization& F, const Vector& theta, double h, double sigma);

// n⁻¹E‖y* − Xθ̂‖² = σ² + expected_l2_error
double prediction_mse(const SvdFactorization& F, const Vector& theta, double h, double sigma);

}  // namespace projridge
