#pragma once
// Thresholded ridge: the threshold schedule a_n = C1·n^(−α), the two
// regularization schedules (Gaussian errors and finite-moment errors), hard
// thresholding, index sets M_{ξ,c} = {j : |ξ_j| > c}, and the sparsity
// quantities used to describe which components of θ count as large.
//
// Indices are 0-based throughout the library; the CLI prints 1-based ones.
// Logarithms are natural.

#include <string>
#include <vector>

#include "projridge/linalg.hpp"
#include "projridge/ridge.hpp"

namespace projridge {

enum class Regime { gaussian, moment };

struct ScheduleParams {
  double C1 = 1.0;
  double alpha = 0.5;  // 0 < alpha <= 1/2
  double C2 = 1.0;
  Regime regime = Regime::gaussian;
  // moment regime only
  double l = 1.0;  // p = O(n^l), l >= 1
  int k = 8;       // even moment order
  double t = 1.0;  // target rate exponent

  // Throws input_error on hard violations; returns soft warnings (odd k,
  // 3l(t+1)/k >= 1, t <= 0).
  std::vector<std::string> validate() const;
};

using IndexSet = std::vector<Eigen::Index>;

struct ThresholdedFit {
  Vector theta_tilde;
  IndexSet selected;  // {j : |θ̂_j| > a}, ascending
  double a = 0.0;
  double h = 0.0;
  RidgeFit base;
};

struct SparsityProfile {
  Eigen::Index q_n = 0;      // #{|θ_j| > a}
  Eigen::Index q_minus = 0;  // #{|θ_j| > a·u}
  Eigen::Index q_plus = 0;   // #{|θ_j| > a/u}
  double v_n = 0.0;          // Σ_{|θ_j| <= a} |θ_j|
  double u_n = 0.0;          // 1 + 1/log(log n)
};

struct BandCheck {
  bool lower_ok = false;  // M_{θ, a·u} ⊆ selected
  bool upper_ok = false;  // selected ⊆ M_{θ, a/u}
};

// Smallest n for which log log n > 1.
inline constexpr long kMinScheduleN = 16;

double threshold_value(long n, const ScheduleParams& s);
double regularization_value(long n, long p, const ScheduleParams& s);
// u_n = 1 + 1/log(log n), n >= 16
double band_factor(long n);

// Strict inequality keeps; |θ̂_j| = a is zeroed. Requires a >= 0 (a = 0
// disables thresholding apart from exact zeros).
ThresholdedFit apply_threshold(const RidgeFit& fit, double a);

IndexSet index_set(const Vector& xi, double c);

SparsityProfile sparsity_profile(const Vector& theta, long n, double a);

BandCheck selection_band_check(const Vector& theta, const ThresholdedFit& tfit, const SparsityProfile& profile);

bool is_subset(const IndexSet& a, const IndexSet& b);

}  // namespace projridge
