#include "projridge/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "projridge/error.hpp"
#include "projridge/ridge.hpp"

namespace projridge {

namespace {

void check_list(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw input_error(std::string(name) + " must be nonempty");
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw input_error(std::string(name) + " must be positive and finite");
  if (!std::is_sorted(v.begin(), v.end())) throw input_error(std::string(name) + " must be ascending");
}

}  // namespace

void TuningGrid::validate() const {
  check_list(c1_values, "c1_values");
  check_list(c2_values, "c2_values");
  ScheduleParams s = schedule;
  s.C1 = c1_values.front();
  s.C2 = c2_values.front();
  s.validate();
}

double psi_hat_at(const SvdFactorization& F, const Vector& y, double a, double h) {
  const RidgeFit fit = fit_ridge(F, y, h);
  const ThresholdedFit tfit = apply_threshold(fit, a);
  if ((fit.leverages.array() >= 1.0 - 1e-12).any())
    throw numerical_error("degenerate leverage; increase regularization");
  const Vector resid = y - F.apply(tfit.theta_tilde);
  const Vector scaled = (resid.array() / (1.0 - fit.leverages.array())).matrix();
  return scaled.squaredNorm() / static_cast<double>(F.n());
}

double psi_hat(const SvdFactorization& F, const Vector& y, const ScheduleParams& s) {
  const long n = static_cast<long>(F.n());
  const long p = static_cast<long>(F.p());
  return psi_hat_at(F, y, threshold_value(n, s), regularization_value(n, p, s));
}

CvResult tune(const SvdFactorization& F, const Vector& y, const TuningGrid& grid) {
  grid.validate();
  const auto rows = static_cast<Eigen::Index>(grid.c1_values.size());
  const auto cols = static_cast<Eigen::Index>(grid.c2_values.size());
  CvResult out;
  out.psi_hat = Matrix::Constant(rows, cols, std::numeric_limits<double>::quiet_NaN());
  bool found = false;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      ScheduleParams s = grid.schedule;
      s.C1 = grid.c1_values[i];
      s.C2 = grid.c2_values[j];
      double v = 0.0;
      try {
        v = psi_hat(F, y, s);
      } catch (const numerical_error&) {
        continue;
      }
      if (!std::isfinite(v)) continue;
      out.psi_hat(i, j) = v;
      // strict comparison keeps the lexicographically smallest (c1, c2) on ties
      if (!found || v < out.best_value) {
        found = true;
        out.best_value = v;
        out.best_row = i;
        out.best_col = j;
      }
    }
  }
  if (!found) throw numerical_error("no admissible tuning point");
  out.best_c1 = grid.c1_values[out.best_row];
  out.best_c2 = grid.c2_values[out.best_col];
  return out;
}

TuningGrid default_grid(const SvdFactorization& F, const Vector& y, double alpha) {
  const long n = static_cast<long>(F.n());
  const long p = static_cast<long>(F.p());
  const SpectralDiagnostics sd = spectral_diagnostics(F);
  const double h_ref = std::sqrt(sd.lambda_min_pos * sd.lambda_max);
  const double m = fit_ridge(F, y, h_ref).theta_hat.cwiseAbs().maxCoeff();
  if (!(m > 0.0)) throw numerical_error("ridge fit is identically zero; cannot scale the tuning grid");

  TuningGrid grid;
  grid.schedule.alpha = alpha;
  const double nalpha = std::pow(static_cast<double>(n), alpha);
  for (double f : {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 3.0 / 4}) grid.c1_values.push_back(f * m * nalpha);

  // h is proportional to C2 at fixed a, so one evaluation at C2 = 1 fixes the scale.
  ScheduleParams unit = grid.schedule;
  unit.C1 = (m / 8.0) * nalpha;
  unit.C2 = 1.0;
  const double h_unit = regularization_value(n, p, unit);
  constexpr int kPoints = 8;
  const double lo = std::log(sd.lambda_min_pos);
  const double hi = std::log(sd.lambda_max);
  for (int k = 0; k < kPoints; ++k) {
    const double h = std::exp(lo + (hi - lo) * k / (kPoints - 1));
    grid.c2_values.push_back(h / h_unit);
  }
  if (!std::is_sorted(grid.c2_values.begin(), grid.c2_values.end()))
    std::sort(grid.c2_values.begin(), grid.c2_values.end());
  return grid;
}

}  // namespace projridge
