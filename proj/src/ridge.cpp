#include "projridge/ridge.hpp"

#include <cmath>
#include <span>

#include "projridge/error.hpp"
#include "projridge/kernels.hpp"

namespace projridge {

namespace {

void check_h(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw input_error("regularization must be positive");
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw input_error("sigma must be a nonnegative finite number");
}

// θ must satisfy θ = QQ′θ; fitted vectors carry rounding, hence the slack.
void check_row_space(const SvdFactorization& F, const Vector& theta) {
  if (theta.size() != F.p()) throw input_error("dimension mismatch: theta length");
  const double tol = 1e-9 * std::max(1.0, theta.norm());
  if (F.row_space_residual(theta) > tol) throw input_error("theta is not in the row space of X");
}

}  // namespace

Vector shrinkage_factors(const SvdFactorization& F, double h) {
  const Vector d2 = F.d().array().square();
  return (d2.array() / (d2.array() + h)).matrix();
}

RidgeFit fit_ridge(const SvdFactorization& F, const Vector& y, double h) {
  check_h(h);
  if (y.size() != F.n()) throw input_error("dimension mismatch: y has length " + std::to_string(y.size()));
  if (!y.allFinite()) throw input_error("response has non-finite entries");

  const Vector d2 = F.d().array().square();
  const Vector coef = (F.d().array() / (d2.array() + h) * (F.P().transpose() * y).array()).matrix();

  RidgeFit fit;
  fit.h = h;
  fit.theta_hat = F.Q() * coef;
  fit.leverages = Vector::Zero(F.n());
  const Vector f = shrinkage_factors(F, h);
  std::span<double> acc(fit.leverages.data(), static_cast<std::size_t>(F.n()));
  for (Eigen::Index j = 0; j < F.rank(); ++j) {
    kernels::accumulate_scaled_squares(
        f(j), std::span<const double>(F.P().col(j).data(), static_cast<std::size_t>(F.n())), acc);
  }
  return fit;
}

BiasVarianceOracle bias_variance_oracle(const SvdFactorization& F, const Vector& theta, double h, double sigma) {
  check_h(h);
  check_sigma(sigma);
  check_row_space(F, theta);
  const Vector d2 = F.d().array().square();
  const Vector keep = (h / (d2.array() + h)).matrix();  // (h⁻¹d² + 1)⁻¹
  BiasVarianceOracle out;
  out.bias = -(F.Q() * keep.cwiseProduct(F.Q().transpose() * theta));
  out.var_bound = sigma * sigma / h;
  return out;
}

double directional_variance(const SvdFactorization& F, const Vector& l, double h, double sigma) {
  check_h(h);
  if (l.size() != F.p()) throw input_error("dimension mismatch: l length");
  const Vector d2 = F.d().array().square();
  const Vector ql = F.Q().transpose() * l;
  return sigma * sigma * (d2.array() / (d2.array() + h).square() * ql.array().square()).sum();
}

double expected_l2_error(const SvdFactorization& F, const Vector& theta, double h, double sigma) {
  check_h(h);
  check_sigma(sigma);
  check_row_space(F, theta);
  const Vector d2 = F.d().array().square();
  const double variance = sigma * sigma * (d2.array().square() / (d2.array() + h).square()).sum();
  // X·bias = −P·diag(d·h/(d²+h))·Q′θ, and P has orthonormal columns.
  const Vector xb = (F.d().array() * h / (d2.array() + h) * (F.Q().transpose() * theta).array()).matrix();
  return (variance + xb.squaredNorm()) / static_cast<double>(F.n());
}

double prediction_mse(const SvdFactorization& F, const Vector& theta, double h, double sigma) {
  return sigma * sigma + expected_l2_error(F, theta, h, sigma);
}

}  // namespace projridge
