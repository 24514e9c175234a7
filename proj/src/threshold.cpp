#include "projridge/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "projridge/error.hpp"
#include "projridge/kernels.hpp"

namespace projridge {

std::vector<std::string> ScheduleParams::validate() const {
  std::vector<std::string> warnings;
  if (!(C1 > 0.0) || !std::isfinite(C1)) throw input_error("C1 must be positive");
  if (!(C2 > 0.0) || !std::isfinite(C2)) throw input_error("C2 must be positive");
  if (!(alpha > 0.0 && alpha <= 0.5)) throw input_error("alpha must lie in (0, 1/2]");
  if (regime == Regime::moment) {
    if (!(l >= 1.0) || !std::isfinite(l)) throw input_error("moment regime requires l >= 1");
    if (k <= 0) throw input_error("moment regime requires a positive moment order k");
    if (!(t > -1.0) || !std::isfinite(t)) throw input_error("moment regime requires t > -1");
    if (k % 2 != 0) warnings.push_back("moment order k should be even");
    if (t <= 0.0) warnings.push_back("t <= 0: outside the range covered by the selection guarantee");
    if (3.0 * l * (t + 1.0) / k >= 1.0) warnings.push_back("3l(t+1)/k >= 1: moment order too small for this rate");
  }
  return warnings;
}

double threshold_value(long n, const ScheduleParams& s) {
  s.validate();
  if (n < 1) throw input_error("n must be positive");
  return s.C1 * std::pow(static_cast<double>(n), -s.alpha);
}

double band_factor(long n) {
  if (n < kMinScheduleN) throw input_error("schedule undefined for tiny n; supply h explicitly");
  return 1.0 + 1.0 / std::log(std::log(static_cast<double>(n)));
}

double regularization_value(long n, long p, const ScheduleParams& s) {
  if (n < kMinScheduleN) throw input_error("schedule undefined for tiny n; supply h explicitly");
  if (p < 1) throw input_error("p must be positive");
  const double a = threshold_value(n, s);
  const double loglog = std::log(std::log(static_cast<double>(n)));
  const double nvp = static_cast<double>(std::max(n, p));
  if (s.regime == Regime::gaussian) return s.C2 / (a * a) * std::pow(loglog, 3) * std::log(nvp);
  // ξ = 3l(t+1)/k, so the exponent 2ξ/(3l) reduces to 2(t+1)/k.
  const double xi = 3.0 * s.l * (s.t + 1.0) / s.k;
  return s.C2 / (a * a) * loglog * loglog * std::pow(nvp, 2.0 * xi / (3.0 * s.l));
}

ThresholdedFit apply_threshold(const RidgeFit& fit, double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw input_error("threshold must be a nonnegative finite number");
  ThresholdedFit out;
  out.a = a;
  out.h = fit.h;
  out.base = fit;
  out.theta_tilde.resize(fit.theta_hat.size());
  const auto len = static_cast<std::size_t>(fit.theta_hat.size());
  const std::size_t kept = kernels::hard_threshold(std::span<const double>(fit.theta_hat.data(), len), a,
                                                   std::span<double>(out.theta_tilde.data(), len));
  out.selected.reserve(kept);
  for (Eigen::Index j = 0; j < out.theta_tilde.size(); ++j)
    if (std::fabs(fit.theta_hat(j)) > a) out.selected.push_back(j);
  return out;
}

IndexSet index_set(const Vector& xi, double c) {
  IndexSet out;
  for (Eigen::Index j = 0; j < xi.size(); ++j)
    if (std::fabs(xi(j)) > c) out.push_back(j);
  return out;
}

SparsityProfile sparsity_profile(const Vector& theta, long n, double a) {
  if (!(a > 0.0)) throw input_error("threshold must be positive");
  SparsityProfile sp;
  sp.u_n = band_factor(n);
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double v = std::fabs(theta(j));
    if (v > a) ++sp.q_n; else sp.v_n += v;
    if (v > a * sp.u_n) ++sp.q_minus;
    if (v > a / sp.u_n) ++sp.q_plus;
  }
  return sp;
}

bool is_subset(const IndexSet& a, const IndexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

BandCheck selection_band_check(const Vector& theta, const ThresholdedFit& tfit, const SparsityProfile& profile) {
  if (theta.size() != tfit.theta_tilde.size()) throw input_error("dimension mismatch in selection_band_check");
  BandCheck bc;
  bc.lower_ok = is_subset(index_set(theta, tfit.a * profile.u_n), tfit.selected);
  bc.upper_ok = is_subset(tfit.selected, index_set(theta, tfit.a / profile.u_n));
  return bc;
}

}  // namespace projridge
