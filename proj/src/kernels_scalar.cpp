#include "projridge/kernels.hpp"

#include <cmath>

namespace projridge::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void accumulate_scaled_squares(double f, const double* x, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += f * (x[i] * x[i]);
}

std::size_t hard_threshold(const double* in, double a, double* out, std::size_t n) {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(in[i]) > a) {
      out[i] = in[i];
      ++kept;
    } else {
      out[i] = 0.0;
    }
  }
  return kept;
}

}  // namespace projridge::kernels::scalar
