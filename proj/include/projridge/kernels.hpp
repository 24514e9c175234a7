#pragma once
// Data-parallel inner loops used by the estimators.
//
// Every kernel has a scalar reference version and, on x86-64, an AVX2
// version. The active implementation is chosen once at startup from CPUID
// and can be pinned with the environment variable PROJRIDGE_ISA=scalar|avx2.
//
// Contract between the variants:
// - axpy, accumulate_scaled_squares and hard_threshold are bit-identical
//   across variants (no FMA contraction, elementwise operations only).
// - dot and sum_squares use a different summation order in the vector
//   variant and agree with the scalar reference to a relative error bounded
//   by ~n·eps·sum|a_i b_i|.
// - All loads/stores are unaligned; lengths need not be multiples of 4.

#include <cstddef>
#include <span>
#include <string_view>

namespace projridge::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*accumulate_scaled_squares)(double f, const double* x, double* acc, std::size_t n);
  std::size_t (*hard_threshold)(const double* in, double a, double* out, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void accumulate_scaled_squares(double f, const double* x, double* acc, std::size_t n);
std::size_t hard_threshold(const double* in, double a, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void accumulate_scaled_squares(double f, const double* x, double* acc, std::size_t n);
std::size_t hard_threshold(const double* in, double a, double* out, std::size_t n);
}  // namespace avx2

bool isa_available(Isa isa);
Isa active_isa();
std::string_view isa_name(Isa isa);
// Switches the process-wide table. Not thread-safe; intended for tests and
// startup configuration only. Throws input_error if the ISA is unavailable.
void set_active_isa(Isa isa);
const KernelTable& table(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return table(active_isa()).dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
  return table(active_isa()).sum_squares(a.data(), a.size());
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table(active_isa()).axpy(alpha, x.data(), y.data(), x.size());
}

// acc += f * x∘x
inline void accumulate_scaled_squares(double f, std::span<const double> x, std::span<double> acc) {
  table(active_isa()).accumulate_scaled_squares(f, x.data(), acc.data(), x.size());
}

// out_j = in_j if |in_j| > a else 0; returns the number of kept entries.
inline std::size_t hard_threshold(std::span<const double> in, double a, std::span<double> out) {
  return table(active_isa()).hard_threshold(in.data(), a, out.data(), in.size());
}

}  // namespace projridge::kernels
