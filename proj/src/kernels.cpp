#include "projridge/kernels.hpp"

#include <cstdlib>
#include <string>

#include "projridge/error.hpp"

namespace projridge::kernels {

#ifndef PROJRIDGE_HAVE_AVX2
// Non-x86 builds: the avx2 entry points forward to the scalar reference so
// the table is always complete; isa_available(avx2) reports false.
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double sum_squares(const double* a, std::size_t n) { return scalar::sum_squares(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void accumulate_scaled_squares(double f, const double* x, double* acc, std::size_t n) {
  scalar::accumulate_scaled_squares(f, x, acc, n);
}
std::size_t hard_threshold(const double* in, double a, double* out, std::size_t n) {
  return scalar::hard_threshold(in, a, out, n);
}
}  // namespace avx2
#endif

namespace {

constexpr KernelTable kScalar{scalar::dot, scalar::sum_squares, scalar::axpy,
                              scalar::accumulate_scaled_squares, scalar::hard_threshold};
constexpr KernelTable kAvx2{avx2::dot, avx2::sum_squares, avx2::axpy,
                            avx2::accumulate_scaled_squares, avx2::hard_threshold};

bool cpu_has_avx2() {
#if defined(PROJRIDGE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  const bool avx2_ok = cpu_has_avx2();
  if (const char* env = std::getenv("PROJRIDGE_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && avx2_ok) return Isa::avx2;
  }
  return avx2_ok ? Isa::avx2 : Isa::scalar;
}

Isa g_active = initial_isa();

}  // namespace

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return g_active; }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) throw input_error("instruction set not available: " + std::string(isa_name(isa)));
  g_active = isa;
}

const KernelTable& table(Isa isa) { return isa == Isa::avx2 ? kAvx2 : kScalar; }

}  // namespace projridge::kernels
