#include "doctest.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "projridge/kernels.hpp"
#include "test_support.hpp"

using namespace projridge::kernels;

namespace {

// Buffers are offset by one element from an aligned allocation so the vector
// code paths see unaligned addresses as well.
struct Buffers {
  std::vector<double> a, b;
  double* pa() { return a.data() + 1; }
  double* pb() { return b.data() + 1; }
};

Buffers random_buffers(std::size_t n, std::uint64_t seed) {
  auto s = testing::stream(seed, n);
  Buffers buf{std::vector<double>(n + 1), std::vector<double>(n + 1)};
  for (std::size_t i = 0; i <= n; ++i) {
    buf.a[i] = s.normal() * 3.0;
    buf.b[i] = s.normal();
  }
  return buf;
}

bool same_bits(const double* x, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (std::bit_cast<std::uint64_t>(x[i]) != std::bit_cast<std::uint64_t>(y[i])) return false;
  return true;
}

const KernelTable& vec() { return table(Isa::avx2); }
const KernelTable& ref() { return table(Isa::scalar); }

}  // namespace

TEST_CASE("scalar kernels compute the textbook loops") {
  const double a[] = {1.0, -2.0, 3.0};
  const double b[] = {4.0, 5.0, -6.0};
  CHECK(ref().dot(a, b, 3) == doctest::Approx(4.0 - 10.0 - 18.0));
  CHECK(ref().sum_squares(a, 3) == doctest::Approx(14.0));
  double y[] = {1.0, 1.0, 1.0};
  ref().axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == -3.0);
  CHECK(y[2] == 7.0);
  double acc[] = {0.0, 1.0, 2.0};
  ref().accumulate_scaled_squares(0.5, a, acc, 3);
  CHECK(acc[0] == 0.5);
  CHECK(acc[1] == 3.0);
  CHECK(acc[2] == 6.5);
  double out[3];
  CHECK(ref().hard_threshold(a, 2.0, out, 3) == 1);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);  // |−2| is not strictly above 2
  CHECK(out[2] == 3.0);
}

TEST_CASE("empty inputs are harmless") {
  for (Isa isa : {Isa::scalar, Isa::avx2}) {
    if (!isa_available(isa)) continue;
    const KernelTable& t = table(isa);
    CHECK(t.dot(nullptr, nullptr, 0) == 0.0);
    CHECK(t.sum_squares(nullptr, 0) == 0.0);
    t.axpy(1.0, nullptr, nullptr, 0);
    t.accumulate_scaled_squares(1.0, nullptr, nullptr, 0);
    CHECK(t.hard_threshold(nullptr, 1.0, nullptr, 0) == 0);
  }
}

TEST_CASE("vector kernels match the scalar reference for every tail length") {
  if (!isa_available(Isa::avx2)) {
    MESSAGE("AVX2 not available on this machine; equivalence checks skipped");
    return;
  }
  for (std::size_t n = 0; n <= 37; ++n) {
    CAPTURE(n);
    Buffers in = random_buffers(n, 11);

    const double d_ref = ref().dot(in.pa(), in.pb(), n);
    const double d_vec = vec().dot(in.pa(), in.pb(), n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::fabs(in.pa()[i] * in.pb()[i]);
    CHECK(std::fabs(d_ref - d_vec) <= 4.0 * static_cast<double>(n + 1) * 1.2e-16 * scale);

    const double s_ref = ref().sum_squares(in.pa(), n);
    const double s_vec = vec().sum_squares(in.pa(), n);
    CHECK(std::fabs(s_ref - s_vec) <= 4.0 * static_cast<double>(n + 1) * 1.2e-16 * s_ref);

    std::vector<double> y1(in.b), y2(in.b);
    ref().axpy(-0.37, in.pa(), y1.data() + 1, n);
    vec().axpy(-0.37, in.pa(), y2.data() + 1, n);
    CHECK(same_bits(y1.data(), y2.data(), n + 1));

    std::vector<double> acc1(in.b), acc2(in.b);
    ref().accumulate_scaled_squares(0.81, in.pa(), acc1.data() + 1, n);
    vec().accumulate_scaled_squares(0.81, in.pa(), acc2.data() + 1, n);
    CHECK(same_bits(acc1.data(), acc2.data(), n + 1));

    std::vector<double> o1(n + 1, -7.0), o2(n + 1, -7.0);
    const std::size_t k1 = ref().hard_threshold(in.pa(), 2.5, o1.data() + 1, n);
    const std::size_t k2 = vec().hard_threshold(in.pa(), 2.5, o2.data() + 1, n);
    CHECK(k1 == k2);
    CHECK(same_bits(o1.data(), o2.data(), n + 1));
  }
}

TEST_CASE("hard threshold treats ties, signed zeros and NaN identically") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> in{1.0, -1.0, 1.0000000000000002, -0.0, nan, -nan, inf, -inf, 0.5};
  std::vector<double> expected{0.0, 0.0, 1.0000000000000002, 0.0, 0.0, 0.0, inf, -inf, 0.0};
  for (Isa isa : {Isa::scalar, Isa::avx2}) {
    if (!isa_available(isa)) continue;
    CAPTURE(isa_name(isa));
    std::vector<double> out(in.size(), 9.0);
    const std::size_t kept = table(isa).hard_threshold(in.data(), 1.0, out.data(), in.size());
    CHECK(kept == 3);
    CHECK(same_bits(out.data(), expected.data(), in.size()));
  }
}

TEST_CASE("span wrappers dispatch to the active table") {
  const Isa before = active_isa();
  std::vector<double> a{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> b{1.0, 1.0, 1.0, 1.0, 1.0};
  for (Isa isa : {Isa::scalar, Isa::avx2}) {
    if (!isa_available(isa)) continue;
    set_active_isa(isa);
    CHECK(active_isa() == isa);
    CHECK(dot(a, b) == 15.0);
    CHECK(sum_squares(a) == 55.0);
  }
  set_active_isa(before);
  if (!isa_available(Isa::avx2)) CHECK_THROWS(set_active_isa(Isa::avx2));
}
