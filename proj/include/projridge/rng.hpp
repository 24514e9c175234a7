#pragma once
// Counter-based random streams (Philox4x32-10). A stream is a pure function
// of (master seed, purpose, index), so replications can be generated in any
// order or in parallel without changing a single bit.

#include <array>
#include <cstdint>

namespace projridge::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter ctr, Key key);

enum class Purpose : std::uint32_t {
  design = 1,
  noise = 2,
  folds = 3,
  ratecheck_noise = 4,
  test = 0xff,
};

class Stream {
 public:
  Stream(std::uint64_t master_seed, Purpose purpose, std::uint64_t index);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1): midpoints of a 2^-52 grid.
  double uniform();
  // Standard normal by inverse CDF of uniform().
  double normal();
  // Uniform integer in [0, bound), bound > 0, unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t bound);

 private:
  void refill();

  Key key_;
  std::uint32_t index_lo_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

// Standard normal quantile, Φ⁻¹(u) for u in (0, 1).
double normal_quantile(double u);

}  // namespace projridge::rng
